//! End-to-end checks of the experiment runner binary: exit codes, artifact
//! determinism, and the bundled Kepler convergence config.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_conservo")
}

fn experiments_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../experiments")
        .canonicalize()
        .expect("experiments directory")
}

fn run(args: &[&str], out_dir: &Path) -> std::process::Output {
    Command::new(bin())
        .args(args)
        .env("CONSERVO_OUT", out_dir)
        .output()
        .expect("spawn runner")
}

#[test]
fn kepler_table3_reproduces_fourth_order() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = experiments_dir().join("kepler-table3.toml");
    let out = run(&["run", cfg.to_str().unwrap(), "--jobs", "3"], tmp.path());
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in ["kepler-table3-h.csv", "kepler-table3-l.csv", "kepler-table3-hl.csv"] {
        let text = std::fs::read_to_string(tmp.path().join(name)).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "schema,study,system,method,tableau,h,error,fitted_order"
        );
        let orders: Vec<f64> = lines
            .filter_map(|l| l.rsplit(',').next())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(orders.len(), 2, "{name}: {text}");
        for o in orders {
            assert!(
                (o - 4.0).abs() <= 0.1,
                "{name}: fitted order {o} outside 4.0 +/- 0.1"
            );
        }
    }
}

#[test]
fn solar_drift_keeps_projected_invariants_at_machine_accuracy() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = experiments_dir().join("solar-drift.toml");
    let out = run(&["run", cfg.to_str().unwrap(), "--jobs", "2"], tmp.path());
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    // scale residuals by the reference invariants of the loaded system
    let sys = conservo::systems::SolarSystem::from_ephemeris();
    let inv = conservo::ConservativeSystem::invariants(&sys);
    let names = inv.names();
    let text = std::fs::read_to_string(tmp.path().join("solar-drift-eip.csv")).unwrap();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let name = fields[2];
        let residual: f64 = fields[3].parse().unwrap();
        let idx = names.iter().position(|n| *n == name).unwrap();
        let rel = residual.abs() / inv.references()[idx].abs();
        assert!(rel <= 1e-12, "{name}: relative residual {rel:e}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = experiments_dir().join("oscillator-lambda.toml");
    assert!(run(&["run", cfg.to_str().unwrap()], tmp.path()).status.success());
    let first = std::fs::read(tmp.path().join("oscillator-lambda-rk4.csv")).unwrap();
    assert!(run(&["run", cfg.to_str().unwrap()], tmp.path()).status.success());
    let second = std::fs::read(tmp.path().join("oscillator-lambda-rk4.csv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn invalid_step_is_a_usage_error_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("bad.toml");
    std::fs::write(
        &cfg_path,
        r#"
study = "invariant-drift"
system = "kepler"
h = -0.5
horizon = 1.0
output = "bad.csv"
"#,
    )
    .unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&["run", cfg_path.to_str().unwrap()], &out_dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.join("bad.csv").exists());
}

#[test]
fn unknown_names_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("system", "system = \"hyperion\"", "method = \"eip\""),
        ("method", "system = \"kepler\"", "method = \"leapfrog-ish\""),
        ("tableau", "system = \"kepler\"", "tableau = \"RK7\""),
    ];
    for (tag, system_line, extra_line) in cases {
        let cfg_path = tmp.path().join(format!("bad-{tag}.toml"));
        let text = format!(
            "study = \"invariant-drift\"\n{system_line}\n{extra_line}\nh = 0.03\nhorizon = 0.3\noutput = \"x.csv\"\n"
        );
        std::fs::write(&cfg_path, text).unwrap();
        let out = run(&["run", cfg_path.to_str().unwrap()], tmp.path());
        assert_eq!(out.status.code(), Some(2), "{tag}");
    }
}

#[test]
fn long_configs_refuse_to_run_without_the_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = experiments_dir().join("solar-drift-long.toml");
    let out = run(&["run", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("--long"), "stderr: {msg}");
}

#[test]
fn integration_blowup_exits_with_runtime_code_and_time() {
    let tmp = tempfile::tempdir().unwrap();
    // explicit Euler on the stiff oscillator amplifies by ~theta each step
    // and overflows to a non-finite stage within a few dozen steps
    let cfg_path = tmp.path().join("crash.toml");
    std::fs::write(
        &cfg_path,
        r#"
study = "invariant-drift"
system = "harmonic"
method = "bare-rk"
tableau = "RK1"
h = 1.0e9
horizon = 1.0e11
output = "crash.csv"

[params]
omega = 10.0
"#,
    )
    .unwrap();
    let out = run(&["run", cfg_path.to_str().unwrap()], tmp.path());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(3), "stderr: {stderr}");
    assert!(stderr.contains("aborted at t ="), "stderr: {stderr}");
    assert!(!tmp.path().join("crash.csv").exists());
}

#[test]
fn listing_subcommands_work() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["list-systems"], tmp.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["harmonic", "kepler", "solar", "particle-uniform", "gpe-plane"] {
        assert!(text.contains(name), "missing {name} in {text}");
    }
    let out = run(&["list-methods"], tmp.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("eip") && text.contains("RK5") && text.contains("midpoint"));
}

#[test]
fn gpe_snapshot_study_writes_field_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("snap.toml");
    std::fs::write(
        &cfg_path,
        r#"
study = "snapshot"
system = "gpe-vortex"
method = "eip"
invariants = ["M"]
h = 0.001
horizon = 0.02
sample_stride = 5
snapshot_times = [0.01, 0.02]
output = "vortex.csv"

[params]
nx = 16
ny = 16
beta = 1.0
rotation = 0.5
"#,
    )
    .unwrap();
    let out = run(&["run", cfg_path.to_str().unwrap()], tmp.path());
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(tmp.path().join("vortex.csv").exists());
    assert!(tmp.path().join("vortex-t0.0100.snap").exists());
    assert!(tmp.path().join("vortex-t0.0200.snap").exists());
    let drift = std::fs::read_to_string(tmp.path().join("vortex.csv")).unwrap();
    assert!(drift.starts_with("schema,t,invariant_name,residual"));
    assert!(drift.contains(",M,") && drift.contains(",E,"));
}
