use std::path::Path;
use std::process::{Command, Output};

use sirp_radar::experiments::{default_config, Axis, DEFAULT_SEED};
use sirp_radar::observations::ObservationSet;
use sirp_radar::CMatrix;

fn sirp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sirp-radar")).args(args).env_remove("SIRP_RADAR_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn kappa_prints_both_information_factors() {
    let o = sirp(&["kappa", "--family", "k", "--a", "2", "--b", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let kappa: f64 = text.lines().next().unwrap().strip_prefix("kappa = ").unwrap().parse().unwrap();
    assert!(kappa > 0.0 && kappa.is_finite());
    assert_eq!(text.lines().nth(1), Some("nu = 0.1"));

    let o = sirp(&["kappa", "--family", "gaussian"]);
    assert_eq!(stdout(&o), "kappa = 4\nnu = 1\n");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["kappa", "--family", "weibull", "--a", "1", "--b", "1"][..],
        &["bounds", "--axis", "scr", "--grid", "1,x"],
        &["arl", "--preset", "fig99"],
        &["estimate", "--input", "/nonexistent/obs.json"],
        &[],
    ] {
        let o = sirp(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn numeric_failure_exits_3() {
    // an all-zero record leaves no residual to estimate the clutter from
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.json");
    ObservationSet::new(CMatrix::zeros(4, 6)).write(&path).unwrap();
    let o = sirp(&["estimate", "--input", path.to_str().unwrap(), "--estimators", "imle"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("residuals"));
}

#[test]
fn estimate_reads_an_observation_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = default_config();
    let mut sweep = cfg.clone();
    sweep.axis = Axis::Scr;
    sweep.grid = vec![20.0];
    let point = sweep.point(20.0).unwrap();
    let (y, _) = point.trial(cfg.seed, 0).unwrap();
    let path = dir.path().join("obs.json");
    ObservationSet::new(y).write(&path).unwrap();

    let o = sirp(&["estimate", "--input", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = out.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let d = row["delta_hat"].as_f64().unwrap();
        assert!((d - cfg.delta).abs() < 0.1, "{row}");
    }
}

#[test]
fn arl_sweep_writes_expected_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = sirp(&["arl", "--axis", "scr", "--grid", "0,10", "--M", "6", "--N", "8", "--name", "probe", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("probe.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("scr_db,delta_exact,delta_closed,delta_asym"));
    assert_eq!(lines.count(), 2);
    assert!(dir.path().join("probe.json").exists());
}

#[test]
fn seed_env_var_overrides_default() {
    let run = |dir: &Path, env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_sirp-radar"));
        cmd.args(["bounds", "--axis", "T", "--grid", "6", "--bounds", "emcb", "--emcb-draws", "100", "--name", "s", "--out"])
            .arg(dir)
            .env_remove("SIRP_RADAR_SEED");
        if let Some(v) = env {
            cmd.env("SIRP_RADAR_SEED", v);
        }
        assert!(cmd.output().unwrap().status.success());
        let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("s.json")).unwrap()).unwrap();
        manifest["seed"].as_u64().unwrap()
    };
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), None), DEFAULT_SEED);
    assert_eq!(run(dir.path(), Some("99")), 99);
}

#[test]
fn help_documents_default_config() {
    let cfg = default_config();
    for sub in ["mse", "bounds", "arl"] {
        let help = stdout(&sirp(&[sub, "--help"]));
        for want in [
            format!("[default: {}]", cfg.m),
            format!("[default: {}]", cfg.t),
            format!("[default: {}]", cfg.trials),
            format!("[default: {}]", cfg.seed),
            "[default: 2,0.5]".to_string(),
            "[default: 1,-3]".to_string(),
            "[default: 60]".to_string(),
        ] {
            assert!(help.contains(&want), "{sub} --help lacks {want}:\n{help}");
        }
    }
}

#[test]
fn output_is_a_function_of_arguments() {
    let args = ["bounds", "--axis", "a", "--grid", "1.5,3", "--emcb-draws", "100", "--name", "r", "--out"];
    let read = |dir: &Path| {
        let mut full: Vec<&str> = args.to_vec();
        full.push(dir.to_str().unwrap());
        assert!(sirp(&full).status.success());
        (std::fs::read(dir.join("r.csv")).unwrap(), std::fs::read(dir.join("r.json")).unwrap())
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(read(a.path()), read(b.path()));
}
