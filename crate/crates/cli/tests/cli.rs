use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gcap(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcap")).args(args).current_dir(cwd).output().expect("spawn gcap")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn verify_passes_on_clean_build() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcap(&["verify"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().all(|l| l.starts_with("PASS ")), "{text}");
    for suite in ["resolvent norms", "A_lambda norms", "L-stability", "z-bounds", "implicit residuals"] {
        assert!(text.contains(suite), "missing suite {suite}");
    }
}

#[test]
fn missing_config_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcap(&["sweep", "no/such/config.json"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("no/such/config.json"), "{err}");
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"horizon": 1.0, "epsilon": [0.1]}"#);
    let out = gcap(&["sweep", &cfg], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon"));
}

#[test]
fn sweep_writes_csv_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"schemes": ["FO_Y", "SO_IMEX"], "eps": [0.5, 0.1], "dt": [0.1, 0.05], "horizon": 0.5,
            "output": "sweep.csv", "plot_data": "sweep.dat"}"#,
    );
    let out = gcap(&["sweep", "--config", &cfg, "--jobs", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "scheme,eps,dt,horizon,n_steps,err_y,err_y_gc,err_v,err_v_gc,gc_proxy,status");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.ends_with(",false,ok")));
    assert!(rows[0].starts_with("FO_Y,0.1,0.05,"));
    assert!(rows[7].starts_with("SO_IMEX,0.5,0.1,"));
    let plot = fs::read_to_string(dir.path().join("sweep.dat")).unwrap();
    assert_eq!(plot.matches("# scheme=").count(), 4);
}

#[test]
fn out_flag_overrides_config_and_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"eps": [0.2, 0.02], "dt": [0.1], "horizon": 0.5, "output": "ignored.csv"}"#,
    );
    let a = gcap(&["sweep", &cfg, "--out", "a.csv", "--jobs", "1"], dir.path());
    let b = gcap(&["sweep", &cfg, "--out", "-", "--jobs", "3"], dir.path());
    assert!(a.status.success() && b.status.success());
    assert!(!dir.path().join("ignored.csv").exists());
    assert_eq!(fs::read(dir.path().join("a.csv")).unwrap(), b.stdout);
}

#[test]
fn trajectory_dumps_stiff_and_limit_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "t.json", r#"{"eps": [0.1], "dt": [0.25], "horizon": 1.0}"#);
    let stiff = gcap(&["trajectory", &cfg], dir.path());
    assert!(stiff.status.success());
    let text = String::from_utf8(stiff.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("t,x1,x2,v1,v2"));
    assert_eq!(text.lines().nth(1), Some("0.0,1.0,1.0,3.0,3.0"));
    assert_eq!(text.lines().count(), 6);

    // Limit schemes start from the guiding center x⁰ − ε(v⁰)⊥ = (1.3, 0.7).
    let limit = gcap(&["trajectory", &cfg, "--scheme", "limit_euler", "--dt", "0.5"], dir.path());
    assert!(limit.status.success());
    let text = String::from_utf8(limit.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("t,y1,y2"));
    assert_eq!(text.lines().nth(1), Some("0.0,1.3,0.7"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn trajectory_rejects_unknown_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcap(&["trajectory", "--scheme", "RK45"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn ensemble_writes_coupling_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "e.json",
        r#"{"ensemble": {"particles": 40, "eps": [0.01, 0.001], "dt": 0.05, "horizon": 0.25, "oracle_particles": 8,
            "output": "coupling.csv"}}"#,
    );
    let a = gcap(&["ensemble", &cfg, "--seed", "7"], dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let csv = fs::read_to_string(dir.path().join("coupling.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("FO_Y~LIMIT_EULER,40,0.01,0.05,5,"));
    assert!(rows[1].starts_with("FO_Y~LIMIT_EULER,8,0.01,"));
    assert!(!rows[1].ends_with(','), "sub-cloud row carries the exact distance");

    let b = gcap(&["ensemble", &cfg, "--seed", "7", "--out", "-", "--jobs", "1"], dir.path());
    assert_eq!(csv.as_bytes(), b.stdout.as_slice());
    let c = gcap(&["ensemble", &cfg, "--seed", "8", "--out", "-"], dir.path());
    assert_ne!(csv.as_bytes(), c.stdout.as_slice());
}

#[test]
fn ensemble_without_section_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e.json", "{}");
    let out = gcap(&["ensemble", &cfg], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("ensemble"));
}
