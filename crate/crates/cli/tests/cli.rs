use std::process::{Command, Output};

fn qdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdiff"))
        .args(args)
        .env_remove("QDIFF_PRECISION_BITS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn fixture_listing() {
    let o = qdiff(&["fixture"]);
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    for n in ["figure1_degrees", "partial_theta", "case1_gamma2", "case2", "eq4j_oracle"] {
        assert!(names.iter().any(|x| x == n), "missing {n}");
    }
}

#[test]
fn fixture_document_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("theta.json");
    let o = qdiff(&["fixture", "theta_base"]);
    assert!(o.status.success());
    std::fs::write(&path, &o.stdout).unwrap();
    let c = qdiff(&["--nmax", "24", "coeffs", path.to_str().unwrap()]);
    assert!(c.status.success(), "{}", String::from_utf8_lossy(&c.stderr));
    let rows = stdout(&c);
    assert!(rows.starts_with("n,"));
    assert_eq!(rows.lines().count(), 26);
}

#[test]
fn exact_recurrence_oracle() {
    let o = qdiff(&["coeffs", "eq4j_oracle"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
    assert_eq!(rows[0], "1,1.6e1,true");
}

#[test]
fn theta_value_near_a_zero() {
    let o = qdiff(&["--precision-bits", "256", "theta", "--q", "0.3", "--z", "-0.3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let re: f64 = v["value"][0].as_str().unwrap().parse().unwrap();
    // -q is a zero of θ(·, q) and the truncation is exact far beyond f64
    assert!(re.abs() < 1e-60);
}

#[test]
fn theta_growth_table() {
    let o = qdiff(&["--precision-bits", "128", "theta", "--q", "0.3", "--growth", "--rmin", "1e3", "--rmax", "1e5", "--steps", "6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().starts_with("r,"));
    assert!(text.lines().count() > 6);
}

#[test]
fn analyze_is_deterministic() {
    let a = qdiff(&["--precision-bits", "256", "analyze", "theta_base"]);
    let b = qdiff(&["--precision-bits", "256", "analyze", "theta_base"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(v.get("manifest").is_some());
}

#[test]
fn out_directory_receives_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = qdiff(&["--precision-bits", "256", "--out", dir.path().to_str().unwrap(), "analyze", "theta_base"]);
    assert!(o.status.success());
    assert!(dir.path().join("report.json").exists());
    assert!(dir.path().join("coeffs.csv").exists());
}

#[test]
fn malformed_instance_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"q":["1.5","0"],"a":[[["1","0"]],[["1","0"]]]}"#).unwrap();
    let o = qdiff(&["analyze", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("q"));

    std::fs::write(&path, "not json").unwrap();
    assert_eq!(qdiff(&["analyze", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn incommensurate_instance_exits_4() {
    let o = qdiff(&["--precision-bits", "256", "analyze", "case1_irrational"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn selftest_passes() {
    let o = qdiff(&["--precision-bits", "128", "selftest"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn vendored_fixture_files_match_builtins() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    for name in stdout(&qdiff(&["fixture"])).lines() {
        let file = std::fs::read(dir.join(format!("{name}.json"))).unwrap();
        assert_eq!(file, qdiff(&["fixture", name]).stdout, "{name}.json is stale");
    }
}
