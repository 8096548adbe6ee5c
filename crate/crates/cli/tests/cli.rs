use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn afm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afm")).args(args).env_remove("AFM_SEED").output().expect("run afm")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json_lines(o: &Output) -> Vec<serde_json::Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).expect("json line")).collect()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (path(dir.path(), "a.csv"), path(dir.path(), "b.csv"));
    for f in [&a, &b] {
        let o = afm(&["simulate", "--d", "0.3", "--n", "1000", "--seed", "7", "--format", "csv", "-o", f]);
        assert!(o.status.success(), "{o:?}");
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = path(dir.path(), "c.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_afm"))
        .args(["simulate", "--d", "0.3", "--n", "1000", "--format", "csv", "-o", &c])
        .env("AFM_SEED", "7")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn simulate_then_fit_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["csv", "json"] {
        let f = path(dir.path(), &format!("sim.{format}"));
        let o = afm(&["simulate", "--d", "0.25", "--ar", "0.3", "--n", "1500", "--seed", "3", "--format", format, "-o", &f]);
        assert!(o.status.success());
        let o = afm(&["fit", "-i", &f, "--p", "1"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let rows = json_lines(&o);
        assert_eq!(rows[0]["parameter"], "d");
        assert!((rows[0]["estimate"].as_f64().unwrap() - 0.25).abs() < 0.15);
        assert!(rows[0]["se_hessian"].as_f64().unwrap() > 0.0);
        assert!(rows[0]["se_exact"].as_f64().unwrap() > 0.0);
        assert_eq!(rows[2]["section"], "summary");
    }
}

#[test]
fn gwtest_identical_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let x = path(dir.path(), "x.csv");
    let y = path(dir.path(), "y.csv");
    fs::write(&x, "pred\n1.0\n2.0\n1.5\n0.5\n3.0\n").unwrap();
    fs::write(&y, "2\n2\n1\n1\n2\n").unwrap();
    let o = afm(&["gwtest", "--x", &x, "--z", &x, "--y", &y]);
    assert!(o.status.success());
    let r = &json_lines(&o)[0];
    assert_eq!(r["statistic"], 0.0);
    assert_eq!(r["p_value"], 1.0);
}

#[test]
fn rolling_table_feeds_gwtest() {
    let dir = tempfile::tempdir().unwrap();
    let s = path(dir.path(), "s.csv");
    let t = path(dir.path(), "roll.csv");
    assert!(afm(&["simulate", "--d", "0.3", "--n", "400", "--seed", "5", "--format", "csv", "-o", &s]).status.success());
    let o = afm(&["forecast", "-i", &s, "--t0", "370", "--tau", "2", "--count", "30", "--fit-once", "--format", "csv", "-o", &t]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = afm(&["gwtest", "--table", &t, "--tau", "2", "--method", "andrews_kernel"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &json_lines(&o)[0];
    assert_eq!(r["n"], 30);
    assert_eq!(r["method"], "andrews_kernel");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(afm(&["fit", "--bogus"]).status.code(), Some(1));
    assert_eq!(afm(&["fit", "-i", "/nonexistent/file.csv"]).status.code(), Some(1));
    let bad = path(dir.path(), "bad.csv");
    fs::write(&bad, "1\n2\nabc\n").unwrap();
    assert_eq!(afm(&["fit", "-i", &bad]).status.code(), Some(1));
    assert_eq!(afm(&["acvf", "--d", "0.7"]).status.code(), Some(1));
    let flat = path(dir.path(), "flat.csv");
    fs::write(&flat, "5\n".repeat(50)).unwrap();
    let o = afm(&["fit", "-i", &flat]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["exit_code"], 2);
    let x = path(dir.path(), "x.csv");
    fs::write(&x, "1\n2\n3\n4\n5\n").unwrap();
    let o = afm(&["gwtest", "--x", &x, "--z", &x, "--y", &x, "--tau", "2", "--method", "lumley_heagerty"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_lists_flags() {
    let cases: &[(&str, &[&str])] = &[
        ("fit", &["--input", "--p", "--q", "--fix", "--format", "--output"]),
        ("select", &["--p-max", "--q-max"]),
        ("acvf", &["--d", "--ar", "--ma", "--sigma2", "--h-max", "--hybrid"]),
        ("spectrum", &["--points", "--input"]),
        ("irf", &["--h-max"]),
        ("simulate", &["--n", "--seed", "AFM_SEED"]),
        ("forecast", &["--ahead", "--t0", "--tau", "--count", "--fit-once"]),
        ("gwtest", &["--x", "--z", "--y", "--table", "--method", "--alternative", "--bandwidth"]),
        ("diag", &["--max-lag", "--alpha"]),
        ("smv", &["--n"]),
    ];
    for (cmd, flags) in cases {
        let o = afm(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        for f in *flags {
            assert!(text.contains(f), "{cmd} --help lacks {f}");
        }
    }
}

#[test]
fn acvf_hybrid_marks_method() {
    let o = afm(&["acvf", "--d", "0.3", "--h-max", "60", "--hybrid", "--switch-lag", "50", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "lag,gamma,acf,method");
    assert!(lines[51].ends_with(",exact") && lines[52].ends_with(",asymptotic"));
}

#[test]
fn diag_sections() {
    let dir = tempfile::tempdir().unwrap();
    let s = path(dir.path(), "s.csv");
    assert!(afm(&["simulate", "--d", "0.2", "--n", "500", "--seed", "9", "--format", "csv", "-o", &s]).status.success());
    let o = afm(&["diag", "-i", &s, "--max-lag", "12"]);
    assert!(o.status.success());
    let rows = json_lines(&o);
    let count = |name: &str| rows.iter().filter(|r| r["section"] == name).count();
    assert_eq!((count("residuals"), count("acf"), count("ljung_box"), count("stationarity")), (500, 12, 12, 1));
}
