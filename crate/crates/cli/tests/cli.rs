use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_szego-lab"))
        .args(args)
        .env_remove("SZEGO_LAB_GRID_MAX")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn moments_inline_symbol() {
    let o = lab(&["moments", "--coeff", "1=0.5", "--nmax", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("# schema=1\n"));
    assert!(out.contains("# grid_points="));
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 5);
    let c0: f64 = rows[0].split(',').nth(1).unwrap().parse().unwrap();
    assert!((c0 - 1.266_065_877_752_008).abs() < 1e-14);
}

#[test]
fn moments_of_empty_symbol() {
    let o = lab(&["moments", "--nmax", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&stdout(&o)).into_iter().map(String::from).collect::<Vec<_>>();
    assert_eq!(rows, vec!["0,1.0000000000000000e0,0.0000000000000000e0"]);
}

#[test]
fn moments_json_round_trips() {
    let o = lab(&["moments", "--coeff", "1=0.2", "--coeff", "2=0.1", "--nmax", "3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["command"], "moments");
    assert_eq!(v["result"]["moments"].as_array().unwrap().len(), 4);
    assert!(v["symbol"].as_str().unwrap().contains("2 1.0000000000000001e-1"));
}

#[test]
fn malformed_symbol_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.sym");
    std::fs::write(&path, "# header\n0 0 0\n1 0.5\n").unwrap();
    let o = lab(&["moments", "--symbol", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn bad_inline_coefficient_is_a_parse_error() {
    assert_eq!(lab(&["moments", "--coeff", "1:0.5"]).status.code(), Some(2));
    assert_eq!(lab(&["moments", "--coeff", "0=0.5,0.1"]).status.code(), Some(2));
    assert_eq!(lab(&["moments", "--coeff", "1=0.5", "--coeff", "1=0.2"]).status.code(), Some(2));
}

#[test]
fn verify_passes_on_zero_and_cosine() {
    let o = lab(&["verify", "--nmax", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).lines().all(|l| l.starts_with("PASS")));
    let o = lab(&["verify", "--coeff", "1=0.5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["convergence"]["target"].as_f64(), Some(0.25));
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn verify_rejects_corrupted_moments() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let good = stdout(&lab(&["moments", "--coeff", "1=0.5", "--nmax", "6"]));
    let corrupted = good.replace("\n2,1.", "\n2,9.");
    assert_ne!(good, corrupted);
    std::fs::write(&path, corrupted).unwrap();
    let o = lab(&["verify", "--moments", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("first failing check: positivity"), "{}", stderr(&o));

    std::fs::write(&path, good).unwrap();
    let o = lab(&["verify", "--moments", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn coulomb_exact_and_ranges() {
    let o = lab(&["coulomb", "--n", "1", "--exact", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["result"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["result"]["method"], "exact-quadrature");
    assert_eq!(lab(&["coulomb", "--n", "12"]).status.code(), Some(4));
    assert_eq!(lab(&["coulomb", "--n", "3", "--exact"]).status.code(), Some(4));
}

#[test]
fn coulomb_monte_carlo_is_byte_identical() {
    let args = ["coulomb", "--coeff", "1=0.5", "--n", "3", "--samples", "100000", "--seed", "7", "--format", "json"];
    let a = lab(&args);
    let b = lab(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    for key in ["n", "value", "std_err", "samples", "method", "seed"] {
        assert!(!v["result"][key].is_null(), "missing {key}");
    }
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let o = lab(&["cd-check", "--coeff", "1=0.5", "--nmax", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, stdout(&lab(&["cd-check", "--coeff", "1=0.5", "--nmax", "5"])));
    assert_eq!(data_rows(&written).len(), 6);
}

#[test]
fn bs_and_fh_checks() {
    let o = lab(&["bs-check", "--coeff", "1=0.5", "--n", "5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["result"]["mass"].as_f64().unwrap() - 1.0).abs() < 1e-10);

    let o = lab(&["fh-check", "--coeff", "1=0.5", "--n", "3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ratio = v["result"]["ratio"].as_f64().unwrap();
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    assert_eq!(lab(&["fh-check", "--t", "1.5"]).status.code(), Some(4));
}

#[test]
fn grid_cap_reports_quadrature_failure() {
    let o = Command::new(env!("CARGO_BIN_EXE_szego-lab"))
        .args(["moments", "--coeff", "1=0.5", "--nmax", "40"])
        .env("SZEGO_LAB_GRID_MAX", "64")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = Command::new(env!("CARGO_BIN_EXE_szego-lab"))
        .args(["moments"])
        .env("SZEGO_LAB_GRID_MAX", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
