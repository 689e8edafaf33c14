use std::fs;
use std::process::{Command, Output};

fn ldp_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldp-lab")).args(args).env_remove("LDP_LAB_THREADS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"));
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

fn floats(csv: &str, name: &str) -> Vec<f64> {
    column(csv, name).iter().map(|v| v.parse().unwrap()).collect()
}

#[test]
fn wigner_rate_hits_closed_form_values() {
    let o = ldp_lab(&["wigner-rate", "--d", "4", "--beta", "1", "--t-max", "5"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    let ts = floats(&csv, "t");
    let js = floats(&csv, "j");
    let at = |t: f64| js[ts.iter().position(|&s| s == t).unwrap()];
    assert_eq!(at(2.0), 0.0);
    assert!((at(3.0) - 0.25).abs() < 1e-12);
}

#[test]
fn cycles_phi_row() {
    let o = ldp_lab(&["cycles-phi", "--d", "3", "--t", "2"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert_eq!(csv.lines().count(), 2);
    assert!((floats(&csv, "theta")[0] - 1.0 / 3.0).abs() < 1e-15);
    assert!((floats(&csv, "phi_dense")[0] - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(floats(&csv, "phi_sparse")[0], 0.5);
}

#[test]
fn ising_solve_is_reproducible() {
    let args = ["ising-solve", "--graph", "star", "--n", "10", "--scale", "0.2", "--seed", "7"];
    let a = ldp_lab(&args);
    let b = ldp_lab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let csv = stdout(&a);
    assert!(floats(&csv, "sup")[0] <= floats(&csv, "log_z")[0]);
}

#[test]
fn output_format_is_plain_csv() {
    let csv = stdout(&ldp_lab(&["legendre", "--points", "5"]));
    assert!(!csv.contains('\r'));
    assert!(csv.starts_with("family,lambda,"));
    assert_eq!(csv.lines().count(), 1 + 4 * 5);
    for v in column(&csv, "log_laplace") {
        let parsed: f64 = v.parse().unwrap();
        assert_eq!(format!("{parsed:.16e}"), v);
    }
}

#[test]
fn usage_errors_exit_with_2() {
    assert_eq!(ldp_lab(&["wigner-rate", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(ldp_lab(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(ldp_lab(&["wigner-rate", "--beta", "3"]).status.code(), Some(2));
    assert_eq!(ldp_lab(&["cycles-phi", "--t", "0.5"]).status.code(), Some(2));
    assert_eq!(ldp_lab(&["legendre", "--threads", "0"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_ldp-lab")).args(["cycles-phi"]).env("LDP_LAB_THREADS", "many").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn certification_failures_exit_with_3() {
    let o = ldp_lab(&["ising-certify", "--n", "3", "--mesh", "1.0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("too coarse"));
}

#[test]
fn json_report_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("phi.csv");
    let o = ldp_lab(&["cycles-phi", "--t", "2", "--t", "4", "--seed", "3", "--out", out.to_str().unwrap(), "--json"]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("phi.json")).unwrap()).unwrap();
    assert_eq!(report["experiment"], "cycles-phi");
    assert_eq!(report["seed"], 3);
    assert_eq!(report["params"]["d"], 3);
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
    assert_eq!(report["rows"][1]["theta"], 1.0);
    assert!(report["meta"]["version"].is_string());
    assert!(report["meta"]["timestamp"].is_u64());
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 3);

    let o = ldp_lab(&["cycles-phi", "--t", "2", "--json"]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["rows"][0]["phi_sparse"], 0.5);
}

#[test]
fn coupling_from_edge_list_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("triangle.txt");
    fs::write(&edges, "# triangle\n0 1\n1 2\n2 0\n").unwrap();
    let exported = dir.path().join("a.csv");
    let o = ldp_lab(&[
        "ising-solve",
        "--graph-file",
        edges.to_str().unwrap(),
        "--scale",
        "0.5",
        "--export-matrix",
        exported.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(floats(&stdout(&o), "n")[0], 3.0);
    let a = ldp_core::io::read_dense_matrix(fs::read(&exported).unwrap().as_slice()).unwrap();
    assert_eq!(a.get(0, 2), 0.5);
    assert_eq!(a.get(1, 1), 0.0);

    let o = ldp_lab(&["ising-certify", "--coupling-file", exported.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(column(&stdout(&o), "bound_ok"), vec!["true"]);
}

#[test]
fn threads_do_not_change_results() {
    let run = |threads: &str| ldp_lab(&["cycles-mc", "--trials", "200", "--seed", "5", "--threads", threads]).stdout;
    assert_eq!(run("1"), run("3"));
    let env = Command::new(env!("CARGO_BIN_EXE_ldp-lab"))
        .args(["cycles-mc", "--trials", "200", "--seed", "5"])
        .env("LDP_LAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(env.stdout, run("1"));
}

#[test]
fn help_documents_csv_columns() {
    for cmd in ["legendre", "ising-certify", "ising-solve", "wigner-rate", "wigner-mc", "wigner-shift", "cycles-phi", "cycles-candidates", "cycles-opt", "cycles-mc", "nets-verify"] {
        let o = ldp_lab(&[cmd, "--help"]);
        assert!(o.status.success());
        assert!(stdout(&o).contains("CSV columns:"), "{cmd} help lacks the CSV schema");
    }
}
