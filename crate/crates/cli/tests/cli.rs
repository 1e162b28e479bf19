use std::fs;
use std::process::{Command, Output};

fn fraclap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraclap")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn example1_writes_one_row_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ex1.csv");
    let o = fraclap(&["example1", "--s", "0.3,0.7", "--levels", "4,8", "--out", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "kind,s,M,num_prisms,hs_error,l2_error,energy_error,seconds");
    assert_eq!(lines.len(), 1 + 2 * 2);
    assert!(lines[1].starts_with("example1,0.3,4,128,"));
    assert!(stdout(&o).contains("H^s rate"));
}

#[test]
fn sweep_output_is_reproducible() {
    let args = ["example2", "--s", "0.6", "--levels", "4,8", "--threads", "2"];
    let a = fraclap(&args);
    let b = fraclap(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn rates_reads_written_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let o = fraclap(&["example1", "--s", "0.5", "--levels", "4,8,16", "--out", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let o = fraclap(&["rates", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row = out.lines().find(|l| l.starts_with("example1")).unwrap();
    let hs: f64 = row.split_whitespace().nth(3).unwrap().parse().unwrap();
    assert!((-0.40..=-0.27).contains(&hs), "{row}");
}

#[test]
fn dump_mesh_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = fraclap(&["example1", "--s", "0.5", "--levels", "2,4", "--dump-mesh", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let base = fs::read_to_string(dir.path().join("base_M2.txt")).unwrap();
    assert_eq!(base.lines().filter(|l| !l.is_empty()).count(), 9 + 8);
    let axis = fs::read_to_string(dir.path().join("axis_M4_s0.5.txt")).unwrap();
    assert_eq!(axis.lines().count(), 5);
}

#[test]
fn invalid_order_is_a_config_error() {
    let o = fraclap(&["example1", "--s", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = fraclap(&["example1", "--levels", "8,4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_reproduces_affine_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.json");
    fs::write(
        &cfg,
        r#"{"kind":"Dirichlet","s":0.5,"f":{"type":"zero"},"g":{"type":"affine","c":1.0,"ax":2.0,"ay":-1.0},"M":4}"#,
    )
    .unwrap();
    let o = fraclap(&["solve", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut rows = out.lines();
    assert_eq!(rows.next(), Some("x,y,u"));
    let mut count = 0;
    for row in rows {
        let v: Vec<f64> = row.split(',').map(|t| t.parse().unwrap()).collect();
        assert!((v[2] - (1.0 + 2.0 * v[0] - v[1])).abs() < 1e-10);
        count += 1;
    }
    assert_eq!(count, 25);
}

#[test]
fn solve_rejects_incompatible_neumann_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("n.json");
    fs::write(&cfg, r#"{"kind":"Neumann","s":0.5,"f":{"type":"constant","value":1.0},"g":{"type":"zero"},"M":4}"#)
        .unwrap();
    let o = fraclap(&["solve", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("compatibility"));
}

#[test]
fn solve_rejects_malformed_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"kind":"Dirichlet","s":0.5}"#).unwrap();
    assert_eq!(fraclap(&["solve", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn counterexample_report_passes() {
    let o = fraclap(&["counterexample"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("diverges: true"));
}

#[test]
fn properties_pass_and_detect_wrong_constant() {
    let o = fraclap(&["properties"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
    assert!(stdout(&o).contains("unit order recovers"));

    let o = fraclap(&["properties", "--perturb-ds", "0.01"]);
    assert_eq!(o.status.code(), Some(4));
    let out = stdout(&o);
    let energy = out.lines().find(|l| l.contains("energy identity")).unwrap();
    assert!(energy.starts_with("FAIL"));
}
