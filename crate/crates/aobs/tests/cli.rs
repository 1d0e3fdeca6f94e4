use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use aobs::format::read_state;
use aobs::report::read_csv;
use aobs_core::{PhysicalState, Store, TabularPbs};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn aobs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aobs")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn eval_table_one() {
    for state in ["abc.json", "abc_rows.json"] {
        let o = aobs(&["eval", path(&data(state)), path(&data("b1c0.json"))]);
        assert!(o.status.success());
        assert_eq!(stdout(&o), "0.42\n");
    }
    let o = aobs(&["eval", path(&data("abc.json")), path(&data("always.json"))]);
    assert_eq!(stdout(&o), "1.0\n");
}

#[test]
fn eval_rejects_unknown_variable() {
    let o = aobs(&["eval", path(&data("abc.json")), path(&data("unknown_var.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown variable"));
}

#[test]
fn act_table_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = aobs(&[
        "act",
        path(&data("xyz_rows.json")),
        path(&data("always.json")),
        path(&data("xyz_action.json")),
        "--out",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("size_metric before: "));
    assert!(stdout(&o).contains("size_metric after: 20"));

    let mut st = Store::new();
    let (_, s) = read_state(&mut st, &std::fs::read_to_string(&out).unwrap()).unwrap();
    let expect = TabularPbs::from_rows(vec![
        (0.7, PhysicalState::from_values(&[0, 2, 1])),
        (0.3, PhysicalState::from_values(&[0, 2, 0])),
    ])
    .canonical();
    assert!(st.enumerate_states(s.root).unwrap().canonical().approx_eq(&expect, 1e-9));
}

#[test]
fn act_with_unselected_condition_keeps_the_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("same.json");
    let o = aobs(&[
        "act",
        path(&data("abc.json")),
        path(&data("x_unsat.json")),
        path(&data("b_to_0.json")),
        "--out",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut a = Store::new();
    let mut b = Store::new();
    let before = read_state(&mut a, &std::fs::read_to_string(data("abc.json")).unwrap()).unwrap();
    let after = read_state(&mut b, &std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(before.1.root, after.1.root);
}

#[test]
fn act_rejects_bad_action() {
    let dir = tempfile::tempdir().unwrap();
    let o = aobs(&[
        "act",
        path(&data("xyz_rows.json")),
        path(&data("always.json")),
        path(&data("bad_action.json")),
        "--out",
        path(&dir.path().join("x.json")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn export_dot_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.dot"), dir.path().join("b.dot"));
    for out in [&a, &b] {
        let o = aobs(&["export-dot", path(&data("abc.json")), "--out", path(out)]);
        assert!(o.status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    // one AND over a=0 and two ORs, as in the factored abc state
    assert_eq!(text.matches("shape=box").count(), 1);
    assert_eq!(text.matches("shape=ellipse").count(), 2);
    assert_eq!(text.matches("shape=plaintext").count(), 5);
    for w in ["0.400", "0.600", "0.700", "0.300"] {
        assert!(text.contains(&format!("[label=\"{w}\"]")));
    }
}

#[test]
fn export_dot_rejects_malformed_state() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"universe\": [\"a\"], \"root\": {\"lit\": {\"var\": \"b\", \"value\": 0}}}").unwrap();
    assert_eq!(aobs(&["export-dot", path(&bad)]).status.code(), Some(2));
}

#[test]
fn bench_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = aobs(&[
        "bench", "--vars", "30", "--values", "8", "--actions", "35", "--effects", "3", "--assigns", "3",
        "--cond-arity", "3", "--seeds", "50", "--out", path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("fitted exponent"));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("seed,step,n_states,n_naive,n_aobs,n_bdd,ms_aobs,ms_bdd\n"));
    let rows = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 50 * 36);
    assert!(rows.iter().all(|r| r.n_bdd.is_none() && r.n_naive == 30 * r.n_states));
}

#[test]
fn bench_with_bdd_fills_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = aobs(&["bench", "--vars", "6", "--values", "3", "--actions", "4", "--seeds", "2", "--with-bdd", "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 2 * 5);
    assert!(rows.iter().all(|r| r.n_bdd.is_some() && r.ms_bdd.is_some()));
}

#[test]
fn bench_rejects_zero_seeds() {
    let o = aobs(&["bench", "--seeds", "0", "--out", "unused.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_modes() {
    let o = aobs(&["verify"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("1000/1000 ok"));
    let o = aobs(&["verify", "--cases", "1"]);
    assert!(stdout(&o).starts_with("1/1 ok"));
    let o = aobs(&["verify", "--cases", "2", "--seed", "17", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed 17"));
}
