use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn steinitz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steinitz")).args(args).output().expect("spawn steinitz")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json_out(o: &Output) -> Value {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn ok(o: &Output) {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn two_vectors_gs_achieves_their_norm() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "pair.json", r#"{"dim":2,"gauge":{"p":2},"vectors":[[0.6,0.8],[-0.6,-0.8]]}"#);
    let v = json_out(&steinitz(&["order", "--input", s(&f), "--algo", "gs"]));
    let achieved = v["runs"][0]["achieved"].as_f64().unwrap();
    assert!((achieved - 1.0).abs() < 1e-12, "{achieved}");
}

#[test]
fn planar_simplex_oracle_is_one() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("simplex.json");
    ok(&steinitz(&["gen", "--kind", "simplex", "--d", "2", "--out", s(&inst)]));
    let v = json_out(&steinitz(&["order", "--input", s(&inst), "--algo", "oracle"]));
    let achieved = v["runs"][0]["achieved"].as_f64().unwrap();
    assert!((achieved - 1.0).abs() < 1e-9, "{achieved}");
}

#[test]
fn malformed_input_exits_one() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.json", "{ not json");
    let o = steinitz(&["order", "--input", s(&f)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert_eq!(code(&steinitz(&["order"])), 1);
}

#[test]
fn two_direction_reduction_certifies() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("two.json");
    ok(&steinitz(&["gen", "--kind", "two-dir", "--d", "3", "--n", "5", "--out", s(&inst)]));
    let v = json_out(&steinitz(&["reduce", "--input", s(&inst), "--eps", "0.5"]));
    let run = &v["runs"][0];
    assert_eq!(run["pass"], true);
    assert!(run["cert"]["prefix_max"].as_f64().unwrap() <= run["cert"]["bound"].as_f64().unwrap());
}

#[test]
fn antipodal_pair_has_no_groups() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "pair.json", r#"{"dim":2,"gauge":{"p":2},"vectors":[[1.0,0.0],[-1.0,0.0]]}"#);
    let v = json_out(&steinitz(&["reduce", "--input", s(&f), "--eps", "0.25"]));
    assert_eq!(v["runs"][0]["groups"], 0);
    assert_eq!(v["runs"][0]["pass"], true);
}

#[test]
fn eps_out_of_range_exits_one() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "pair.json", r#"{"dim":2,"gauge":{"p":2},"vectors":[[1.0,0.0],[-1.0,0.0]]}"#);
    assert_eq!(code(&steinitz(&["reduce", "--input", s(&f), "--eps", "1.5"])), 1);
}

#[test]
fn non_zero_sum_reduce_exits_one() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "lop.json", r#"{"dim":2,"gauge":{"p":2},"vectors":[[1.0,0.0],[0.5,0.0]]}"#);
    assert_eq!(code(&steinitz(&["reduce", "--input", s(&f), "--eps", "0.5"])), 1);
}

#[test]
fn capmeas_verdicts() {
    let v = json_out(&steinitz(&["capmeas", "--d", "10", "--checks"]));
    assert_eq!(v[0]["holds"], true);
    assert_eq!(v[0]["chain"]["holds"], true);

    let v = json_out(&steinitz(&["capmeas", "--d", "2..9"]));
    let lines = v.as_array().unwrap();
    assert_eq!(lines.len(), 8);
    for l in lines {
        assert!(l["sigma"].as_f64().unwrap() >= 0.05, "{l}");
        assert_eq!(l["small_d"]["sigma_at_least_005"], true);
    }

    assert_eq!(code(&steinitz(&["capmeas", "--d", "1"])), 1);
}

#[test]
fn gen_simplex_has_d_plus_one_vectors() {
    let v = json_out(&steinitz(&["gen", "--kind", "simplex", "--d", "3"]));
    assert_eq!(v["vectors"].as_array().unwrap().len(), 4);
    assert_eq!(v["meta"]["generator"], "simplex");
}

#[test]
fn bench_emits_one_row_per_cell() {
    let o = steinitz(&["bench", "--d", "3", "--n", "20", "--eps", "0.25,0.5", "--seeds", "3", "--jobs", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["d", "n", "eps", "t", "algo", "achieved", "bound", "C_W", "inv_t", "inv_sigma_t", "pass", "ms"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| &r[10] == "true"));
}

#[test]
fn verify_rejects_wrong_length() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("simplex.json");
    ok(&steinitz(&["gen", "--kind", "simplex", "--d", "3", "--out", s(&inst)]));
    let ord = write(&dir, "ord.json", r#"{"perm":[0,1],"drift":false}"#);
    assert_eq!(code(&steinitz(&["verify", "--input", s(&inst), "--ordering", s(&ord)])), 1);
}

#[test]
fn gen_order_verify_round_trip() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("rand.json");
    let report = dir.path().join("order.json");
    ok(&steinitz(&["--seed", "7", "gen", "--kind", "random", "--d", "4", "--n", "40", "--out", s(&inst)]));
    for algo in ["gs", "drift", "greedy"] {
        ok(&steinitz(&["order", "--input", s(&inst), "--algo", algo, "--out", s(&report)]));
        let ordered: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
        let checked = json_out(&steinitz(&["verify", "--input", s(&inst), "--ordering", s(&report)]));
        assert_eq!(ordered["runs"][0]["achieved"], checked["runs"][0]["achieved"], "{algo}");
        assert_eq!(ordered["runs"][0]["prefix"], checked["runs"][0]["prefix"], "{algo}");
    }
}

#[test]
fn order_csv_lists_prefixes() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("simplex.json");
    ok(&steinitz(&["gen", "--kind", "simplex", "--d", "3", "--out", s(&inst)]));
    let o = steinitz(&["--format", "csv", "order", "--input", s(&inst)]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,index,prefix_norm"));
    assert_eq!(lines.count(), 4);
}
