use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

const PATH3: &str = r#"{"graph":{"n":3,"edges":[[0,1,"1"],[1,2,"2"]]},"set_function":{"n":3,"kind":"generator"},"q":1,"p":1}"#;
const INF_EDGE: &str =
    r#"{"graph":{"n":2,"edges":[[0,1,"inf"]]},"set_function":{"n":2,"kind":"generator"},"q":1,"p":1}"#;
const GCUT: &str = r#"{"domain_size":2,"relations":{"cut":{"arity":2,"values":["0","1","1","0"]}}}"#;
const CUT_INSTANCE: &str = r#"{"domain_size":2,"variables":["a","b","c"],
  "relations":{"cut":{"arity":2,"values":["0","1","1","0"]}},
  "constraints":[{"weight":"1","relation":"cut","scope":[0,1]},{"weight":"2","relation":"cut","scope":[1,2]}],
  "mode":{"kind":"plain"}}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_supercut"));
    c.env_remove("SUPERCUT_BUDGET");
    c
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(cmd: &mut Command) -> (i32, Value, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    let out = String::from_utf8(stdout).unwrap();
    let v = serde_json::from_str(out.trim()).unwrap_or(Value::Null);
    (status.code().unwrap(), v, String::from_utf8(stderr).unwrap())
}

#[test]
fn bgmc_enumerate_path() {
    let d = TempDir::new().unwrap();
    let p = write(d.path(), "path3.json", PATH3);
    let (code, v, _) = run(bin().args(["bgmc", "enumerate", "--alpha", "1"]).arg(&p));
    assert_eq!(code, 0);
    assert_eq!(v, json!({"lambda": "1", "solutions": [[0], [1, 2]]}));
    let (code, v, _) = run(bin().args(["bgmc", "enumerate", "--alpha", "1", "--check"]).arg(&p));
    assert_eq!(code, 0);
    assert_eq!(v["check"], "agree");
    let (code, oracle, _) = run(bin().args(["bgmc", "enumerate", "--alpha", "1", "--oracle"]).arg(&p));
    assert_eq!(code, 0);
    assert_eq!(oracle["solutions"], json!([[0], [1, 2]]));
}

#[test]
fn bgmc_classify_infinite_edge() {
    let d = TempDir::new().unwrap();
    let p = write(d.path(), "inf-edge.json", INF_EDGE);
    let (code, v, _) = run(bin().args(["bgmc", "classify"]).arg(&p));
    assert_eq!((code, v), (0, json!({"class": "infinite"})));
}

#[test]
fn enumerate_needs_finite_positive_optimum() {
    let d = TempDir::new().unwrap();
    let p = write(d.path(), "inf-edge.json", INF_EDGE);
    let (code, _, _) = run(bin().args(["bgmc", "enumerate", "--alpha", "1"]).arg(&p));
    assert_eq!(code, 3);
}

#[test]
fn classify_language_cut() {
    let d = TempDir::new().unwrap();
    let p = write(d.path(), "gcut.json", GCUT);
    let (code, v, _) = run(bin().args(["vcsp", "classify-language"]).arg(&p));
    assert_eq!(code, 0);
    assert_eq!(v["EDS"], json!({"alpha": "1"}));
    assert_eq!(v["SDS"]["alpha"], "inf");
    assert_eq!(v["verdict"], json!({"verdict": "globally_tractable", "reason": "EDS"}));
}

#[test]
fn solve_matches_brute() {
    let d = TempDir::new().unwrap();
    let p = write(d.path(), "inst.json", CUT_INSTANCE);
    let flags = ["--mode", "lower-bounded", "--bounds", "1,1", "--enumerate"];
    let (code, solved, _) = run(bin().args(["vcsp", "solve"]).args(flags).arg(&p));
    assert_eq!(code, 0);
    let (code, brute, _) = run(bin().args(["vcsp", "brute"]).args(flags).arg(&p));
    assert_eq!(code, 0);
    assert_eq!(solved["value"], "1");
    for key in ["status", "value", "assignment", "enumeration"] {
        assert_eq!(solved[key], brute[key], "{key}");
    }
}

#[test]
fn fix_of_boolean_language_has_one_label() {
    let d = TempDir::new().unwrap();
    let p = write(d.path(), "gcut.json", GCUT);
    let (code, v, _) = run(bin().args(["vcsp", "fix"]).arg(&p));
    assert_eq!(code, 0);
    assert_eq!(v["domain_size"], 1);
    assert_eq!(v["provenance"]["cut@{0}"]["source"], "cut");
}

#[test]
fn exit_codes() {
    let d = TempDir::new().unwrap();
    let inst = write(d.path(), "inst.json", CUT_INSTANCE);
    let bad = write(d.path(), "bad.json", "{not json");
    assert_eq!(run(bin().args(["vcsp", "brute"]).arg(&bad)).0, 2);
    assert_eq!(run(bin().args(["vcsp", "solve", "--bounds", "1,1"]).arg(&inst)).0, 2);
    assert_eq!(run(bin().args(["bgmc", "enumerate", "--alpha", "1/2"]).arg(&inst)).0, 2);
    assert_eq!(run(bin().args(["vcsp", "solve", "--mode", "lower-bounded", "--bounds", "1"]).arg(&inst)).0, 2);
    assert_eq!(run(bin().args(["vcsp", "brute"]).arg(&inst).env("SUPERCUT_BUDGET", "2")).0, 4);
    assert_eq!(run(bin().args(["vcsp", "brute"]).arg(&inst).env("SUPERCUT_BUDGET", "x")).0, 2);
    assert_eq!(run(bin().args(["--budget", "100", "vcsp", "brute"]).arg(&inst).env("SUPERCUT_BUDGET", "2")).0, 0);
    assert_eq!(run(bin().args(["gen", "bgmc"])).0, 2);
}

#[test]
fn gadget_over_fixed_language() {
    let d = TempDir::new().unwrap();
    let gamma = run(bin().args(["gen", "language", "--seed", "3", "--class", "sim-not-sds", "--size", "1"])).1;
    let gpath = write(d.path(), "gamma.json", &gamma.to_string());
    let fixed = run(bin().args(["vcsp", "fix"]).arg(&gpath)).1;
    let fpath = write(d.path(), "fix.json", &fixed.to_string());
    let inst = run(bin().args(["gen", "instance", "--seed", "5", "--n", "3", "--m", "3", "--mode", "surjective", "--language"]).arg(&fpath)).1;
    let ipath = write(d.path(), "inst.json", &inst.to_string());
    let side = d.path().join("side.json");
    let (code, out, err) = run(bin().args(["vcsp", "gadget", "--gamma"]).arg(&gpath).arg("--sidecar").arg(&side).arg(&ipath));
    assert_eq!(code, 0, "{err}");
    assert_eq!(out["mode"]["kind"], "surjective");
    assert_eq!(out["variables"].as_array().unwrap().len(), 4);
    let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(side).unwrap()).unwrap();
    assert!(sidecar["case"] == 1 || sidecar["case"] == 2);
    for key in ["witness", "epsilon", "omega", "nu"] {
        assert!(!sidecar[key].is_null(), "{key}");
    }
}

#[test]
fn batches_are_sorted_and_deterministic() {
    let d = TempDir::new().unwrap();
    let corpus = d.path().join("corpus");
    let (code, _, _) = run(bin().args(["gen", "bgmc", "--seed", "9", "--n", "6", "--count", "12", "-o"]).arg(&corpus));
    assert_eq!(code, 0);
    let lines = |jobs: &str| {
        let out = bin().args(["--jobs", jobs, "bgmc", "classify"]).arg(&corpus).output().unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let serial = lines("1");
    assert_eq!(serial, lines("4"));
    let files: Vec<String> = serial
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["file"].as_str().unwrap().to_string())
        .collect();
    let mut sorted = files.clone();
    sorted.sort();
    assert_eq!(files.len(), 12);
    assert_eq!(files, sorted);
}

#[test]
fn gen_is_seeded() {
    let a = bin().args(["gen", "bgmc", "--seed", "42"]).output().unwrap().stdout;
    let b = bin().args(["gen", "bgmc", "--seed", "42"]).output().unwrap().stdout;
    let c = bin().args(["gen", "bgmc", "--seed", "43"]).output().unwrap().stdout;
    assert_eq!(a, b);
    assert_ne!(a, c);
}
