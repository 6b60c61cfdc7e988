use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ergolab::systems::CatalogEntry;
use serde_json::Value;

fn ergolab(dir: &Path, args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ergolab"));
    cmd.current_dir(dir).args(args);
    match threads {
        Some(t) => cmd.env("ERGOLAB_THREADS", t),
        None => cmd.env_remove("ERGOLAB_THREADS"),
    };
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

fn keys_sorted(v: &Value) -> bool {
    match v {
        Value::Object(m) => {
            let keys: Vec<&String> = m.keys().collect();
            keys.windows(2).all(|w| w[0] < w[1]) && m.values().all(keys_sorted)
        }
        Value::Array(a) => a.iter().all(keys_sorted),
        _ => true,
    }
}

fn object_keys_in_text_order(text: &str) -> bool {
    let v: Value = serde_json::from_str(text).unwrap();
    serde_json::to_string_pretty(&v).unwrap() + "\n" == text && keys_sorted(&v)
}

#[test]
fn run_writes_report_and_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"system":"rotation","task":"all","n":500,"stat_samples":2000}"#);
    let out = ergolab(tmp.path(), &["run", &cfg, "--out", "res"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let res = tmp.path().join("res");
    let report = fs::read_to_string(res.join("report.json")).unwrap();
    assert!(object_keys_in_text_order(&report));
    let csvs: Vec<_> = fs::read_dir(&res)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    assert!(csvs.len() >= 4);
    for p in csvs {
        let text = fs::read_to_string(&p).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("n,value"), "{}", p.display());
        for l in lines {
            let (n, v) = l.split_once(',').unwrap();
            n.parse::<usize>().unwrap();
            v.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn output_is_independent_of_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"system":"tent","task":"all","n":400,"stat_samples":5000,"seed":7}"#);
    let mut dirs = Vec::new();
    for t in ["1", "4"] {
        let name = format!("out{t}");
        assert_eq!(ergolab(tmp.path(), &["run", &cfg, "--out", &name], Some(t)).status.code(), Some(0));
        dirs.push(tmp.path().join(name));
    }
    let strip = |d: &Path| {
        let mut v: Value = serde_json::from_str(&fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_time");
        v
    };
    assert_eq!(strip(&dirs[0]), strip(&dirs[1]));
    for e in fs::read_dir(&dirs[0]).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|e| e == "csv") {
            let other = dirs[1].join(p.file_name().unwrap());
            assert_eq!(fs::read(&p).unwrap(), fs::read(other).unwrap());
        }
    }
}

#[test]
fn config_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    for (i, json) in [
        r#"{"system":"tent"}"#,
        r#"{"system":"nope","task":"orbit"}"#,
        r#"{"system":"tent","task":"orbit","n":-3}"#,
        r#"{"system":"tent","task":"orbit","bogus":1}"#,
        "not json",
    ]
    .iter()
    .enumerate()
    {
        let cfg = write_config(tmp.path(), &format!("bad{i}.json"), json);
        let out = ergolab(tmp.path(), &["run", &cfg], None);
        assert_eq!(out.status.code(), Some(1), "{json}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
    let missing = ergolab(tmp.path(), &["run", "absent.json"], None);
    assert_eq!(missing.status.code(), Some(1));
    let cfg = write_config(tmp.path(), "ok.json", r#"{"system":"tent","task":"orbit","n":3}"#);
    assert_eq!(ergolab(tmp.path(), &["run", &cfg], Some("zero")).status.code(), Some(1));
}

#[test]
fn failed_check_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"system":"north_south","task":"lyapunov","n":20,"tol":1e-12}"#);
    let out = ergolab(tmp.path(), &["run", &cfg, "--check"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    let lenient = ergolab(tmp.path(), &["run", &cfg], None);
    assert_eq!(lenient.status.code(), Some(0));
}

#[test]
fn list_systems_is_sorted_catalog() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ergolab(tmp.path(), &["list-systems"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(object_keys_in_text_order(&text));
    let entries: Vec<CatalogEntry> = serde_json::from_str(&text).unwrap();
    let names: Vec<&str> = entries.iter().map(|e| e.name.as_str()).collect();
    for n in ["cat_map", "horseshoe", "tent", "rotation", "north_south", "disc_b", "solenoid"] {
        assert!(names.contains(&n), "{n}");
    }
}

#[test]
fn demo_runs_with_checks() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ergolab(tmp.path(), &["demo", "cat_map"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("ergolab-demo-cat_map/report.json")).unwrap()).unwrap();
    assert_eq!(report["checks_passed"], Value::Bool(true));
    assert_eq!(ergolab(tmp.path(), &["demo", "nonexistent"], None).status.code(), Some(1));
}

#[test]
fn orbit_with_zero_steps_is_the_start() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"system":"rotation","task":"orbit","n":0,"x0":[0.25]}"#);
    assert_eq!(ergolab(tmp.path(), &["run", &cfg, "--out", "o"], None).status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("o/orbit_x0.csv")).unwrap();
    assert_eq!(csv, "n,value\n0,0.25\n");
}
