use std::path::Path;
use std::process::{Command, Output};

fn xyf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xyf")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &[&str] = &["--geometry", "rectangle", "--l1", "3", "--l2", "3", "--rounds", "2"];

fn memory(dir: &Path, name: &str, extra: &[&str]) -> (String, String) {
    let out = dir.join(format!("{name}.csv"));
    let mut args = vec!["memory"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(&["--p-gate", "0.01", "--p-meas", "0.01", "--shots", "3000", "--no-timing"]);
    args.extend_from_slice(&["--out", out.to_str().unwrap()]);
    args.extend_from_slice(extra);
    let o = xyf(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    (std::fs::read_to_string(&out).unwrap(), std::fs::read_to_string(out.with_extension("json")).unwrap())
}

#[test]
fn same_seed_gives_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = memory(dir.path(), "a", &["--seed", "17"]);
    let b = memory(dir.path(), "b", &["--seed", "17"]);
    assert_eq!(a, b);
    let w = memory(dir.path(), "w", &["--seed", "17", "--workers", "2"]);
    assert_eq!(a.0.lines().last(), w.0.lines().last());
    let c = memory(dir.path(), "c", &["--seed", "18"]);
    assert_ne!(a.0, c.0);
}

#[test]
fn csv_layout_and_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, json) = memory(dir.path(), "m", &["--seed", "3"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# xyf "));
    assert!(lines[1].starts_with("# config {") && lines[1].contains("\"seed\":3"));
    assert_eq!(
        lines[2],
        "geometry,L1,L2,rounds,p_gate,p_idle,p_meas,p_prep,shots,fails_Z,fails_X,ci_low,ci_high,seed,wall_seconds"
    );
    let row: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(row.len(), 15);
    assert_eq!(&row[..4], &["rectangle", "3", "3", "2"]);
    assert_eq!(row[8], "3000");
    let meta: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(meta["command"], "memory");
    assert_eq!(meta["config"]["shots"], 3000);
    assert_eq!(meta["stats"]["fails_z"].as_u64().unwrap().to_string(), row[9]);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"geometry":{"kind":"torus","l1":4,"l2":2,"rounds":2},"noise":{"p_meas":0.02},"shots":50,"seed":4}"#,
    )
    .unwrap();
    let o = xyf(&["memory", "--config", cfg.to_str().unwrap(), "--shots", "70", "--l2", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert_eq!(&row[..4], &["torus", "4", "4", "2"]);
    assert_eq!((row[6], row[8], row[13]), ("0.02", "70", "4"));
}

#[test]
fn noiseless_runs_never_fail() {
    let o = xyf(&["memory", "--geometry", "torus", "--l1", "4", "--l2", "4", "--rounds", "3", "--shots", "500", "--seed", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert_eq!((row[9], row[10]), ("0", "0"));

    let o = xyf(&["surgery", "--geometry", "surgery", "--l", "2", "--t0", "1", "--t1", "2", "--rounds", "3", "--shots", "400", "--seed", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.contains("# outcome classes Z-run M0=400 M1=0;"), "{csv}");
    let row: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert_eq!((row[9], row[10]), ("0", "0"));
}

#[test]
fn config_errors_name_the_field() {
    let o = xyf(&["memory", "--geometry", "torus", "--l1", "4", "--l2", "4", "--rounds", "2", "--shots", "5"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("seed"));
    let o = xyf(&["memory", "--geometry", "torus", "--l1", "4", "--l2", "4", "--rounds", "2", "--shots", "5", "--seed", "1", "--p-gate", "1.5"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("p_gate"));
    let o = xyf(&["memory", "--geometry", "torus", "--l1", "4", "--rounds", "2", "--shots", "5", "--seed", "1"]);
    assert!(stderr(&o).contains("l2"));
    let o = xyf(&["surgery", "--geometry", "torus", "--l1", "4", "--l2", "4", "--rounds", "2", "--shots", "5", "--seed", "1"]);
    assert!(!o.status.success());
}

#[test]
fn export_round_trips() {
    let o = xyf(&["export", "circuit-text", "--geometry", "surgery", "--l", "2", "--t0", "1", "--t1", "2", "--rounds", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let c = xyf_core::circuit::parse_text(&text).unwrap();
    assert_eq!(xyf_core::circuit::emit_text(&c), text);

    let o = xyf(&["export", "detector-graph-json", "--basis", "x", "--geometry", "torus", "--l1", "4", "--l2", "2", "--rounds", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let g = xyf_core::syndrome::parse_graph_json(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert!(!g.nodes.is_empty());
}

#[test]
fn unknown_export_kind_is_a_usage_error() {
    let o = xyf(&["export", "stim", "--geometry", "torus", "--l1", "2", "--l2", "2", "--rounds", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("circuit-text"));
}

#[test]
fn selftest_passes() {
    let o = xyf(&["selftest"]);
    let out = String::from_utf8(o.stdout.clone()).unwrap();
    assert!(o.status.success(), "{out}{}", stderr(&o));
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS ")).count(), 5, "{out}");
}
