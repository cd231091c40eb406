use std::path::Path;
use std::process::{Command, Output};

fn esn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esn-logic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = esn(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
    "network": {"N": 30},
    "task": {"kind": "nand", "k": 2, "length": 200},
    "trials": 3,
    "master_seed": 4,
    "grid": [{"axis": "lambda", "values": [0.1, 0.5]}],
    "recovery": {"m_values": [0, 3], "repeats": 2, "t_fail": 150, "test_length": 200}
}"#;

#[test]
fn train_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", SMALL);
    let net = dir.path().join("net.json");
    ok(&["train", "--config", &cfg, "--seed", "9", "--out", net.to_str().unwrap()]);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&net).unwrap()).unwrap();
    assert_eq!(doc["config"]["N"], 30);
    assert_eq!(doc["w_in"].as_array().unwrap().len(), 2);
    assert_eq!(doc["readouts"][0]["w_out"][0].as_array().unwrap().len(), 31);

    let report = ok(&["eval", "--network", net.to_str().unwrap(), "--task", "nand", "--length", "300", "--seed", "1"]);
    assert!(report.starts_with("readout 0: accuracy "), "{report}");
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", SMALL);
    let text = ok(&["sweep", "--config", &cfg]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("task,k,N,weight_pattern,transfer,v,lambda"));
    assert!(lines[1].starts_with("nand,2,30,normal,sat_linear,1,0.1,"));
    assert!(lines[2].contains(",0.5,"));
}

#[test]
fn sweep_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", SMALL);
    let a = esn(&["sweep", "--config", &cfg, "--master-seed", "12"]).stdout;
    let b = esn(&["sweep", "--config", &cfg, "--master-seed", "12"]).stdout;
    assert_eq!(a, b);
    let c = esn(&["sweep", "--config", &cfg, "--master-seed", "13"]).stdout;
    assert_eq!(a.iter().filter(|&&ch| ch == b'\n').count(), 3);
    assert_ne!(a, c);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", SMALL);
    let text = ok(&["sweep", "--config", &cfg, "--nodes", "20", "--task", "xor", "--trials", "2", "--master-seed", "8"]);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[0], row[2], row[14], row[19]), ("xor", "20", "2", "8"));
}

#[test]
fn fault_sim_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", SMALL);
    let out = dir.path().join("faults.csv");
    ok(&["fault-sim", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "m,repeat,detected,detect_latency_steps,post_retrain_accuracy,post_retrain_perfect"
    );
    assert_eq!(lines.count(), 4);
}

#[test]
fn errors_exit_nonzero() {
    let out = esn(&["sweep"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid"));

    let out = esn(&["eval", "--network", "/nonexistent.json", "--task", "nand"]);
    assert!(!out.status.success());

    let out = esn(&["train", "--task", "bogus"]);
    assert!(!out.status.success());
}
