use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(config: &str, out: &Path, extra: &[&str]) -> Output {
    let cfg = out.join("config.json");
    fs::write(&cfg, config).unwrap();
    let out_dir = out.join("out");
    fs::create_dir_all(&out_dir).unwrap();
    Command::new(env!("CARGO_BIN_EXE_mtdisc"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .args(extra)
        .output()
        .unwrap()
}

fn written(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir.join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn appendix_table_is_written_and_decreasing() {
    let dir = TempDir::new().unwrap();
    let out = run(
        r#"{"experiment": "appendix", "k_list": [2, 4, 8, 10, 20]}"#,
        dir.path(),
        &[],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(written(dir.path()), ["appendix.csv", "appendix.json"]);
    let csv = fs::read_to_string(dir.path().join("out/appendix.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,energy_bound,l2_lower,quotient"));
    let q: Vec<f64> = lines
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(q.len(), 5);
    assert!(q.windows(2).all(|w| w[1] < w[0]), "{q:?}");
    assert!(q[3] <= 0.445);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/appendix.json")).unwrap())
            .unwrap();
    assert_eq!(json["contract_holds"], serde_json::Value::Bool(true));
}

#[test]
fn unknown_experiment_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let out = run(r#"{"experiment": "warp-drive"}"#, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(written(dir.path()).is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown experiment"));
}

#[test]
fn validate_reports_named_fields() {
    let dir = TempDir::new().unwrap();
    let ok = run(
        r#"{"experiment": "appendix", "k_list": [2]}"#,
        dir.path(),
        &["--validate"],
    );
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout).trim(), "ok");

    let missing = run(
        r#"{"experiment": "sobolev-asymptotics"}"#,
        dir.path(),
        &["--validate"],
    );
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stdout).contains("p_list"));

    let typed = run(
        r#"{"experiment": "appendix", "k_list": "two"}"#,
        dir.path(),
        &[],
    );
    assert_eq!(typed.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&typed.stderr).contains("k_list"));
    assert!(written(dir.path()).is_empty());

    let extra = run(
        r#"{"experiment": "appendix", "k_list": [2], "colour": 1}"#,
        dir.path(),
        &["--validate"],
    );
    assert!(String::from_utf8_lossy(&extra.stdout).contains("colour"));
}

#[test]
fn contract_violation_exits_one() {
    let dir = TempDir::new().unwrap();
    // R below the inradius of the identity image.
    let out = run(
        r#"{"experiment": "koebe", "maps": [{"map": "identity", "r": 0.5}], "samples": 32}"#,
        dir.path(),
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/koebe.json")).unwrap())
            .unwrap();
    assert_eq!(json["contract_holds"], serde_json::Value::Bool(false));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let config =
        r#"{"experiment": "solve-liouville", "alpha": 1.0, "nodes": 257, "random_starts": 3}"#;
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        let out = run(config, d.path(), &["--seed", "11"]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for name in ["solve-liouville.csv", "solve-liouville.json"] {
        let x = fs::read(a.path().join("out").join(name)).unwrap();
        let y = fs::read(b.path().join("out").join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between seeded runs");
    }
}
