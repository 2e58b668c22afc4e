use std::path::Path;
use std::process::{Command, Output};

fn qtag(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtag"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn keygen_embed_attack_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(qtag(d, &["keygen", "--seed", "1", "-o", "key.json"])
        .status
        .success());
    assert!(qtag(d, &["keygen", "--seed", "2", "-o", "other.json"])
        .status
        .success());
    assert!(qtag(
        d,
        &[
            "embed",
            "--key",
            "key.json",
            "--circuit",
            "c.qasm",
            "--latent",
            "z.qtl"
        ]
    )
    .status
    .success());

    let out = qtag(d, &["verify", "--circuit", "c.qasm", "--key", "key.json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["detected"], true);
    assert_eq!(
        qtag(d, &["verify", "--circuit", "z.qtl", "--key", "key.json"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        qtag(d, &["verify", "--circuit", "c.qasm", "--key", "other.json"])
            .status
            .code(),
        Some(1)
    );

    let attack = [
        "attack",
        "--circuit",
        "c.qasm",
        "--kind",
        "delete-columns",
        "--count",
        "2",
        "--window",
        "0.25",
        "-o",
        "a.qasm",
    ];
    assert!(qtag(d, &attack).status.success());
    assert_eq!(
        qtag(
            d,
            &[
                "verify",
                "--circuit",
                "a.qasm",
                "--key",
                "key.json",
                "--srm-w-max",
                "0"
            ]
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        qtag(d, &["verify", "--circuit", "a.qasm", "--key", "key.json"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn bench_calibrate_plot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("cfg.json"),
        r#"{"trials": 20, "attacks": [{"kind": "append", "count": 2, "seed": 0}]}"#,
    )
    .unwrap();
    assert!(qtag(
        d,
        &["bench", "robustness", "--config", "cfg.json", "-o", "r.csv"]
    )
    .status
    .success());
    let csv = std::fs::read_to_string(d.join("r.csv")).unwrap();
    assert!(csv.starts_with("# reference backend: zero"));
    assert_eq!(csv.lines().count(), 3);
    assert!(d.join("r.timing.csv").exists());
    assert!(qtag(d, &["plot", "--input", "r.csv", "-o", "r.svg"])
        .status
        .success());

    let out = qtag(d, &["calibrate", "--mu0", "9", "--sigma0", "2.43"]);
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((summary["th"].as_f64().unwrap() - 16.51).abs() < 0.05);
    assert!(qtag(
        d,
        &[
            "calibrate",
            "--samples-w",
            "100",
            "--samples-u",
            "100",
            "-o",
            "h.csv"
        ]
    )
    .status
    .success());
    assert!(qtag(d, &["plot", "--input", "h.csv", "-o", "h.svg"])
        .status
        .success());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(qtag(d, &["verify", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        qtag(d, &["bench", "robustness", "--trials", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qtag(
            d,
            &[
                "verify",
                "--circuit",
                "missing.qasm",
                "--key",
                "missing.json"
            ]
        )
        .status
        .code(),
        Some(3)
    );
    assert_eq!(qtag(d, &["--help"]).status.code(), Some(0));
}
