//! End-to-end CLI workflow: train, spectrum, circuits, symmetry, coupling,
//! export, driven through the binary exactly as a user would.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_circuitlab"))
}

fn workdir(name: &str) -> PathBuf {
    let d = std::env::temp_dir()
        .join("circuitlab_cli_workflow")
        .join(name);
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

const CONFIG: &str = r#"{
  "widths": [2, 8, 8, 1],
  "seed": 7,
  "learning_rate": 0.05,
  "batch_size": 25,
  "epochs": 60,
  "dataset": { "kind": "blobs", "separation": 6.0, "size": 100, "input_dim": 2, "seed": 3 },
  "diagnostics": {}
}"#;

#[test]
fn train_then_inspect_and_export() {
    let dir = workdir("full");
    let cfg_path = dir.join("config.json");
    fs::write(&cfg_path, CONFIG).unwrap();
    let run_dir = dir.join("run");

    let out = bin()
        .args([
            "train",
            cfg_path.to_str().unwrap(),
            "--out",
            run_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "train failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(run_dir.join("manifest.json").exists());
    assert!(run_dir.join("log.csv").exists());
    let final_ck = run_dir.join("checkpoints/epoch_60.bin");
    assert!(final_ck.exists());

    // spectrum at epoch 0 and at the end: training a separable problem
    // concentrates the spectrum near zero.
    for epoch in ["0", "60"] {
        let ck = run_dir.join(format!("checkpoints/epoch_{epoch}.bin"));
        let out = bin()
            .args([
                "spectrum",
                ck.to_str().unwrap(),
                "--probes",
                "4",
                "--steps",
                "30",
            ])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "spectrum failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(run_dir.join(format!("spectra/epoch_{epoch}.csv")).exists());
    }
    let meta0: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run_dir.join("spectra/epoch_0.json")).unwrap())
            .unwrap();
    let meta_end: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run_dir.join("spectra/epoch_60.json")).unwrap())
            .unwrap();
    let m2_0 = meta0["second_moment"].as_f64().unwrap();
    let m2_end = meta_end["second_moment"].as_f64().unwrap();
    assert!(
        m2_end < m2_0,
        "final spectrum should be more concentrated: {m2_end} vs {m2_0}"
    );

    // circuit samples at the final checkpoint, all three orders
    for order in ["0", "1", "2"] {
        let out = bin()
            .args([
                "circuits",
                final_ck.to_str().unwrap(),
                "--order",
                order,
                "--count",
                "500",
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let circuits_csv = fs::read_to_string(run_dir.join("circuits/epoch_60.csv")).unwrap();
    assert!(circuits_csv.starts_with("order,removed_layers,i_0,i_1,i_2,i_3,value"));

    // symmetry and coupling reports
    let out = bin()
        .args(["symmetry", run_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(run_dir.join("reports/symmetry.json").exists());

    let out = bin()
        .args([
            "coupling",
            run_dir.to_str().unwrap(),
            "--entries",
            "20",
            "--resamples",
            "32",
            "--null-resamples",
            "40",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "coupling failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(run_dir.join("reports/coupling_epoch_60.json").exists());
    // dense correlation matrix: 20 rows of 20 comma-separated floats
    let cc = fs::read_to_string(run_dir.join("reports/coupling_cc_epoch_60.csv")).unwrap();
    let rows: Vec<&str> = cc.lines().collect();
    assert_eq!(rows.len(), 20);
    assert_eq!(rows[0].split(',').count(), 20);

    // exports in both formats
    for format in ["csv", "json"] {
        let out = bin()
            .args(["export", run_dir.to_str().unwrap(), "--format", format])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let metrics = fs::read_to_string(run_dir.join("export/metrics.csv")).unwrap();
    assert!(metrics.starts_with("epoch,metric,value\n"));
    assert!(metrics.contains("spectrum_symmetry_score"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run_dir.join("export/metrics.json")).unwrap())
            .unwrap();
    assert!(json.as_array().unwrap().len() > 10);
}

#[test]
fn train_rejects_malformed_config() {
    let dir = workdir("badcfg");
    let cfg_path = dir.join("config.json");
    fs::write(&cfg_path, "{ not json").unwrap();
    let out = bin()
        .args(["train", cfg_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
