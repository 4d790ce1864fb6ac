//! End-to-end runs of the binary: prepare -> train -> evaluate, plus the
//! inspection and configuration error paths.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use brainnet::archive::WeightArchive;
use brainnet::Tensor;

fn brainnet_cmd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brainnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn prepare_toy(dir: &Path, extra: &[&str]) -> PathBuf {
    let out_dir = dir.join("data");
    let out_str = out_dir.to_str().unwrap().to_string();
    let mut args = vec!["prepare", "--toy", "--out", &out_str];
    args.extend_from_slice(extra);
    let out = brainnet_cmd(&args);
    assert!(out.status.success(), "prepare failed: {}", stderr(&out));
    out_dir.join("dataset.warc")
}

#[test]
fn prepare_toy_is_deterministic_and_balances_classes() {
    let dir = tempfile::tempdir().unwrap();
    let cache_a = prepare_toy(&dir.path().join("a"), &[]);
    let cache_b = prepare_toy(&dir.path().join("b"), &[]);
    assert_eq!(fs::read(&cache_a).unwrap(), fs::read(&cache_b).unwrap());

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(cache_a.with_extension("meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["histogram"], serde_json::json!([128, 128, 128, 128]));
    assert_eq!(meta["synthetic"], 192);
    assert_eq!(meta["class_names"][0], "MID");
    assert!(cache_a.parent().unwrap().join("config.json").exists());
}

#[test]
fn prepare_without_smote_keeps_the_imbalance() {
    let dir = tempfile::tempdir().unwrap();
    let cache = prepare_toy(dir.path(), &["--scenario", "no-smote"]);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(cache.with_extension("meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["histogram"], serde_json::json!([64, 32, 128, 96]));
    assert_eq!(meta["synthetic"], 0);
}

#[test]
fn inspect_unknown_model_exits_two_and_lists_the_models() {
    let out = brainnet_cmd(&["inspect", "--model", "resnet50"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("ir-brainnet"), "{err}");
    assert!(err.contains("modified-demnet"), "{err}");
}

#[test]
fn inspect_json_reports_the_published_totals() {
    let out = brainnet_cmd(&["inspect", "--model", "ir-brainnet", "--json"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["total_params"], 1_801_464);
    assert_eq!(report["memory_bytes"], 7_205_856);

    let out = brainnet_cmd(&["inspect", "--model", "modified-demnet", "--json"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["total_params"], 1_821_192);
    assert_eq!(report["trainable_params"], 1_820_232);

    let out = brainnet_cmd(&["inspect", "--model", "ensemble"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("13.82 MiB"), "{}", stdout(&out));
}

#[test]
fn train_smoke_run_writes_checkpoint_history_and_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let cache = prepare_toy(dir.path(), &[]);
    let out_dir = dir.path().join("run");
    let out = brainnet_cmd(&[
        "train",
        "--model",
        "toy-ir",
        "--data-cache",
        cache.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--epochs",
        "1",
        "--limit",
        "32",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out_dir.join("toy-ir.ckpt").exists());
    let history = fs::read_to_string(out_dir.join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 2);
    assert!(history.starts_with("epoch,train_loss"));
    let config: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("config.json")).unwrap()).unwrap();
    assert_eq!(config["epochs"], 1);
}

#[test]
fn train_applies_smote_after_the_split_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let cache = prepare_toy(dir.path(), &["--smote-order", "after-split"]);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(cache.with_extension("meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["synthetic"], 0, "raw cache when oversampling is deferred");
    let out = brainnet_cmd(&[
        "train",
        "--model",
        "toy-ir",
        "--data-cache",
        cache.to_str().unwrap(),
        "--out",
        dir.path().join("run").to_str().unwrap(),
        "--epochs",
        "1",
        "--limit",
        "32",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("oversampled the training split"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn train_rejects_a_cache_whose_shape_does_not_match() {
    let dir = tempfile::tempdir().unwrap();
    let cache = prepare_toy(dir.path(), &[]);
    let out = brainnet_cmd(&[
        "train",
        "--model",
        "ir-brainnet",
        "--data-cache",
        cache.to_str().unwrap(),
        "--out",
        dir.path().join("run").to_str().unwrap(),
        "--epochs",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("expects"), "{}", stderr(&out));
}

fn write_ppm_classes(root: &Path) {
    for (c, class) in ["a", "b", "c", "d"].iter().enumerate() {
        let dir = root.join(class);
        fs::create_dir_all(&dir).unwrap();
        for i in 0..7 {
            let mut body = String::from("P3\n8 8\n255\n");
            for p in 0..64 {
                let v = (c * 47 + i * 13 + p * 3) % 256;
                body.push_str(&format!("{v} {v} {v}\n"));
            }
            fs::write(dir.join(format!("img{i}.ppm")), body).unwrap();
        }
    }
}

#[test]
fn vgg_import_logs_the_transferred_value_count() {
    let dir = tempfile::tempdir().unwrap();
    write_ppm_classes(&dir.path().join("raw"));
    let data_out = dir.path().join("data");
    let out = brainnet_cmd(&[
        "prepare",
        "--data",
        dir.path().join("raw").to_str().unwrap(),
        "--out",
        data_out.to_str().unwrap(),
        "--scenario",
        "no-smote",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let mut donor = WeightArchive::new();
    let w: Vec<f32> = (0..9 * 64 * 128).map(|i| (i % 61) as f32 * 0.01).collect();
    donor
        .insert("block2_conv1/w", Tensor::new(&[3, 3, 64, 128], w).unwrap())
        .unwrap();
    donor
        .insert("block2_conv1/b", Tensor::new(&[128], vec![0.05; 128]).unwrap())
        .unwrap();
    let donor_path = dir.path().join("vgg19.warc");
    donor.save(&donor_path).unwrap();

    let out = brainnet_cmd(&[
        "train",
        "--model",
        "ir-brainnet",
        "--data-cache",
        data_out.join("dataset.warc").to_str().unwrap(),
        "--out",
        dir.path().join("run").to_str().unwrap(),
        "--epochs",
        "0",
        "--import-vgg19",
        donor_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("73,856 values imported"),
        "{}",
        stdout(&out)
    );
    assert!(dir.path().join("run/ir-brainnet.ckpt").exists());
}

#[test]
fn evaluate_two_checkpoints_reports_members_ensemble_and_significance() {
    let dir = tempfile::tempdir().unwrap();
    let cache = prepare_toy(dir.path(), &[]);
    for model in ["toy-ir", "toy-demnet"] {
        let out = brainnet_cmd(&[
            "train",
            "--model",
            model,
            "--data-cache",
            cache.to_str().unwrap(),
            "--out",
            dir.path().join(model).to_str().unwrap(),
            "--epochs",
            "2",
            "--limit",
            "64",
            "--learning-rate",
            "1e-3",
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let eval_dir = dir.path().join("eval");
    let out = brainnet_cmd(&[
        "evaluate",
        "--data-cache",
        cache.to_str().unwrap(),
        "--checkpoint",
        dir.path().join("toy-ir/toy-ir.ckpt").to_str().unwrap(),
        "--checkpoint",
        dir.path().join("toy-demnet/toy-demnet.ckpt").to_str().unwrap(),
        "--out",
        eval_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    for row in ["toy-ir", "toy-demnet", "ensemble"] {
        assert!(text.contains(&format!("{row} ")) || text.contains(&format!("{row}\t")) || text.contains(row), "{text}");
        assert!(eval_dir.join(format!("{row}.report.json")).exists());
        assert!(eval_dir.join(format!("{row}.metrics.csv")).exists());
        assert!(eval_dir.join(format!("{row}.roc.csv")).exists());
    }
    assert!(text.contains("wilcoxon"), "{text}");
    let comparison: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(eval_dir.join("comparison.json")).unwrap())
            .unwrap();
    let p = comparison["p_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(eval_dir.join("ensemble.report.json")).unwrap())
            .unwrap();
    assert!(report["roc"]["auc"].is_number());
    assert_eq!(report["cost"]["flops_convention"], "macs-x2");
}

#[test]
fn unknown_config_keys_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"seeds": 7}"#).unwrap();
    let out = brainnet_cmd(&[
        "prepare",
        "--toy",
        "--out",
        dir.path().join("data").to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("seeds"), "{}", stderr(&out));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"epochs": 7, "seed": 5}"#).unwrap();
    let cache = prepare_toy(dir.path(), &["--config", cfg.to_str().unwrap(), "--seed", "42"]);
    let config: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(cache.parent().unwrap().join("config.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(config["seed"], 42, "flag beats file");
    assert_eq!(config["epochs"], 7, "file beats default");
}
