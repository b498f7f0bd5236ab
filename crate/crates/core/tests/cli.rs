use std::path::Path;
use std::process::{Command, Output};

fn deformnet(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deformnet")).args(args).arg("--out").arg(out).output().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn unknown_keys_fail_with_a_list() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "data.family = star\ndata.bogus = 1\nzzz = 2\n").unwrap();
    let o = deformnet(&["generate", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("data.bogus") && err.contains("zzz"), "{err}");
}

#[test]
fn derived_seeds_cannot_be_set() {
    let dir = tempfile::tempdir().unwrap();
    let o = deformnet(&["generate", "--set", "data.seed=4"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn encode_prints_both_encodings() {
    let dir = tempfile::tempdir().unwrap();
    let o = deformnet(&["encode", "--set", "data.level=8", "--set", "encode.domain=ellipse:2,1", "--set", "encode.function=one"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["domain"].as_array().unwrap().len(), 8);
    let f = v["function"].as_array().unwrap();
    assert_eq!(f.len(), 40);
    assert!(f.iter().all(|x| (x.as_f64().unwrap() - 1.0).abs() < 1e-12));
}

#[test]
fn generate_train_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (g, t, e) = (dir.path().join("g"), dir.path().join("t"), dir.path().join("e"));
    let o = deformnet(&["generate", "--seed", "3", "--set", "data.n_samples=10", "--set", "data.level=8", "--threads", "1"], &g);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = json(&g.join("manifest.json"));
    let files = manifest["files"].as_array().unwrap();
    let digest = deformnet::cli::sha256_file(&g.join("dataset.bin")).unwrap();
    assert_eq!(files[0]["sha256"], digest.as_str());

    let data = g.join("dataset.bin");
    let d = format!("paths.dataset={}", data.display());
    let o = deformnet(
        &["train", "--set", &d, "--set", "split.n_train=8", "--set", "model.p=6", "--set", "model.domain_hidden=6", "--set", "model.trunk_hidden=6", "--set", "train.iterations=20", "--set", "train.framework=d2d"],
        &t,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&t.join("history.json"))["losses"].as_array().unwrap().len(), 20);
    let resolved = std::fs::read_to_string(t.join("config.resolved")).unwrap();
    assert!(resolved.contains("train.framework = d2d") && !resolved.contains("train.seed"), "{resolved}");

    let m = format!("paths.model={}", t.join("model.bin").display());
    let o = deformnet(&["eval", "--set", &d, "--set", &m, "--set", "split.n_train=8"], &e);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let metrics = json(&e.join("metrics.json"));
    assert_eq!(metrics["n_samples"], 2);
    assert!(metrics["mean"].as_f64().unwrap().is_finite());
}

#[test]
fn him_with_exact_oracle_writes_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let o = deformnet(
        &["him", "--set", "him.corrector=exact_oracle", "--set", "him.mesh_h=0.08", "--set", "him.solver.period=20", "--set", "data.family=star"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&dir.path().join("comparison.json"));
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["sweeps"], 20);
    assert!(rows[1]["speedup_iterations"].as_f64().unwrap() > 1.0);
    let csv = std::fs::read_to_string(dir.path().join("gs.csv")).unwrap();
    assert!(csv.starts_with("iteration,residual,event\n"));
    assert!(dir.path().join("him_exact_oracle.csv").exists());
}

#[test]
fn verify_passes_on_a_small_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = deformnet(&["verify", "--set", "verify.n_domains=5", "--set", "verify.triples=20", "--set", "verify.quadrature_nodes=512"], dir.path());
    assert!(o.status.success(), "{}\n{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("verify.json"));
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}
