use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use tower::ServiceExt;

use sopcheck_core::evaluation::{parse_grid_csv, parse_metrics_csv};
use sopcheck_core::features::FeatureResources;
use sopcheck_core::model::{EvaluationResponse, TrainedModel};
use sopcheck_core::synth::{synthetic_corpus, SynthOptions};
use sopcheck_service::server::{router, AppState};

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    /// A smaller synthetic corpus keeps each CLI run short.
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let data = synthetic_corpus(&SynthOptions {
            embedding_dimension: 20,
            ..Default::default()
        })
        .unwrap();
        std::fs::write(dir.path().join("corpus.jsonl"), data.corpus.to_jsonl()).unwrap();
        std::fs::write(dir.path().join("emb.txt"), data.embeddings.to_text()).unwrap();
        let essay = &data.corpus.documents()[0].text;
        std::fs::write(dir.path().join("essay.txt"), essay).unwrap();
        Workspace { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        self.run_env(args, &[])
    }

    fn run_env(&self, args: &[&str], env: &[(&str, &str)]) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_sopcheck"));
        cmd.current_dir(self.dir.path()).args(args).env("RUST_LOG", "warn");
        for var in ["SOPCHECK_SEED", "SOPCHECK_EMBEDDINGS", "SOPCHECK_FEATURES", "MODEL_PATH", "RESOURCE_DIR", "PORT"] {
            cmd.env_remove(var);
        }
        for (k, v) in env {
            cmd.env(k, v);
        }
        cmd.output().unwrap()
    }
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn train_then_predict_matches_http() {
    let ws = Workspace::new();
    let out = ok(&ws.run(&[
        "train", "--corpus", "corpus.jsonl", "--embeddings", "emb.txt", "--model", "svm", "--out", "m.json",
    ]));
    assert!(out.contains("model_id: "));
    let text = ok(&ws.run(&["predict", "--model", "m.json", "--essay", "essay.txt"]));
    assert!(text.starts_with("label: "));
    assert!(text.contains("feature,raw,standardized"));
    assert!(text.contains("SE:cosine_to_reference"));

    let json = ok(&ws.run(&["predict", "--model", "m.json", "--essay", "essay.txt", "--json"]));
    let cli: EvaluationResponse = serde_json::from_str(&json).unwrap();

    // Same essay through the HTTP route with the same model file.
    let model = TrainedModel::load(ws.path("m.json")).unwrap();
    let table = sopcheck_core::embedding::load_embeddings(ws.path("emb.txt"), None).unwrap();
    let state = AppState::ready(model, FeatureResources::with_table(Arc::new(table)));
    let essay = std::fs::read_to_string(ws.path("essay.txt")).unwrap();
    let rt = tokio::runtime::Runtime::new().unwrap();
    let http: EvaluationResponse = rt.block_on(async {
        let req = Request::post("/v1/evaluate")
            .header("content-type", "application/json")
            .body(Body::from(serde_json::json!({ "text": essay }).to_string()))
            .unwrap();
        let resp = router(state).oneshot(req).await.unwrap();
        serde_json::from_slice(&resp.into_body().collect().await.unwrap().to_bytes()).unwrap()
    });
    assert_eq!(cli.label, http.label);
    assert!((cli.decision_value - http.decision_value).abs() <= 1e-12);
    assert_eq!(cli.feature_breakdown, http.feature_breakdown);
}

#[test]
fn predict_reads_stdin() {
    let ws = Workspace::new();
    ok(&ws.run(&["train", "--corpus", "corpus.jsonl", "--embeddings", "emb.txt", "--out", "m.json"]));
    let mut child = Command::new(env!("CARGO_BIN_EXE_sopcheck"))
        .current_dir(ws.dir.path())
        .args(["predict", "--model", "m.json", "--essay", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    std::io::Write::write_all(child.stdin.as_mut().unwrap(), &read(&ws.path("essay.txt"))).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("label: "));
}

#[test]
fn cv_reports_are_byte_identical_on_rerun() {
    let ws = Workspace::new();
    let args = |out: &'static str| {
        vec![
            "cv", "--corpus", "corpus.jsonl", "--embeddings", "emb.txt", "--k", "10", "--seed", "7", "--models",
            "svm,rfdt", "--out", out,
        ]
    };
    ok(&ws.run(&args("a")));
    ok(&ws.run(&args("b")));
    for f in ["report.txt", "report.csv", "predictions.csv", "config.json", "seeds.txt"] {
        assert_eq!(read(&ws.path("a").join(f)), read(&ws.path("b").join(f)), "{f} differs");
    }
    let rows = parse_metrics_csv(&std::fs::read_to_string(ws.path("a/report.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(std::fs::read_to_string(ws.path("a/seeds.txt")).unwrap(), "seed 7\n");
}

#[test]
fn ablate_writes_seven_by_four_grid() {
    let ws = Workspace::new();
    let text = ok(&ws.run(&[
        "ablate", "--corpus", "corpus.jsonl", "--embeddings", "emb.txt", "--out", "grid", "--seed", "3",
    ]));
    assert!(text.contains("SE + WE"));
    let grid = parse_grid_csv(&std::fs::read_to_string(ws.path("grid/grid.csv")).unwrap()).unwrap();
    assert_eq!(grid.rows.len(), 7);
    assert!(grid.rows.iter().all(|r| r.2.len() == 4));
    assert_eq!(grid.columns, ["2-F", "5-F", "10-F", "50% Split"]);
}

#[test]
fn extract_writes_feature_matrix() {
    let ws = Workspace::new();
    ok(&ws.run(&[
        "extract", "--corpus", "corpus.jsonl", "--embeddings", "emb.txt", "--features", "SE", "--out", "m.csv",
    ]));
    let m = sopcheck_core::features::parse_matrix_csv(&std::fs::read_to_string(ws.path("m.csv")).unwrap()).unwrap();
    assert_eq!(m.rows.len(), 50);
    assert_eq!(m.names.len(), 3);
}

#[test]
fn flags_override_environment() {
    let ws = Workspace::new();
    let base = ["cv", "--corpus", "corpus.jsonl", "--features", "T", "--k", "2", "--models", "lr"];
    let env = [("SOPCHECK_SEED", "3"), ("SOPCHECK_EMBEDDINGS", "emb.txt")];
    let mut from_env = base.to_vec();
    from_env.extend(["--out", "env"]);
    ok(&ws.run_env(&from_env, &env));
    assert_eq!(std::fs::read_to_string(ws.path("env/seeds.txt")).unwrap(), "seed 3\n");
    let mut from_flag = base.to_vec();
    from_flag.extend(["--out", "flag", "--seed", "9"]);
    ok(&ws.run_env(&from_flag, &env));
    assert_eq!(std::fs::read_to_string(ws.path("flag/seeds.txt")).unwrap(), "seed 9\n");
}

#[test]
fn exit_codes() {
    let ws = Workspace::new();
    // Missing required flag.
    assert_eq!(ws.run(&["train", "--corpus", "corpus.jsonl"]).status.code(), Some(2));
    // Missing input file.
    let out = ws.run(&["train", "--corpus", "nope.jsonl", "--embeddings", "emb.txt", "--out", "m.json"]);
    assert_eq!(out.status.code(), Some(2));
    // Missing resource for an enabled set.
    let out = ws.run(&["train", "--corpus", "corpus.jsonl", "--out", "m.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("embeddings"));
    // Pipeline error, attributed to its module.
    std::fs::write(ws.path("bad.jsonl"), "{\"id\": \"x\"\n").unwrap();
    let out = ws.run(&["train", "--corpus", "bad.jsonl", "--embeddings", "emb.txt", "--out", "m.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sopcheck: corpus:"));
    // Unknown classifier kind.
    assert_eq!(ws.run(&["train", "--corpus", "corpus.jsonl", "--model", "knn", "--out", "m"]).status.code(), Some(2));
    // serve with a missing model file.
    assert_eq!(ws.run(&["serve", "--model", "nope.json"]).status.code(), Some(2));
}
