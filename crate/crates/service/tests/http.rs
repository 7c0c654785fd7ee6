use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use tower::ServiceExt;

use sopcheck_core::classifiers::{ClassifierKind, ClassifierSpec};
use sopcheck_core::features::{FeatureConfig, FeatureResources, FeatureSet, ReferenceMode};
use sopcheck_core::model::{train_model, EvaluationResponse, TrainedModel};
use sopcheck_core::pipeline::analyze_corpus;
use sopcheck_core::synth::{synthetic_corpus, SynthOptions, SyntheticData};
use sopcheck_service::server::{router, validate_request, AppState, EvaluateRequest, Health, Readiness, MAX_TEXT_CHARS};

struct Fixture {
    data: SyntheticData,
    res: FeatureResources,
    model: TrainedModel,
}

/// SVM on SE+WE, reference over all accepted essays, fitted hard enough to
/// memorize its training set.
fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let data = synthetic_corpus(&SynthOptions::default()).unwrap();
        let res = FeatureResources::with_table(Arc::new(data.embeddings.clone()));
        let mut config = FeatureConfig::with_sets([FeatureSet::SE, FeatureSet::WE]);
        config.reference_mode = ReferenceMode::AllAccepted;
        let analyzed = analyze_corpus(&data.corpus, &config, &res).unwrap();
        let mut spec = ClassifierSpec::new(ClassifierKind::Svm);
        spec.svm.c = 1000.0;
        let model = train_model(&analyzed, &config, &spec, 1).unwrap();
        Fixture { data, res, model }
    })
}

fn ready() -> AppState {
    let f = fixture();
    AppState::ready(f.model.clone(), f.res.clone())
}

async fn call(state: AppState, req: Request<Body>) -> (StatusCode, serde_json::Value) {
    let resp = router(state).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(serde_json::Value::Null))
}

fn post(body: impl Into<Body>) -> Request<Body> {
    Request::post("/v1/evaluate")
        .header("content-type", "application/json")
        .body(body.into())
        .unwrap()
}

fn evaluate_body(text: &str) -> String {
    serde_json::json!({ "text": text }).to_string()
}

fn health_req() -> Request<Body> {
    Request::get("/v1/health").body(Body::empty()).unwrap()
}

#[tokio::test]
async fn health_reports_model_identity() {
    let f = fixture();
    let (status, body) = call(ready(), health_req()).await;
    assert_eq!(status, StatusCode::OK);
    let h: Health = serde_json::from_value(body).unwrap();
    assert_eq!(h.status, "ok");
    assert_eq!(h.model_id.as_deref(), Some(f.model.model_id.as_str()));
    assert_eq!(h.feature_config_hash.as_deref(), Some(f.model.feature_config.hash().as_str()));
}

#[tokio::test]
async fn loading_and_failed_states_refuse_evaluation() {
    let state = AppState::loading();
    let (_, body) = call(state.clone(), health_req()).await;
    assert_eq!(body["status"], "loading");
    let (status, _) = call(state.clone(), post(evaluate_body("An essay."))).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);

    state.finish(Readiness::Failed("model file: bad".into()));
    let (_, body) = call(state.clone(), health_req()).await;
    assert_eq!(body["status"], "error");
    let (status, _) = call(state, post(evaluate_body("An essay."))).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
}

#[tokio::test]
async fn memorized_accepted_essay_is_accepted() {
    let f = fixture();
    let doc = f
        .data
        .corpus
        .documents()
        .iter()
        .find(|d| d.id.starts_with("acc-"))
        .unwrap();
    let (status, body) = call(ready(), post(evaluate_body(&doc.text))).await;
    assert_eq!(status, StatusCode::OK);
    let r: EvaluationResponse = serde_json::from_value(body).unwrap();
    let direct = f.model.evaluate(&doc.text, &f.res).unwrap();
    assert_eq!(r.label.as_str(), "accepted");
    assert!(r.decision_value > 0.0);
    assert!((r.decision_value - direct.decision_value).abs() <= 1e-12);
    assert_eq!(r.feature_breakdown.len(), f.model.feature_names.len());
    assert_eq!(r.model_id, f.model.model_id);
}

#[tokio::test]
async fn validation_errors() {
    let (status, _) = call(ready(), post(evaluate_body(""))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(ready(), post(evaluate_body("   \n\t "))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(ready(), post("{}")).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(ready(), post("not json")).await;
    assert!(status.is_client_error());
    let (status, body) = call(ready(), post(evaluate_body(&"a".repeat(MAX_TEXT_CHARS + 1)))).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    assert!(body["error"].as_str().unwrap().contains("100000"));
    // Bodies far beyond the limit are cut off before parsing.
    let (status, _) = call(ready(), post(evaluate_body(&"a".repeat(10 * MAX_TEXT_CHARS)))).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    // Punctuation only: no words to analyze.
    let (status, body) = call(ready(), post(evaluate_body("... !!! ???"))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].is_string());
}

#[test]
fn length_limit_counts_characters() {
    let at_limit = "é".repeat(MAX_TEXT_CHARS);
    assert!(validate_request(Ok(EvaluateRequest { text: at_limit })).is_ok());
    let over = "é".repeat(MAX_TEXT_CHARS + 1);
    assert_eq!(
        validate_request(Ok(EvaluateRequest { text: over })).unwrap_err().0,
        StatusCode::PAYLOAD_TOO_LARGE
    );
}

#[tokio::test]
async fn stateless_and_concurrent() {
    let f = fixture();
    let texts: Vec<String> = f.data.corpus.documents().iter().take(8).map(|d| d.text.clone()).collect();
    let mut sequential = Vec::new();
    for t in &texts {
        sequential.push(call(ready(), post(evaluate_body(t))).await);
    }
    let again = call(ready(), post(evaluate_body(&texts[0]))).await;
    assert_eq!(again, sequential[0]);

    let state = ready();
    let handles: Vec<_> = texts
        .iter()
        .map(|t| {
            let state = state.clone();
            let body = evaluate_body(t);
            tokio::spawn(async move { call(state, post(body)).await })
        })
        .collect();
    for (h, seq) in handles.into_iter().zip(&sequential) {
        assert_eq!(&h.await.unwrap(), seq);
    }
}

#[tokio::test]
async fn unknown_route_is_404() {
    let resp = router(ready())
        .oneshot(Request::get("/v1/nothing").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::NOT_FOUND);
}
