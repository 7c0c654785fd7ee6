//! Replays the checked-in evaluate_request fuzz seeds through request
//! validation and evaluation.

use std::path::PathBuf;
use std::sync::Arc;

use sopcheck_core::classifiers::ClassifierSpec;
use sopcheck_core::corpus::Label;
use sopcheck_core::features::{FeatureConfig, FeatureResources};
use sopcheck_core::model::train_model;
use sopcheck_core::pipeline::analyze_corpus;
use sopcheck_core::synth::{synthetic_corpus, SynthOptions};
use sopcheck_service::server::{validate_request, EvaluateRequest};

#[test]
fn evaluate_request_seeds() {
    let data = synthetic_corpus(&SynthOptions {
        embedding_dimension: 8,
        ..Default::default()
    })
    .unwrap();
    let res = FeatureResources::with_table(Arc::new(data.embeddings.clone()));
    let config = FeatureConfig::default();
    let analyzed = analyze_corpus(&data.corpus, &config, &res).unwrap();
    let model = train_model(&analyzed, &config, &ClassifierSpec::default(), 1).unwrap();

    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus/evaluate_request");
    let mut accepted = Vec::new();
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let bytes = std::fs::read(&path).unwrap();
        let body = serde_json::from_slice::<EvaluateRequest>(&bytes).map_err(|e| (Default::default(), e.to_string()));
        let Ok(text) = validate_request(body) else { continue };
        // Text with no word tokens is a 422 from the server, not a panic.
        let Ok(r) = model.evaluate(&text, &res) else {
            assert_eq!(name, "punct.json");
            continue;
        };
        assert_eq!(r.feature_breakdown.len(), model.feature_names.len(), "{name}");
        assert_eq!(r.label, Label::from_decision(r.decision_value), "{name}");
        accepted.push(name);
    }
    accepted.sort();
    for rejected in ["empty.json", "missing.json", "not_json.txt", "whitespace.json"] {
        assert!(!accepted.iter().any(|n| n == rejected), "{rejected} passed validation");
    }
    assert!(accepted.iter().any(|n| n == "essay.json"));
}
