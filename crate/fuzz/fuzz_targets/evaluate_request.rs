#![no_main]
use std::sync::{Arc, OnceLock};

use libfuzzer_sys::fuzz_target;
use sopcheck_core::classifiers::ClassifierSpec;
use sopcheck_core::features::{FeatureConfig, FeatureResources};
use sopcheck_core::model::{train_model, TrainedModel};
use sopcheck_core::pipeline::analyze_corpus;
use sopcheck_core::synth::{synthetic_corpus, SynthOptions};
use sopcheck_service::server::{validate_request, EvaluateRequest};

fn fixture() -> &'static (TrainedModel, FeatureResources) {
    static F: OnceLock<(TrainedModel, FeatureResources)> = OnceLock::new();
    F.get_or_init(|| {
        let data = synthetic_corpus(&SynthOptions {
            embedding_dimension: 8,
            ..Default::default()
        })
        .unwrap();
        let res = FeatureResources::with_table(Arc::new(data.embeddings.clone()));
        let config = FeatureConfig::default();
        let analyzed = analyze_corpus(&data.corpus, &config, &res).unwrap();
        let model = train_model(&analyzed, &config, &ClassifierSpec::default(), 1).unwrap();
        (model, res)
    })
}

fuzz_target!(|data: &[u8]| {
    let body = serde_json::from_slice::<EvaluateRequest>(data).map_err(|e| (Default::default(), e.to_string()));
    let Ok(text) = validate_request(body) else { return };
    let (model, res) = fixture();
    if let Ok(r) = model.evaluate(&text, res) {
        assert_eq!(r.feature_breakdown.len(), model.feature_names.len());
        assert_eq!(r.label, sopcheck_core::corpus::Label::from_decision(r.decision_value));
    }
});
