#![no_main]
use libfuzzer_sys::fuzz_target;
use sopcheck_core::features::{parse_sets, FeatureConfig};

fuzz_target!(|text: &str| {
    let _ = parse_sets(text);
    if let Ok(config) = FeatureConfig::from_json(text) {
        let again = FeatureConfig::from_json(&config.to_json_pretty()).expect("written config parses");
        assert_eq!(again.hash(), config.hash());
    }
});
