#![no_main]
use libfuzzer_sys::fuzz_target;
use sopcheck_core::model::parse_model;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(model) = parse_model(text) {
        // A model that validates must predict without panicking.
        let _ = model.decision_value_raw(&vec![0.0; model.input_dim()]);
        assert_eq!(parse_model(&model.to_json()).expect("written model parses"), model);
    }
});
