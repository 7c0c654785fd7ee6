#![no_main]
use libfuzzer_sys::fuzz_target;
use sopcheck_core::evaluation::{parse_grid_csv, parse_metrics_csv};
use sopcheck_core::features::parse_matrix_csv;

fuzz_target!(|text: &str| {
    let _ = parse_metrics_csv(text);
    let _ = parse_grid_csv(text);
    if let Ok(m) = parse_matrix_csv(text) {
        let again = parse_matrix_csv(&m.to_csv()).expect("written matrix parses");
        assert_eq!(again.ids, m.ids);
        assert_eq!(again.names, m.names);
    }
});
