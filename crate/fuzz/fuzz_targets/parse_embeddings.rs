#![no_main]
use libfuzzer_sys::fuzz_target;
use sopcheck_core::embedding::parse_embeddings;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = parse_embeddings(text, None) {
        let again = parse_embeddings(&table.to_text(), Some(table.dimension())).expect("written table parses");
        assert_eq!(again.vocab_size(), table.vocab_size());
    }
});
