#![no_main]
use libfuzzer_sys::fuzz_target;
use sopcheck_core::corpus::parse_corpus;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(corpus) = parse_corpus(text, "fuzz") {
        // Whatever parses must survive a write/read round trip.
        let again = parse_corpus(&corpus.to_jsonl(), "fuzz").expect("written corpus parses");
        assert_eq!(again.documents(), corpus.documents());
    }
});
