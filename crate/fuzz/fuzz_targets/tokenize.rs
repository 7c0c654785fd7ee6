#![no_main]
use libfuzzer_sys::fuzz_target;
use sopcheck_core::text::{tokenize, LexicalResources, TextualFeatures};

fuzz_target!(|text: &str| {
    let Ok(doc) = tokenize(text) else { return };
    let mut last = None;
    for t in doc.tokens() {
        assert_eq!(&text[t.offset..t.offset + t.text.len()], t.text);
        assert!(last.is_none_or(|l| t.offset > l));
        last = Some(t.offset);
    }
    let _ = TextualFeatures::compute(&doc, LexicalResources::bundled(), true);
});
