#![no_main]
use libfuzzer_sys::fuzz_target;
use sopcheck_core::text::resources::{parse_connectors, parse_sense_table, parse_tag_lexicon, parse_word_list};

fuzz_target!(|text: &str| {
    let _ = parse_tag_lexicon(text);
    let _ = parse_sense_table(text);
    let _ = parse_word_list(text);
    let _ = parse_connectors(text);
});
