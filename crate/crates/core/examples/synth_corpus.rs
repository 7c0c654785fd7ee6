//! Writes the synthetic corpus and its embedding table to a directory.
//!
//! cargo run -p sopcheck-core --example synth_corpus -- <out_dir> [dimension] [seed]

use std::path::PathBuf;

use sopcheck_core::synth::{synthetic_corpus, SynthOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().ok_or("usage: synth_corpus <out_dir> [dimension] [seed]")?);
    let mut opts = SynthOptions::default();
    if let Some(d) = args.next() {
        opts.embedding_dimension = d.parse()?;
    }
    if let Some(s) = args.next() {
        opts.seed = s.parse()?;
    }
    let data = synthetic_corpus(&opts)?;
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("corpus.jsonl"), data.corpus.to_jsonl())?;
    std::fs::write(out.join("embeddings.txt"), data.embeddings.to_text())?;
    println!(
        "wrote {} documents and a {}-dimensional table of {} words to {}",
        data.corpus.len(),
        data.embeddings.dimension(),
        data.embeddings.vocab_size(),
        out.display()
    );
    Ok(())
}
