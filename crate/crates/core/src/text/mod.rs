//! Tokenization and the text-intrinsic feature extractors.

mod extract;
pub mod resources;
mod tokenize;

pub use extract::{
    coref_distance, discourse_count, fres, fres_from_counts, length_features, ne_count,
    polysemy_degree, pos_ratios, readability_counts, spell_errors, syllables, LengthFeatures,
    PosRatios, ReadabilityCounts, TextualFeatures,
};
pub use resources::{LexicalResources, Tag};
pub use tokenize::{tokenize, Sentence, Token, TokenizedDoc};
