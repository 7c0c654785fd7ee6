//! Statement-of-purpose outcome classification: text, embedding and
//! similarity features, from-scratch classifiers, and the evaluation
//! harness around them.

// `!(x > 0.0)` is used on purpose so NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifiers;
pub mod corpus;
pub mod embedding;
mod error;
pub mod evaluation;
pub mod features;
pub mod model;
pub mod pipeline;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
