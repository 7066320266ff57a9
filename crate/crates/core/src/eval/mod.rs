//! Accuracy measurement and synthetic test pages.

mod align;
pub mod glyphs;
mod metrics;
pub mod synth;

use thiserror::Error;

pub use align::{levenshtein_align, EditCounts};
pub use synth::{compose_synthetic_page, GlyphAtlas, NoiseParams, PageParams, SyntheticPage, SynthError};
pub use metrics::{accuracy, eval_page, normalize_text, EvalCounts, EvalReport, PageFailure, PageResult};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("ground truth is empty")]
    ZeroGroundTruth,
}
