//! Page layout: connected components, text lines with their reference rows,
//! italic correction, words, and symbols with ottus split from their bases.

mod components;
mod geometry;
mod italic;
mod lines;
mod symbols;
mod words;
mod zone;

use thiserror::Error;

pub use components::{connected_components, remove_specks, BBox, Component};
pub use geometry::{classify_by_geometry, Punctuation};
pub use italic::{correct_italics, correct_italics_components, shear_image, MAX_SHEAR_DEGREES};
pub use lines::{estimate_reference_rows, segment_lines, TextLine};
pub use symbols::{is_ottu, segment_symbols, SymbolImage};
pub use words::{segment_words, Word};
pub use zone::{format_uzn, load_zones, parse_uzn, Zone};

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("line is only {height} rows tall")]
    DegenerateLine { height: i32 },
    #[error("zone file line {line}: {message}")]
    Uzn { line: usize, message: String },
    #[error("zone {0:?} lies outside the page")]
    ZoneOutOfBounds(Zone),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Tunable layout constants.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct LayoutConfig {
    /// Inter-word gap threshold as a fraction of line height.
    pub word_gap_ratio: f64,
    /// Horizontal overlap, relative to the narrower box, that merges two
    /// above-baseline components into one symbol.
    pub overlap_ratio: f64,
    /// Fraction of pixel mass below the baseline that marks an ottu.
    pub ottu_mass_ratio: f64,
    /// Clusters shorter than this fraction of the median line height may be
    /// merged upward as ottu strips.
    pub strip_height_ratio: f64,
    /// Components smaller than this many pixels are discarded as noise.
    pub min_component_area: usize,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            word_gap_ratio: 0.25,
            overlap_ratio: 0.5,
            ottu_mass_ratio: 0.7,
            strip_height_ratio: 0.4,
            min_component_area: 4,
        }
    }
}
