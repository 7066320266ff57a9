//! Kannada script codec: the recognition-unit registry and the conversions
//! between label streams and Unicode text.

mod codec;
mod registry;

use thiserror::Error;

pub use codec::{
    akshara_unicode, combine_parts, disambiguate, group_aksharas, raw_unicode, resolve_vowel_sign,
    unicode_to_symbols, word_unicode, Akshara,
};
pub use registry::{load_registry, LabelId, Role, SymbolLabel, SymbolRegistry, Vowel};

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("registry line {line}: {message}")]
    MalformedRegistry { line: usize, message: String },
    #[error("registry line {line}: unknown label {name}")]
    DanglingReference { line: usize, name: String },
    #[error("{label} has no akshara to attach to")]
    OrphanAttacher { label: String },
    #[error("vowel {vowel} cannot combine with {mark}")]
    UnresolvablePair { vowel: String, mark: String },
    #[error("unsupported code point U+{:04X} at position {position}", *code_point as u32)]
    UnsupportedCodePoint { code_point: char, position: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
