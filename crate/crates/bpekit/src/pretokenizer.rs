//! Splitting raw text into pretokens.
//!
//! A pretoken is the unit every encoder segments independently: roughly a
//! word together with its leading space under the default pattern. The
//! pretokenizer also applies the byte-to-character remapping, so downstream
//! encoders only ever see "symbols" (single chars in model space).

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, RwLock};

use fancy_regex::Regex;
use serde::{Deserialize, Serialize};

use crate::bytes;

/// The GPT-2 contraction/word/number/punctuation/whitespace split pattern.
pub const DEFAULT_PATTERN: &str =
    r"'s|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+";

/// Pretokens longer than this many symbols are split at the boundary before
/// encoding, which bounds the quadratic-time encoder.
pub const MAX_PRETOKEN_SYMBOLS: usize = 16_384;

/// How text is split and whether bytes are remapped to stand-in characters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PretokenConfig {
    /// Regular expression whose successive matches partition the input.
    pub pattern: String,
    /// Remap every byte of a pretoken to its printable stand-in character.
    pub byte_remap: bool,
}

impl Default for PretokenConfig {
    fn default() -> Self {
        PretokenConfig {
            pattern: DEFAULT_PATTERN.to_string(),
            byte_remap: true,
        }
    }
}

impl PretokenConfig {
    /// Default pattern without byte remapping; symbols are raw characters.
    pub fn plain() -> Self {
        PretokenConfig {
            byte_remap: false,
            ..PretokenConfig::default()
        }
    }
}

/// One unit of encoder input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pretoken {
    /// The pretoken in model space: remapped bytes, or raw characters when
    /// the config disables remapping.
    pub symbols: String,
    /// (byte offset, byte length) of this pretoken in the source text.
    pub span: (usize, usize),
}

impl Pretoken {
    pub fn symbol_count(&self) -> usize {
        self.symbols.chars().count()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PretokenizeError {
    #[error("invalid pretokenizer pattern: {0}")]
    BadPattern(#[from] Box<fancy_regex::Error>),
    #[error("pretokenizer pattern left input uncovered at byte {offset}")]
    CoverageGap { offset: usize },
}

// Compiled patterns are cached per source string; the same config is applied
// to every document of a corpus.
static PATTERN_CACHE: LazyLock<RwLock<HashMap<String, Arc<Regex>>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

fn compiled(pattern: &str) -> Result<Arc<Regex>, PretokenizeError> {
    if let Some(re) = PATTERN_CACHE.read().unwrap().get(pattern) {
        return Ok(Arc::clone(re));
    }
    let re = Arc::new(Regex::new(pattern).map_err(Box::new)?);
    PATTERN_CACHE
        .write()
        .unwrap()
        .insert(pattern.to_string(), Arc::clone(&re));
    Ok(re)
}

/// Split `text` into pretokens.
///
/// The returned spans are contiguous, non-overlapping, and cover the text:
/// concatenating them in order reproduces the input exactly. An empty input
/// yields an empty sequence.
pub fn pretokenize(text: &str, config: &PretokenConfig) -> Result<Vec<Pretoken>, PretokenizeError> {
    let mut out = Vec::new();
    if text.is_empty() {
        return Ok(out);
    }
    let re = compiled(&config.pattern)?;
    let mut cursor = 0usize;
    for m in re.find_iter(text) {
        let m = m.map_err(Box::new)?;
        if m.start() != cursor {
            return Err(PretokenizeError::CoverageGap { offset: cursor });
        }
        push_chunks(&mut out, text, m.start(), m.end(), config);
        cursor = m.end();
    }
    if cursor != text.len() {
        return Err(PretokenizeError::CoverageGap { offset: cursor });
    }
    Ok(out)
}

// Emit a match as one pretoken, or several when it exceeds the symbol cap.
fn push_chunks(
    out: &mut Vec<Pretoken>,
    text: &str,
    start: usize,
    end: usize,
    config: &PretokenConfig,
) {
    let slice = &text[start..end];
    if config.byte_remap {
        // One symbol per byte.
        let bytes = slice.as_bytes();
        let mut at = 0;
        while at < bytes.len() {
            let take = (bytes.len() - at).min(MAX_PRETOKEN_SYMBOLS);
            out.push(Pretoken {
                symbols: bytes::remap(&bytes[at..at + take]),
                span: (start + at, take),
            });
            at += take;
        }
    } else {
        // One symbol per character.
        let mut chunk_start = 0;
        let mut count = 0;
        for (i, c) in slice.char_indices() {
            if count == MAX_PRETOKEN_SYMBOLS {
                out.push(Pretoken {
                    symbols: slice[chunk_start..i].to_string(),
                    span: (start + chunk_start, i - chunk_start),
                });
                chunk_start = i;
                count = 0;
            }
            count += 1;
            let _ = c;
        }
        out.push(Pretoken {
            symbols: slice[chunk_start..].to_string(),
            span: (start + chunk_start, slice.len() - chunk_start),
        });
    }
}
