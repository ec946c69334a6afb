//! The encoding algorithms, all sharing the shape `pretoken -> token ids`.
//!
//! Two families exist. The merge-based encoders ([`encode_standard`],
//! [`encode_shuffled`]) replay merge rules in priority order, the way the
//! merge list was built. The vocabulary-only encoders ([`encode_left_to_right`],
//! [`encode_max_compression`], [`encode_char_level`]) never consult the merge
//! list and work on any model, including one with zero rules.
//!
//! Every encoder is a pure function over an immutable model, so independent
//! texts can be encoded concurrently without synchronization.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bytes;
use crate::corruption::{make_shuffle_permutation, RankPermutation};
use crate::model::{TokenId, TokenizerModel, Vocabulary};
use crate::pretokenizer::{pretokenize, PretokenizeError};

/// Token ids for one document, with the index where each pretoken's tokens
/// start. Decoding the ids reproduces the source text byte for byte.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoding {
    ids: Vec<TokenId>,
    pretoken_boundaries: Vec<usize>,
}

impl Encoding {
    pub fn new(ids: Vec<TokenId>, pretoken_boundaries: Vec<usize>) -> Self {
        Encoding {
            ids,
            pretoken_boundaries,
        }
    }

    /// An encoding with no pretoken structure, e.g. one read back from a
    /// JSON-lines file.
    pub fn from_ids(ids: Vec<TokenId>) -> Self {
        let pretoken_boundaries = if ids.is_empty() { Vec::new() } else { vec![0] };
        Encoding {
            ids,
            pretoken_boundaries,
        }
    }

    pub fn ids(&self) -> &[TokenId] {
        &self.ids
    }

    pub fn pretoken_boundaries(&self) -> &[usize] {
        &self.pretoken_boundaries
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Token-id slices per pretoken, in order.
    pub fn pretoken_slices(&self) -> impl Iterator<Item = &[TokenId]> {
        let ends = self
            .pretoken_boundaries
            .iter()
            .copied()
            .skip(1)
            .chain(std::iter::once(self.ids.len()));
        self.pretoken_boundaries
            .iter()
            .copied()
            .zip(ends)
            .map(|(start, end)| &self.ids[start..end])
    }
}

/// Prefix trie over the non-special vocabulary.
#[derive(Debug, Clone)]
pub struct VocabTrie {
    nodes: Vec<TrieNode>,
}

#[derive(Debug, Clone, Default)]
struct TrieNode {
    children: HashMap<char, u32>,
    token: Option<TokenId>,
}

impl VocabTrie {
    pub fn from_model(model: &TokenizerModel) -> Self {
        let mut trie = VocabTrie {
            nodes: vec![TrieNode::default()],
        };
        for (token, id) in model.vocabulary().iter() {
            if !model.vocabulary().is_special(id) {
                trie.insert(token, id);
            }
        }
        trie
    }

    fn insert(&mut self, token: &str, id: TokenId) {
        let mut node = 0u32;
        for c in token.chars() {
            node = match self.nodes[node as usize].children.get(&c) {
                Some(&next) => next,
                None => {
                    let next = self.nodes.len() as u32;
                    self.nodes.push(TrieNode::default());
                    self.nodes[node as usize].children.insert(c, next);
                    next
                }
            };
        }
        self.nodes[node as usize].token = Some(id);
    }

    pub(crate) fn root(&self) -> u32 {
        0
    }

    pub(crate) fn step(&self, node: u32, symbol: char) -> Option<u32> {
        self.nodes[node as usize].children.get(&symbol).copied()
    }

    pub(crate) fn token_at(&self, node: u32) -> Option<TokenId> {
        self.nodes[node as usize].token
    }

    /// Longest vocabulary token that prefixes `symbols`, with its length.
    pub fn longest_prefix(&self, symbols: &[char]) -> Option<(usize, TokenId)> {
        let mut node = self.root();
        let mut best = None;
        for (i, &c) in symbols.iter().enumerate() {
            match self.step(node, c) {
                Some(next) => {
                    node = next;
                    if let Some(id) = self.token_at(node) {
                        best = Some((i + 1, id));
                    }
                }
                None => break,
            }
        }
        best
    }
}

/// Which encoding algorithm to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Merge-based replay in rank order, as during training.
    Standard,
    /// Greedy longest vocabulary prefix, vocabulary only.
    LeftToRight,
    /// Fewest tokens over all vocabulary segmentations, vocabulary only.
    MaxCompression,
    /// One token per alphabet symbol.
    CharLevel,
    /// Merge-based replay under a seeded permutation of the rank order.
    Shuffled { seed: u64 },
}

#[derive(Debug, thiserror::Error)]
pub enum EncodeError {
    #[error("unencodable symbol {symbol:?} at offset {offset}")]
    UnencodableSymbol { symbol: char, offset: usize },
    #[error("unencodable pretoken: no vocabulary segmentation exists")]
    UnencodablePretoken,
    #[error("shuffled encoding needs a non-empty merge list")]
    EmptyMergeList,
    #[error(transparent)]
    Pretokenize(#[from] PretokenizeError),
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("unknown token id {0}")]
    UnknownId(TokenId),
    #[error("symbol {ch:?} at offset {offset} is not a byte stand-in")]
    UnmappedChar { ch: char, offset: usize },
    #[error("decoded bytes are not valid UTF-8 at offset {offset}")]
    InvalidUtf8 { offset: usize },
}

fn symbol_ids(pretoken: &str, vocab: &Vocabulary) -> Result<Vec<TokenId>, EncodeError> {
    let mut buf = [0u8; 4];
    pretoken
        .chars()
        .enumerate()
        .map(|(offset, symbol)| {
            vocab
                .id_of(symbol.encode_utf8(&mut buf))
                .ok_or(EncodeError::UnencodableSymbol { symbol, offset })
        })
        .collect()
}

// Shared merge engine: repeatedly apply the applicable rule of lowest
// priority, breaking ties on the leftmost occurrence, until none applies.
fn merge_encode(
    pretoken: &str,
    model: &TokenizerModel,
    priority_of: impl Fn(u32) -> u32,
) -> Result<Vec<TokenId>, EncodeError> {
    let vocab = model.vocabulary();
    let mut pieces = symbol_ids(pretoken, vocab)?;
    let index = model.merge_index();
    loop {
        let mut best: Option<(u32, usize, TokenId)> = None;
        for (pos, pair) in pieces.windows(2).enumerate() {
            let Some(rules) = index.get(&(pair[0], pair[1])) else {
                continue;
            };
            for &(rank, result) in rules {
                let priority = priority_of(rank);
                if best.is_none_or(|(p, _, _)| priority < p) {
                    best = Some((priority, pos, result));
                }
            }
        }
        let Some((_, pos, result)) = best else { break };
        pieces[pos] = result;
        pieces.remove(pos + 1);
    }
    Ok(pieces)
}

/// Merge-based encoding in rank order. If the whole pretoken is a
/// merge-reachable (non-special) vocabulary token, it short-circuits to that
/// single token; stranded tokens of a corrupted model are never emitted.
pub fn encode_standard(
    pretoken: &str,
    model: &TokenizerModel,
) -> Result<Vec<TokenId>, EncodeError> {
    let vocab = model.vocabulary();
    if let Some(id) = vocab.non_special_id_of(pretoken) {
        if !model.is_merge_unreachable(id) {
            return Ok(vec![id]);
        }
    }
    merge_encode(pretoken, model, |rank| rank)
}

/// Merge-based encoding with rule priorities replaced by
/// `permutation(rank)`. The permutation is fixed for a whole run.
///
/// This is a pure replay from single symbols, with no whole-pretoken match:
/// a shuffled priority order must be free to settle on a different
/// segmentation even when the pretoken itself is a vocabulary token.
pub fn encode_shuffled(
    pretoken: &str,
    model: &TokenizerModel,
    permutation: &RankPermutation,
) -> Result<Vec<TokenId>, EncodeError> {
    merge_encode(pretoken, model, |rank| permutation.priority(rank))
}

/// Greedy longest-prefix segmentation: emit the longest vocabulary prefix,
/// restart on the remaining suffix.
pub fn encode_left_to_right(pretoken: &str, trie: &VocabTrie) -> Result<Vec<TokenId>, EncodeError> {
    let symbols: Vec<char> = pretoken.chars().collect();
    let mut ids = Vec::new();
    let mut pos = 0;
    while pos < symbols.len() {
        match trie.longest_prefix(&symbols[pos..]) {
            Some((len, id)) => {
                ids.push(id);
                pos += len;
            }
            None => {
                return Err(EncodeError::UnencodableSymbol {
                    symbol: symbols[pos],
                    offset: pos,
                })
            }
        }
    }
    Ok(ids)
}

/// Minimum-length segmentation into vocabulary tokens.
///
/// `dp[i]` holds the best encoding of the length-`i` prefix as
/// `(token count, predecessor, last token)`; from each reachable `i` the trie
/// is walked forward over every token starting there, improving `dp[j+1]`
/// only on strictly shorter counts so the first-found encoding is kept.
/// O(n^2) time, O(n) slots.
pub fn encode_max_compression(
    pretoken: &str,
    trie: &VocabTrie,
) -> Result<Vec<TokenId>, EncodeError> {
    let symbols: Vec<char> = pretoken.chars().collect();
    let n = symbols.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut dp: Vec<Option<(u32, usize, TokenId)>> = vec![None; n + 1];
    dp[0] = Some((0, 0, TokenId(0)));
    for i in 0..n {
        let Some((count, _, _)) = dp[i] else { continue };
        let mut node = trie.root();
        for j in i..n {
            let Some(next) = trie.step(node, symbols[j]) else {
                break;
            };
            node = next;
            if let Some(id) = trie.token_at(node) {
                let candidate = count + 1;
                if dp[j + 1].is_none_or(|(c, _, _)| candidate < c) {
                    dp[j + 1] = Some((candidate, i, id));
                }
            }
        }
    }
    if dp[n].is_none() {
        return Err(EncodeError::UnencodablePretoken);
    }
    let mut ids = Vec::new();
    let mut at = n;
    while at > 0 {
        let (_, prev, id) = dp[at].expect("backtrack follows reachable slots");
        ids.push(id);
        at = prev;
    }
    ids.reverse();
    Ok(ids)
}

/// One token per alphabet symbol, in order.
pub fn encode_char_level(
    pretoken: &str,
    model: &TokenizerModel,
) -> Result<Vec<TokenId>, EncodeError> {
    symbol_ids(pretoken, model.vocabulary())
}

/// Pretokenize `text` and encode every pretoken with `algorithm`,
/// concatenating the results and recording pretoken boundaries.
pub fn encode_text(
    text: &str,
    model: &TokenizerModel,
    algorithm: Algorithm,
) -> Result<Encoding, EncodeError> {
    let pretokens = pretokenize(text, model.pretoken_config())?;
    let permutation = match algorithm {
        Algorithm::Shuffled { seed } => {
            Some(make_shuffle_permutation(model, seed).map_err(|_| EncodeError::EmptyMergeList)?)
        }
        _ => None,
    };
    let mut ids = Vec::new();
    let mut boundaries = Vec::with_capacity(pretokens.len());
    for pt in &pretokens {
        boundaries.push(ids.len());
        let result = match algorithm {
            Algorithm::Standard => encode_standard(&pt.symbols, model),
            Algorithm::LeftToRight => encode_left_to_right(&pt.symbols, model.vocab_trie()),
            Algorithm::MaxCompression => encode_max_compression(&pt.symbols, model.vocab_trie()),
            Algorithm::CharLevel => encode_char_level(&pt.symbols, model),
            Algorithm::Shuffled { .. } => encode_shuffled(
                &pt.symbols,
                model,
                permutation.as_ref().expect("built above"),
            ),
        };
        let mut piece = result.map_err(|e| globalize_offset(e, pt.span.0, &pt.symbols, model))?;
        ids.append(&mut piece);
    }
    Ok(Encoding {
        ids,
        pretoken_boundaries: boundaries,
    })
}

// Rewrite a pretoken-relative symbol offset as a byte offset into the
// document, which is what CLI diagnostics report.
fn globalize_offset(
    err: EncodeError,
    span_start: usize,
    symbols: &str,
    model: &TokenizerModel,
) -> EncodeError {
    match err {
        EncodeError::UnencodableSymbol { symbol, offset } => {
            let byte_offset = if model.pretoken_config().byte_remap {
                offset
            } else {
                symbols
                    .char_indices()
                    .nth(offset)
                    .map(|(b, _)| b)
                    .unwrap_or(0)
            };
            EncodeError::UnencodableSymbol {
                symbol,
                offset: span_start + byte_offset,
            }
        }
        other => other,
    }
}

/// Concatenate the token strings behind `ids` and unmap the byte stand-ins
/// back to the original bytes.
pub fn decode(ids: &[TokenId], model: &TokenizerModel) -> Result<String, DecodeError> {
    let vocab = model.vocabulary();
    let mut symbols = String::new();
    for &id in ids {
        symbols.push_str(vocab.token_of(id).ok_or(DecodeError::UnknownId(id))?);
    }
    if !model.pretoken_config().byte_remap {
        return Ok(symbols);
    }
    let mut decoded = Vec::with_capacity(symbols.len());
    for (offset, ch) in symbols.chars().enumerate() {
        decoded.push(bytes::char_to_byte(ch).ok_or(DecodeError::UnmappedChar { ch, offset })?);
    }
    String::from_utf8(decoded).map_err(|e| DecodeError::InvalidUtf8 {
        offset: e.utf8_error().valid_up_to(),
    })
}
