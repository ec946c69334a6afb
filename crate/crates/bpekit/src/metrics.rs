//! Tokenization-diff statistics between two encodings of the same text, plus
//! the minimum-embedding-norm probe over an externally supplied norm table.
//!
//! Distances are computed per document: Jaccard distance over token-id sets,
//! Levenshtein over token-id sequences, and Levenshtein normalized by the
//! longer sequence. Identical encodings score 0 on all three.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::encoders::Encoding;
use crate::model::TokenId;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed norm table: {0}")]
    Json(#[from] serde_json::Error),
    #[error("norm table does not cover token id {0}")]
    MissingNorm(TokenId),
    #[error("norm for token id {id} is negative ({norm})")]
    NegativeNorm { id: TokenId, norm: f64 },
    #[error("norm table key {0:?} is not a decimal token id")]
    BadNormKey(String),
    #[error("minimum norm of an empty encoding is undefined")]
    EmptyEncoding,
    #[error("empty text cannot carry {0} tokens")]
    InconsistentStats(usize),
    #[error("expected {expected} perplexity values, got {got}")]
    PerplexityCount { expected: usize, got: usize },
}

/// Jaccard distance `1 - |A ∩ B| / |A ∪ B|` over the two token-id sets;
/// 0 for equal sets (including two empty ones).
pub fn jaccard_distance(a: &Encoding, b: &Encoding) -> f64 {
    let sa: HashSet<TokenId> = a.ids().iter().copied().collect();
    let sb: HashSet<TokenId> = b.ids().iter().copied().collect();
    let intersection = sa.intersection(&sb).count();
    let union = sa.len() + sb.len() - intersection;
    if union == 0 {
        0.0
    } else {
        1.0 - intersection as f64 / union as f64
    }
}

/// Minimum insert/delete/substitute edits between the token-id sequences.
pub fn levenshtein(a: &Encoding, b: &Encoding) -> u64 {
    levenshtein_ids(a.ids(), b.ids())
}

fn levenshtein_ids(a: &[TokenId], b: &[TokenId]) -> u64 {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut row: Vec<u64> = (0..=short.len() as u64).collect();
    for (j, &bj) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = j as u64 + 1;
        for (i, &ai) in short.iter().enumerate() {
            let cost = if ai == bj { diag } else { diag + 1 };
            diag = row[i + 1];
            row[i + 1] = cost.min(row[i] + 1).min(row[i + 1] + 1);
        }
    }
    row[short.len()]
}

/// Levenshtein divided by the longer sequence length; 0 when both are empty.
pub fn normalized_edit(a: &Encoding, b: &Encoding) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        0.0
    } else {
        levenshtein(a, b) as f64 / longest as f64
    }
}

/// Token-id to embedding-norm map, loaded from a JSON object keyed by
/// decimal id strings. Queried ids must be covered; there is no default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NormTable {
    norms: HashMap<u32, f64>,
}

impl NormTable {
    pub fn from_entries(
        entries: impl IntoIterator<Item = (TokenId, f64)>,
    ) -> Result<Self, MetricsError> {
        let mut norms = HashMap::new();
        for (id, norm) in entries {
            if norm < 0.0 {
                return Err(MetricsError::NegativeNorm { id, norm });
            }
            norms.insert(id.0, norm);
        }
        Ok(NormTable { norms })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MetricsError> {
        let text = fs::read_to_string(path)?;
        let raw: HashMap<String, f64> = serde_json::from_str(&text)?;
        let entries = raw
            .into_iter()
            .map(|(key, norm)| {
                let id = key
                    .parse::<u32>()
                    .map_err(|_| MetricsError::BadNormKey(key.clone()))?;
                Ok((TokenId(id), norm))
            })
            .collect::<Result<Vec<_>, MetricsError>>()?;
        Self::from_entries(entries)
    }

    pub fn get(&self, id: TokenId) -> Option<f64> {
        self.norms.get(&id.0).copied()
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }
}

/// Minimum embedding norm over the encoding's token ids, the proxy for the
/// most undertrained token in the sequence.
pub fn min_embedding_norm(e: &Encoding, norms: &NormTable) -> Result<f64, MetricsError> {
    if e.is_empty() {
        return Err(MetricsError::EmptyEncoding);
    }
    let mut min = f64::INFINITY;
    for &id in e.ids() {
        let norm = norms.get(id).ok_or(MetricsError::MissingNorm(id))?;
        min = min.min(norm);
    }
    Ok(min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionStats {
    pub token_count: usize,
    pub tokens_per_byte: f64,
}

/// Token count and tokens-per-byte of `e` against the text it encodes.
pub fn compression_stats(
    e: &Encoding,
    source_text: &str,
) -> Result<CompressionStats, MetricsError> {
    let token_count = e.len();
    if source_text.is_empty() {
        if token_count != 0 {
            return Err(MetricsError::InconsistentStats(token_count));
        }
        return Ok(CompressionStats {
            token_count: 0,
            tokens_per_byte: 0.0,
        });
    }
    Ok(CompressionStats {
        token_count,
        tokens_per_byte: token_count as f64 / source_text.len() as f64,
    })
}

/// Per-document distances between encoding `a` (the reference) and `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleDiff {
    pub jaccard_distance: f64,
    pub levenshtein: u64,
    pub normalized_edit: f64,
    pub token_count_a: usize,
    pub token_count_b: usize,
    /// Raw set sizes, so a Jaccard similarity reading can be recovered.
    pub set_intersection: usize,
    pub set_union: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perplexity: Option<f64>,
}

pub fn example_diff(a: &Encoding, b: &Encoding) -> ExampleDiff {
    let sa: HashSet<TokenId> = a.ids().iter().copied().collect();
    let sb: HashSet<TokenId> = b.ids().iter().copied().collect();
    let set_intersection = sa.intersection(&sb).count();
    let set_union = sa.len() + sb.len() - set_intersection;
    ExampleDiff {
        jaccard_distance: jaccard_distance(a, b),
        levenshtein: levenshtein(a, b),
        normalized_edit: normalized_edit(a, b),
        token_count_a: a.len(),
        token_count_b: b.len(),
        set_intersection,
        set_union,
        perplexity: None,
    }
}

/// Arithmetic means over the per-example rows, tagged for the JSON-lines
/// output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffAggregate {
    pub aggregate: bool,
    pub examples: usize,
    pub jaccard_distance: f64,
    pub levenshtein: f64,
    pub normalized_edit: f64,
    pub token_count_a: f64,
    pub token_count_b: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perplexity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffReport {
    pub per_example: Vec<ExampleDiff>,
    pub aggregate: DiffAggregate,
}

impl DiffReport {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a Encoding, &'a Encoding)>) -> Self {
        let per_example: Vec<ExampleDiff> =
            pairs.into_iter().map(|(a, b)| example_diff(a, b)).collect();
        let aggregate = Self::aggregate_of(&per_example);
        DiffReport {
            per_example,
            aggregate,
        }
    }

    fn aggregate_of(rows: &[ExampleDiff]) -> DiffAggregate {
        let n = rows.len();
        let mean = |f: fn(&ExampleDiff) -> f64| {
            if n == 0 {
                0.0
            } else {
                rows.iter().map(f).sum::<f64>() / n as f64
            }
        };
        let with_ppl: Vec<f64> = rows.iter().filter_map(|r| r.perplexity).collect();
        DiffAggregate {
            aggregate: true,
            examples: n,
            jaccard_distance: mean(|r| r.jaccard_distance),
            levenshtein: mean(|r| r.levenshtein as f64),
            normalized_edit: mean(|r| r.normalized_edit),
            token_count_a: mean(|r| r.token_count_a as f64),
            token_count_b: mean(|r| r.token_count_b as f64),
            perplexity: (with_ppl.len() == n && n > 0)
                .then(|| with_ppl.iter().sum::<f64>() / n as f64),
        }
    }

    /// Merge externally computed per-example perplexities into the report.
    pub fn attach_perplexities(&mut self, values: &[f64]) -> Result<(), MetricsError> {
        if values.len() != self.per_example.len() {
            return Err(MetricsError::PerplexityCount {
                expected: self.per_example.len(),
                got: values.len(),
            });
        }
        for (row, &v) in self.per_example.iter_mut().zip(values) {
            row.perplexity = Some(v);
        }
        self.aggregate = Self::aggregate_of(&self.per_example);
        Ok(())
    }

    /// One JSON object per example, then the aggregate tagged
    /// `{"aggregate": true}`.
    pub fn write_jsonl(&self, mut w: impl Write) -> io::Result<()> {
        for row in &self.per_example {
            serde_json::to_writer(&mut w, row)?;
            writeln!(w)?;
        }
        serde_json::to_writer(&mut w, &self.aggregate)?;
        writeln!(w)?;
        Ok(())
    }

    /// Tab-separated summary of the aggregate distances.
    pub fn write_tsv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "examples\tjaccard\tlevenshtein\tedit")?;
        writeln!(
            w,
            "{}\t{:.3}\t{:.3}\t{:.3}",
            self.aggregate.examples,
            self.aggregate.jaccard_distance,
            self.aggregate.levenshtein,
            self.aggregate.normalized_edit,
        )?;
        Ok(())
    }
}
