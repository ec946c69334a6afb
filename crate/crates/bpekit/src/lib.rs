//! Tokenization toolkit for studying BPE inference schemes on real tokenizer
//! files, with no language model in the loop.
//!
//! The pieces:
//!
//! - [`model`]: the tokenizer data model (vocabulary, merge list, merge
//!   dependency graph) and tokenizer.json / vocab.json+merges.txt I/O.
//! - [`pretokenizer`]: regex splitting plus byte-to-character remapping.
//! - [`encoders`]: five encoding algorithms over one model — merge-based
//!   standard replay, seeded shuffled replay, greedy left-to-right,
//!   minimum-token dynamic programming, and character-level — plus decoding.
//! - [`trainer`]: a desk-scale reference BPE trainer for self-consistent
//!   fixtures.
//! - [`corruption`]: merge-list truncation, random deletion with descendant
//!   closure, and seeded shuffle permutations.
//! - [`metrics`]: Jaccard / Levenshtein / normalized edit distance between
//!   encodings, compression statistics, and the minimum-embedding-norm probe.
//!
//! Models are immutable after construction; encoding and metrics are pure
//! functions, so everything here is safe to share across threads.
//!
//! ```
//! use bpekit::encoders::{decode, encode_text, Algorithm};
//! use bpekit::model::TokenizerModel;
//! use bpekit::pretokenizer::PretokenConfig;
//!
//! let vocab = ["a", "n", "t", "an", "ant"]
//!     .iter()
//!     .enumerate()
//!     .map(|(id, t)| (t.to_string(), id as u32));
//! let merges = [("a", "n"), ("an", "t")]
//!     .iter()
//!     .map(|(l, r)| (l.to_string(), r.to_string()));
//! let model = TokenizerModel::new(vocab, merges, PretokenConfig::plain())?;
//!
//! let encoding = encode_text("ant", &model, Algorithm::Standard)?;
//! assert_eq!(decode(encoding.ids(), &model)?, "ant");
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod bytes;
pub mod corruption;
pub mod encoders;
pub mod metrics;
pub mod model;
pub mod pretokenizer;
pub mod trainer;

pub use corruption::{CorruptionReport, CorruptionSpec, RankPermutation};
pub use encoders::{decode, encode_text, Algorithm, Encoding, VocabTrie};
pub use model::{TokenId, TokenizerModel};
pub use pretokenizer::{pretokenize, Pretoken, PretokenConfig};
