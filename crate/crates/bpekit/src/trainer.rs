//! Desk-scale reference BPE trainer.
//!
//! Produces self-consistent fixture models and validates the standard
//! encoder against training dynamics: replaying the recorded merges over a
//! training pretoken reproduces its end-of-training segmentation exactly.
//! Single-threaded, correctness over speed.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::bytes;
use crate::model::{ModelError, TokenizerModel};
use crate::pretokenizer::{pretokenize, PretokenConfig, PretokenizeError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainConfig {
    pub target_merge_count: usize,
    pub tie_break: TieBreak,
}

/// How equally frequent pairs are ordered. Lexicographic tie-breaking keeps
/// fixtures reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    FrequencyThenLexicographic,
}

impl TrainConfig {
    pub fn new(target_merge_count: usize) -> Self {
        TrainConfig {
            target_merge_count,
            tie_break: TieBreak::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("corpus is empty after pretokenization")]
    EmptyCorpus,
    #[error("target merge count must be at least 1")]
    ZeroTarget,
    #[error(transparent)]
    Pretokenize(#[from] PretokenizeError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A trained model plus the final segmentation state of every distinct
/// training pretoken, for checking training/encoding agreement.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: TokenizerModel,
    /// `(pretoken symbols, final pieces)`, sorted by pretoken.
    pub segmentations: Vec<(String, Vec<String>)>,
}

/// Train a BPE model: repeatedly merge the most frequent adjacent pair,
/// counted over the pretoken multiset, recording each merged token.
///
/// Stops early once no pair remains to merge, so the merge list holds
/// `min(target, performable merges)` rules. Pair counts are weighted by
/// pretoken frequency in the corpus.
pub fn train<I, S>(
    corpus: I,
    config: &TrainConfig,
    pretoken_config: &PretokenConfig,
) -> Result<TokenizerModel, TrainError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    Ok(train_full(corpus, config, pretoken_config)?.model)
}

/// [`train`], also returning the end-of-training segmentations.
pub fn train_full<I, S>(
    corpus: I,
    config: &TrainConfig,
    pretoken_config: &PretokenConfig,
) -> Result<TrainOutput, TrainError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if config.target_merge_count == 0 {
        return Err(TrainError::ZeroTarget);
    }
    let TieBreak::FrequencyThenLexicographic = config.tie_break;

    // Pretoken multiset.
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for doc in corpus {
        for pt in pretokenize(doc.as_ref(), pretoken_config)? {
            *counts.entry(pt.symbols).or_insert(0) += 1;
        }
    }
    if counts.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }

    let mut words: Vec<(Vec<String>, u64)> = counts
        .iter()
        .map(|(symbols, &count)| (symbols.chars().map(String::from).collect(), count))
        .collect();

    // The alphabet: every symbol seen, or all 256 byte symbols for
    // byte-level models so any later input stays encodable.
    let alphabet: Vec<String> = if pretoken_config.byte_remap {
        bytes::alphabet().map(String::from).collect()
    } else {
        let seen: BTreeSet<char> = counts.keys().flat_map(|s| s.chars()).collect();
        seen.into_iter().map(String::from).collect()
    };
    let mut vocab_strings: HashSet<String> = alphabet.iter().cloned().collect();

    let mut merges: Vec<(String, String)> = Vec::new();
    while merges.len() < config.target_merge_count {
        let mut pair_counts: HashMap<(&str, &str), u64> = HashMap::new();
        for (pieces, count) in &words {
            for pair in pieces.windows(2) {
                *pair_counts.entry((&pair[0], &pair[1])).or_insert(0) += count;
            }
        }
        // Most frequent pair, ties broken by lexicographically smallest
        // (left, right); pairs whose concatenation is already a token are
        // skipped so vocabulary size stays alphabet + merge count.
        let best = pair_counts
            .into_iter()
            .filter(|((l, r), _)| !vocab_strings.contains(&format!("{l}{r}")))
            .max_by(|((l1, r1), c1), ((l2, r2), c2)| {
                c1.cmp(c2).then_with(|| (l2, r2).cmp(&(l1, r1)))
            });
        let Some(((left, right), _)) = best else {
            break;
        };
        let (left, right) = (left.to_string(), right.to_string());
        let result = format!("{left}{right}");
        for (pieces, _) in &mut words {
            merge_pieces(pieces, &left, &right, &result);
        }
        vocab_strings.insert(result);
        merges.push((left, right));
    }

    // Ids: alphabet first (byte order for byte-level models, codepoint order
    // otherwise), then merge results in rank order.
    let mut entries: Vec<(String, u32)> = alphabet
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s, i as u32))
        .collect();
    let base = entries.len() as u32;
    for (rank, (left, right)) in merges.iter().enumerate() {
        entries.push((format!("{left}{right}"), base + rank as u32));
    }
    let model = TokenizerModel::new(entries, merges, pretoken_config.clone())?;
    let segmentations = counts
        .into_keys()
        .zip(words.into_iter().map(|(pieces, _)| pieces))
        .collect();
    Ok(TrainOutput {
        model,
        segmentations,
    })
}

// Merge every non-overlapping occurrence, scanning left to right; identical
// to repeatedly merging the leftmost occurrence, which is how the standard
// encoder applies a rule.
fn merge_pieces(pieces: &mut Vec<String>, left: &str, right: &str, result: &str) {
    let mut read = 0;
    let mut write = 0;
    while read < pieces.len() {
        if read + 1 < pieces.len() && pieces[read] == left && pieces[read + 1] == right {
            pieces[write] = result.to_string();
            read += 2;
        } else {
            pieces.swap(write, read);
            read += 1;
        }
        write += 1;
    }
    pieces.truncate(write);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoders::encode_standard;
    use crate::model::TokenId;
    use proptest::prelude::*;

    fn plain() -> PretokenConfig {
        PretokenConfig::plain()
    }

    #[test]
    fn anan_learns_the_an_merge() {
        // Pair counts in "anan": (a,n) twice, (n,a) once.
        let model = train(["anan"], &TrainConfig::new(1), &plain()).unwrap();
        assert_eq!(model.merges().len(), 1);
        let rule = model.merges().rule(0).unwrap();
        assert_eq!((rule.left.as_str(), rule.right.as_str()), ("a", "n"));
        let ids = encode_standard("anan", &model).unwrap();
        assert_eq!(ids.len(), 2);
    }

    #[test]
    fn single_pair_corpus_stops_after_one_merge() {
        let model = train(["ab"], &TrainConfig::new(5), &plain()).unwrap();
        assert_eq!(model.merges().len(), 1);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let err = train(Vec::<&str>::new(), &TrainConfig::new(1), &plain()).unwrap_err();
        assert!(matches!(err, TrainError::EmptyCorpus));
        let err = train([""], &TrainConfig::new(1), &plain()).unwrap_err();
        assert!(matches!(err, TrainError::EmptyCorpus));
    }

    #[test]
    fn vocabulary_is_alphabet_plus_merges() {
        let out = train_full(
            ["the cat sat on the mat", "the cat"],
            &TrainConfig::new(10),
            &plain(),
        )
        .unwrap();
        let alphabet = out.model.vocabulary().alphabet().len();
        assert_eq!(
            out.model.vocabulary().len(),
            alphabet + out.model.merges().len()
        );
    }

    #[test]
    fn byte_level_training_seeds_all_bytes() {
        let model = train(["hi"], &TrainConfig::new(1), &PretokenConfig::default()).unwrap();
        assert_eq!(model.vocabulary().alphabet().len(), 256);
        // Byte tokens take ids 0..=255 in byte order.
        assert_eq!(model.vocabulary().token_of(TokenId(b'a' as u32)), Some("a"));
        assert!(model.warnings().is_empty());
    }

    #[test]
    fn frequency_ties_break_lexicographically() {
        // "dc" and "ba" both occur twice; "ba" is lexicographically first.
        let model = train(["dcba dcba"], &TrainConfig::new(1), &plain()).unwrap();
        let rule = model.merges().rule(0).unwrap();
        assert_eq!((rule.left.as_str(), rule.right.as_str()), ("b", "a"));
    }

    #[test]
    fn hierarchy_holds_on_trained_models() {
        let model = train(
            ["banana bandana cabana", "banana banana"],
            &TrainConfig::new(12),
            &plain(),
        )
        .unwrap();
        assert!(!model
            .warnings()
            .iter()
            .any(|w| matches!(w, crate::model::LoadWarning::HierarchyViolation { .. })));
    }

    fn random_corpus(seed: u64) -> Vec<String> {
        use rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let alphabet = ['a', 'b', 'c', 'd', 'e'];
        (0..12)
            .map(|_| {
                let words: Vec<String> = (0..(rng.next_u64() % 5 + 1))
                    .map(|_| {
                        let len = rng.next_u64() % 7 + 1;
                        (0..len)
                            .map(|_| alphabet[(rng.next_u64() % 5) as usize])
                            .collect()
                    })
                    .collect();
                words.join(" ")
            })
            .collect()
    }

    proptest! {
        // The property motivating merge replay at inference time: the
        // standard encoder reproduces the end-of-training segmentation of
        // every training pretoken.
        #[test]
        fn training_and_encoding_agree(seed in 0u64..150) {
            let corpus = random_corpus(seed);
            let out = train_full(&corpus, &TrainConfig::new(15), &plain()).unwrap();
            for (pretoken, pieces) in &out.segmentations {
                let ids = encode_standard(pretoken, &out.model).unwrap();
                let got: Vec<&str> = ids
                    .iter()
                    .map(|&id| out.model.vocabulary().token_of(id).unwrap())
                    .collect();
                prop_assert_eq!(&got, pieces, "pretoken {:?}", pretoken);
            }
        }

        // Operands always precede results in trained merge lists.
        #[test]
        fn trained_rank_invariant(seed in 0u64..60) {
            let corpus = random_corpus(seed);
            let out = train_full(&corpus, &TrainConfig::new(10), &plain()).unwrap();
            let model = out.model;
            for rule in model.merges().rules() {
                for operand in [&rule.left, &rule.right] {
                    if operand.chars().nth(1).is_some() {
                        let producer = model
                            .merges()
                            .rules()
                            .iter()
                            .find(|r| &r.result == operand)
                            .expect("multi-char operand must be produced");
                        prop_assert!(producer.rank < rule.rank);
                    }
                }
            }
        }
    }
}
