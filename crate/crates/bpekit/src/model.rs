//! The tokenizer data model: vocabulary, merge list, merge dependency graph,
//! and the file formats they are loaded from and saved to.
//!
//! A [`TokenizerModel`] is immutable after construction; every corruption or
//! prune returns a new model. That makes shared read access from concurrent
//! workers safe without synchronization.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::bytes;
use crate::encoders::VocabTrie;
use crate::pretokenizer::{PretokenConfig, DEFAULT_PATTERN};

/// Index of a token in the vocabulary.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenId(pub u32);

// (left id, right id) -> [(rank, result id)]; more than one entry only when
// a file repeats a pair.
type MergeIndex = HashMap<(TokenId, TokenId), Vec<(u32, TokenId)>>;

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TokenId({})", self.0)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing or malformed {0} section")]
    MissingSection(&'static str),
    #[error("not a BPE tokenizer (model.type = {0:?})")]
    UnsupportedModelType(String),
    #[error("vocab entry {token:?} has a non-integer id")]
    BadVocabEntry { token: String },
    #[error("duplicate token id {id} ({first:?} and {second:?})")]
    DuplicateId {
        id: u32,
        first: String,
        second: String,
    },
    #[error("duplicate token string {0:?}")]
    DuplicateToken(String),
    #[error("merge {rank}: unknown operand {token:?}")]
    UnknownOperand { rank: u32, token: String },
    #[error("merge {rank}: result {token:?} is not in the vocabulary")]
    UnknownResult { rank: u32, token: String },
    #[error("merge entry {index} is neither a \"left right\" string nor a [left, right] pair")]
    BadMergeEntry { index: usize },
    #[error("{path}:{line}: expected exactly two fields, got {content:?}")]
    BadMergeLine {
        path: String,
        line: usize,
        content: String,
    },
    #[error("added token {token:?} listed with id {listed} but vocab maps it to {in_vocab}")]
    AddedTokenMismatch {
        token: String,
        listed: u32,
        in_vocab: u32,
    },
    #[error("seed rank {0} is not in the merge graph")]
    SeedOutOfRange(u32),
}

/// Non-fatal observations made while building a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadWarning {
    /// Token ids do not form the contiguous range 0..len.
    NonContiguousIds { len: usize, max_id: u32 },
    /// Byte remapping is enabled but some of the 256 byte symbols have no
    /// single-character token.
    MissingByteSymbols { missing: usize },
    /// Tokens that no merge rule produces and that are not alphabet symbols.
    /// They are retained and stay usable by vocabulary-only encoders.
    MergeUnreachableTokens { count: usize },
    /// A rule operand that is neither an alphabet symbol nor the result of
    /// an earlier rule.
    HierarchyViolation { rank: u32, operand: String },
}

impl fmt::Display for LoadWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadWarning::NonContiguousIds { len, max_id } => {
                write!(
                    f,
                    "token ids are not contiguous: {len} tokens, max id {max_id}"
                )
            }
            LoadWarning::MissingByteSymbols { missing } => {
                write!(
                    f,
                    "byte-level model is missing {missing} of 256 byte symbols"
                )
            }
            LoadWarning::MergeUnreachableTokens { count } => {
                write!(
                    f,
                    "{count} vocabulary tokens are unreachable through the merge list"
                )
            }
            LoadWarning::HierarchyViolation { rank, operand } => {
                write!(
                    f,
                    "merge {rank}: operand {operand:?} precedes every rule producing it"
                )
            }
        }
    }
}

/// Bijective map between token strings and ids, plus the derived alphabet of
/// single-character tokens.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    token_to_id: HashMap<String, TokenId>,
    id_to_token: HashMap<u32, String>,
    alphabet: BTreeSet<char>,
    special: HashSet<TokenId>,
}

impl Vocabulary {
    fn from_entries(
        entries: impl IntoIterator<Item = (String, u32)>,
        special_tokens: &HashSet<String>,
    ) -> Result<Self, ModelError> {
        let mut token_to_id = HashMap::new();
        let mut id_to_token: HashMap<u32, String> = HashMap::new();
        let mut alphabet = BTreeSet::new();
        let mut special = HashSet::new();
        for (token, id) in entries {
            if let Some(prev) = id_to_token.get(&id) {
                if *prev != token {
                    return Err(ModelError::DuplicateId {
                        id,
                        first: prev.clone(),
                        second: token,
                    });
                }
                continue;
            }
            if token_to_id.contains_key(&token) {
                return Err(ModelError::DuplicateToken(token));
            }
            let mut chars = token.chars();
            if let (Some(c), None) = (chars.next(), chars.next()) {
                alphabet.insert(c);
            }
            if special_tokens.contains(&token) {
                special.insert(TokenId(id));
            }
            id_to_token.insert(id, token.clone());
            token_to_id.insert(token, TokenId(id));
        }
        Ok(Vocabulary {
            token_to_id,
            id_to_token,
            alphabet,
            special,
        })
    }

    pub fn id_of(&self, token: &str) -> Option<TokenId> {
        self.token_to_id.get(token).copied()
    }

    /// Lookup that ignores special (added) tokens, which never match inside
    /// ordinary pretokens.
    pub fn non_special_id_of(&self, token: &str) -> Option<TokenId> {
        self.id_of(token).filter(|id| !self.special.contains(id))
    }

    pub fn token_of(&self, id: TokenId) -> Option<&str> {
        self.id_to_token.get(&id.0).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.token_to_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_to_id.is_empty()
    }

    /// The set of single-character tokens.
    pub fn alphabet(&self) -> &BTreeSet<char> {
        &self.alphabet
    }

    pub fn is_special(&self, id: TokenId) -> bool {
        self.special.contains(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, TokenId)> {
        self.token_to_id.iter().map(|(t, &id)| (t.as_str(), id))
    }

    /// Entries sorted by id; the order used when serializing.
    pub fn iter_by_id(&self) -> impl Iterator<Item = (&str, TokenId)> {
        let sorted: BTreeMap<u32, &String> =
            self.id_to_token.iter().map(|(&i, t)| (i, t)).collect();
        sorted.into_iter().map(|(i, t)| (t.as_str(), TokenId(i)))
    }

    pub fn single_char_token_count(&self) -> usize {
        self.alphabet.len()
    }

    fn max_id(&self) -> Option<u32> {
        self.id_to_token.keys().max().copied()
    }
}

/// One recorded merge: `left ++ right -> result`, at a rank giving its
/// priority (0 = learned first = applied first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeRule {
    pub rank: u32,
    pub left: String,
    pub right: String,
    pub result: String,
}

/// The ordered merge list plus the parent/child dependency graph over rules.
///
/// Rule `c` is a child of rule `p` when `c` uses `p`'s result as an operand;
/// deleting `p` makes `c` unreachable. Edges always point from shorter result
/// strings to strictly longer ones, so the graph is acyclic by construction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MergeGraph {
    rules: Vec<MergeRule>,
    children: Vec<Vec<u32>>,
}

impl MergeGraph {
    fn build(pairs: Vec<(String, String)>) -> Self {
        let rules: Vec<MergeRule> = pairs
            .into_iter()
            .enumerate()
            .map(|(rank, (left, right))| MergeRule {
                rank: rank as u32,
                result: format!("{left}{right}"),
                left,
                right,
            })
            .collect();
        let mut producers: HashMap<&str, Vec<u32>> = HashMap::new();
        for rule in &rules {
            producers
                .entry(rule.result.as_str())
                .or_default()
                .push(rule.rank);
        }
        let mut children = vec![Vec::new(); rules.len()];
        for rule in &rules {
            for operand in [rule.left.as_str(), rule.right.as_str()] {
                if let Some(ps) = producers.get(operand) {
                    for &p in ps {
                        let list = &mut children[p as usize];
                        if list.last() != Some(&rule.rank) {
                            list.push(rule.rank);
                        }
                    }
                }
            }
        }
        MergeGraph { rules, children }
    }

    pub fn rules(&self) -> &[MergeRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rule(&self, rank: u32) -> Option<&MergeRule> {
        self.rules.get(rank as usize)
    }

    /// Ranks of the rules that directly depend on `rank`'s result.
    pub fn children_of(&self, rank: u32) -> &[u32] {
        self.children
            .get(rank as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Transitive closure of the child relation over `seeds`, including the
    /// seeds themselves: exactly the rules that become unreachable when the
    /// seeds are removed.
    pub fn descendants(
        &self,
        seeds: impl IntoIterator<Item = u32>,
    ) -> Result<BTreeSet<u32>, ModelError> {
        let mut closed = BTreeSet::new();
        let mut queue: Vec<u32> = Vec::new();
        for seed in seeds {
            if seed as usize >= self.rules.len() {
                return Err(ModelError::SeedOutOfRange(seed));
            }
            if closed.insert(seed) {
                queue.push(seed);
            }
        }
        while let Some(rank) = queue.pop() {
            for &child in self.children_of(rank) {
                if closed.insert(child) {
                    queue.push(child);
                }
            }
        }
        Ok(closed)
    }
}

/// A complete tokenizer definition: vocabulary, merge graph, and the
/// pretokenizer configuration the files were written for.
#[derive(Debug, Clone)]
pub struct TokenizerModel {
    vocabulary: Vocabulary,
    merges: MergeGraph,
    pretoken: PretokenConfig,
    /// Full source document of a loaded tokenizer.json; keys we do not own
    /// are preserved through save for round-tripping.
    extra: Option<Value>,
    warnings: Vec<LoadWarning>,
    trie: OnceLock<VocabTrie>,
    merge_index: OnceLock<MergeIndex>,
    unreachable: OnceLock<HashSet<TokenId>>,
}

impl PartialEq for TokenizerModel {
    fn eq(&self, other: &Self) -> bool {
        self.vocabulary == other.vocabulary
            && self.merges == other.merges
            && self.pretoken == other.pretoken
    }
}

impl TokenizerModel {
    /// Build a model from explicit vocabulary entries and merge pairs.
    pub fn new(
        vocab: impl IntoIterator<Item = (String, u32)>,
        merges: impl IntoIterator<Item = (String, String)>,
        pretoken: PretokenConfig,
    ) -> Result<Self, ModelError> {
        let vocabulary = Vocabulary::from_entries(vocab, &HashSet::new())?;
        Self::assemble(vocabulary, merges.into_iter().collect(), pretoken, None)
    }

    fn assemble(
        vocabulary: Vocabulary,
        pairs: Vec<(String, String)>,
        pretoken: PretokenConfig,
        extra: Option<Value>,
    ) -> Result<Self, ModelError> {
        let merges = MergeGraph::build(pairs);
        for rule in merges.rules() {
            for operand in [&rule.left, &rule.right] {
                if vocabulary.id_of(operand).is_none() {
                    return Err(ModelError::UnknownOperand {
                        rank: rule.rank,
                        token: operand.clone(),
                    });
                }
            }
            if vocabulary.id_of(&rule.result).is_none() {
                return Err(ModelError::UnknownResult {
                    rank: rule.rank,
                    token: rule.result.clone(),
                });
            }
        }
        let warnings = collect_warnings(&vocabulary, &merges, &pretoken);
        Ok(TokenizerModel {
            vocabulary,
            merges,
            pretoken,
            extra,
            warnings,
            trie: OnceLock::new(),
            merge_index: OnceLock::new(),
            unreachable: OnceLock::new(),
        })
    }

    /// Same vocabulary and configuration, different merge list. Used by the
    /// corruption procedures.
    pub(crate) fn with_merges(&self, pairs: Vec<(String, String)>) -> Result<Self, ModelError> {
        Self::assemble(
            self.vocabulary.clone(),
            pairs,
            self.pretoken.clone(),
            self.extra.clone(),
        )
    }

    /// Same model under a different pretokenizer configuration, e.g. a
    /// pattern override from the command line.
    pub fn with_pretoken_config(&self, pretoken: PretokenConfig) -> Result<Self, ModelError> {
        let pairs = self
            .merges
            .rules()
            .iter()
            .map(|r| (r.left.clone(), r.right.clone()))
            .collect();
        Self::assemble(self.vocabulary.clone(), pairs, pretoken, self.extra.clone())
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn merges(&self) -> &MergeGraph {
        &self.merges
    }

    pub fn pretoken_config(&self) -> &PretokenConfig {
        &self.pretoken
    }

    pub fn warnings(&self) -> &[LoadWarning] {
        &self.warnings
    }

    /// Whether merge-based encoding can never produce `id`; such tokens stay
    /// usable by vocabulary-only encoders.
    pub fn is_merge_unreachable(&self, id: TokenId) -> bool {
        self.unreachable
            .get_or_init(|| self.merge_unreachable().into_iter().collect())
            .contains(&id)
    }

    /// Tokens that no merge rule produces and that are not single-character
    /// alphabet symbols. Merge-based encoding never reaches them (they do not
    /// take part in its whole-pretoken match); vocabulary-only encoders use
    /// them freely.
    pub fn merge_unreachable(&self) -> BTreeSet<TokenId> {
        let produced: HashSet<&str> = self
            .merges
            .rules()
            .iter()
            .map(|r| r.result.as_str())
            .collect();
        let mut out = BTreeSet::new();
        for (token, id) in self.vocabulary.iter() {
            if token.chars().nth(1).is_some() && !produced.contains(token) {
                out.insert(id);
            }
        }
        out
    }

    /// Drop merge-unreachable tokens from the vocabulary. Special tokens and
    /// rule operands are kept so the model stays valid. Returns the new model
    /// and the removed token strings in id order.
    pub fn prune_merge_unreachable(&self) -> (TokenizerModel, Vec<String>) {
        let mut keep: HashSet<TokenId> = HashSet::new();
        for rule in self.merges.rules() {
            for part in [&rule.left, &rule.right, &rule.result] {
                if let Some(id) = self.vocabulary.id_of(part) {
                    keep.insert(id);
                }
            }
        }
        let mut removed = Vec::new();
        let mut entries = Vec::new();
        let mut special_names = HashSet::new();
        for (token, id) in self.vocabulary.iter_by_id() {
            let unreachable = token.chars().nth(1).is_some()
                && !keep.contains(&id)
                && !self.vocabulary.is_special(id);
            if unreachable {
                removed.push(token.to_string());
            } else {
                if self.vocabulary.is_special(id) {
                    special_names.insert(token.to_string());
                }
                entries.push((token.to_string(), id.0));
            }
        }
        let vocabulary = Vocabulary::from_entries(entries, &special_names)
            .expect("pruning cannot introduce duplicates");
        let pairs = self
            .merges
            .rules()
            .iter()
            .map(|r| (r.left.clone(), r.right.clone()))
            .collect();
        let model =
            TokenizerModel::assemble(vocabulary, pairs, self.pretoken.clone(), self.extra.clone())
                .expect("pruned model keeps every referenced token");
        (model, removed)
    }

    /// Prefix trie over the non-special vocabulary, built on first use.
    pub fn vocab_trie(&self) -> &VocabTrie {
        self.trie.get_or_init(|| VocabTrie::from_model(self))
    }

    /// Merge lookup by operand token ids, built on first use.
    pub(crate) fn merge_index(&self) -> &MergeIndex {
        self.merge_index.get_or_init(|| {
            let mut map = MergeIndex::new();
            for rule in self.merges.rules() {
                let (Some(l), Some(r), Some(res)) = (
                    self.vocabulary.id_of(&rule.left),
                    self.vocabulary.id_of(&rule.right),
                    self.vocabulary.id_of(&rule.result),
                ) else {
                    continue; // validated at construction
                };
                map.entry((l, r)).or_default().push((rule.rank, res));
            }
            map
        })
    }

    /// Load a tokenizer.json document. Reads `model.vocab`, `model.merges`,
    /// `added_tokens`, and the pre-tokenizer configuration; every other key
    /// is preserved opaquely for round-tripping.
    pub fn load_tokenizer_json(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let text = fs::read_to_string(path)?;
        Self::from_tokenizer_json_str(&text)
    }

    pub fn from_tokenizer_json_str(text: &str) -> Result<Self, ModelError> {
        let doc: Value = serde_json::from_str(text)?;
        let model = doc
            .get("model")
            .ok_or(ModelError::MissingSection("model"))?;
        if let Some(kind) = model.get("type").and_then(Value::as_str) {
            if kind != "BPE" {
                return Err(ModelError::UnsupportedModelType(kind.to_string()));
            }
        }
        let vocab_obj = model
            .get("vocab")
            .and_then(Value::as_object)
            .ok_or(ModelError::MissingSection("model.vocab"))?;
        let mut entries: Vec<(String, u32)> = Vec::with_capacity(vocab_obj.len());
        for (token, id) in vocab_obj {
            let id = id.as_u64().ok_or_else(|| ModelError::BadVocabEntry {
                token: token.clone(),
            })?;
            entries.push((token.clone(), id as u32));
        }
        let merges_arr = model
            .get("merges")
            .and_then(Value::as_array)
            .ok_or(ModelError::MissingSection("model.merges"))?;
        let mut pairs = Vec::with_capacity(merges_arr.len());
        for (index, entry) in merges_arr.iter().enumerate() {
            pairs.push(parse_merge_entry(entry).ok_or(ModelError::BadMergeEntry { index })?);
        }
        let mut special_names = HashSet::new();
        if let Some(added) = doc.get("added_tokens").and_then(Value::as_array) {
            for tok in added {
                let (Some(content), Some(id)) = (
                    tok.get("content").and_then(Value::as_str),
                    tok.get("id").and_then(Value::as_u64),
                ) else {
                    continue;
                };
                match entries.iter().find(|(t, _)| t.as_str() == content) {
                    Some((_, in_vocab)) if *in_vocab as u64 != id => {
                        return Err(ModelError::AddedTokenMismatch {
                            token: content.to_string(),
                            listed: id as u32,
                            in_vocab: *in_vocab,
                        });
                    }
                    Some(_) => {}
                    None => entries.push((content.to_string(), id as u32)),
                }
                special_names.insert(content.to_string());
            }
        }
        let pretoken = parse_pretoken_config(&doc, vocab_obj);
        let vocabulary = Vocabulary::from_entries(entries, &special_names)?;
        Self::assemble(vocabulary, pairs, pretoken, Some(doc))
    }

    /// Load the legacy two-file format: a vocab.json object plus a merges.txt
    /// with one "left right" pair per line (optional leading `#` comment).
    pub fn load_vocab_and_merges(
        vocab_path: impl AsRef<Path>,
        merges_path: impl AsRef<Path>,
    ) -> Result<Self, ModelError> {
        let vocab_text = fs::read_to_string(&vocab_path)?;
        let vocab_doc: Value = serde_json::from_str(&vocab_text)?;
        let vocab_obj = vocab_doc
            .as_object()
            .ok_or(ModelError::MissingSection("vocab object"))?;
        let mut entries = Vec::with_capacity(vocab_obj.len());
        for (token, id) in vocab_obj {
            let id = id.as_u64().ok_or_else(|| ModelError::BadVocabEntry {
                token: token.clone(),
            })?;
            entries.push((token.clone(), id as u32));
        }

        let merges_path = merges_path.as_ref();
        let merges_text = fs::read_to_string(merges_path)?;
        let display_path = merges_path.display().to_string();
        let mut pairs = Vec::new();
        for (lineno, line) in merges_text.lines().enumerate() {
            if line.is_empty() || (lineno == 0 && line.starts_with('#')) {
                continue;
            }
            let mut fields = line.split_whitespace();
            match (fields.next(), fields.next(), fields.next()) {
                (Some(left), Some(right), None) => {
                    pairs.push((left.to_string(), right.to_string()))
                }
                _ => {
                    return Err(ModelError::BadMergeLine {
                        path: display_path,
                        line: lineno + 1,
                        content: line.to_string(),
                    })
                }
            }
        }
        let vocabulary = Vocabulary::from_entries(entries, &HashSet::new())?;
        Self::assemble(vocabulary, pairs, PretokenConfig::default(), None)
    }

    /// Write the model as a tokenizer.json document. Loading the written file
    /// reproduces the model structurally.
    pub fn save_tokenizer(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let text = self.to_tokenizer_json_string()?;
        fs::write(path, text)?;
        Ok(())
    }

    pub fn to_tokenizer_json_string(&self) -> Result<String, ModelError> {
        let mut doc = match &self.extra {
            Some(doc) => doc.clone(),
            None => json!({
                "version": "1.0",
                "pre_tokenizer": synth_pre_tokenizer(&self.pretoken),
                "model": { "type": "BPE" },
            }),
        };
        let mut vocab = Map::new();
        for (token, id) in self.vocabulary.iter_by_id() {
            vocab.insert(token.to_string(), json!(id.0));
        }
        let merges: Vec<Value> = self
            .merges
            .rules()
            .iter()
            .map(|r| {
                if r.left.contains(' ') || r.right.contains(' ') {
                    json!([r.left, r.right])
                } else {
                    Value::String(format!("{} {}", r.left, r.right))
                }
            })
            .collect();
        let model = doc
            .get_mut("model")
            .and_then(Value::as_object_mut)
            .ok_or(ModelError::MissingSection("model"))?;
        model.insert("type".into(), json!("BPE"));
        model.insert("vocab".into(), Value::Object(vocab));
        model.insert("merges".into(), Value::Array(merges));
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        Ok(text)
    }
}

fn parse_merge_entry(entry: &Value) -> Option<(String, String)> {
    match entry {
        Value::String(s) => {
            let (left, right) = s.split_once(' ')?;
            if left.is_empty() || right.is_empty() || right.contains(' ') {
                return None;
            }
            Some((left.to_string(), right.to_string()))
        }
        Value::Array(parts) => match parts.as_slice() {
            [Value::String(left), Value::String(right)] => Some((left.clone(), right.clone())),
            _ => None,
        },
        _ => None,
    }
}

// Recognize the Split / ByteLevel pre-tokenizer shapes used by BPE
// tokenizer.json files. Absent a pre_tokenizer section, byte remapping is
// inferred from the vocabulary (a byte-level vocab contains the remapped
// space "Ġ" as a single-character token).
fn parse_pretoken_config(doc: &Value, vocab: &Map<String, Value>) -> PretokenConfig {
    let mut pattern = None;
    let mut saw_byte_level = false;
    fn walk(node: &Value, pattern: &mut Option<String>, saw_byte_level: &mut bool) {
        match node {
            Value::Object(obj) => {
                match obj.get("type").and_then(Value::as_str) {
                    Some("ByteLevel") => *saw_byte_level = true,
                    Some("Split") if pattern.is_none() => {
                        if let Some(re) = obj
                            .get("pattern")
                            .and_then(|p| p.get("Regex"))
                            .and_then(Value::as_str)
                        {
                            *pattern = Some(re.to_string());
                        }
                    }
                    _ => {}
                }
                if let Some(inner) = obj.get("pretokenizers") {
                    walk(inner, pattern, saw_byte_level);
                }
            }
            Value::Array(items) => {
                for item in items {
                    walk(item, pattern, saw_byte_level);
                }
            }
            _ => {}
        }
    }
    let byte_remap = match doc.get("pre_tokenizer") {
        Some(section) if !section.is_null() => {
            walk(section, &mut pattern, &mut saw_byte_level);
            saw_byte_level
        }
        _ => vocab.contains_key("\u{120}"),
    };
    PretokenConfig {
        pattern: pattern.unwrap_or_else(|| DEFAULT_PATTERN.to_string()),
        byte_remap,
    }
}

fn synth_pre_tokenizer(config: &PretokenConfig) -> Value {
    let split = json!({
        "type": "Split",
        "pattern": { "Regex": config.pattern },
        "behavior": "Isolated",
        "invert": false,
    });
    if config.byte_remap {
        json!({
            "type": "Sequence",
            "pretokenizers": [
                split,
                { "type": "ByteLevel", "add_prefix_space": false, "trim_offsets": true, "use_regex": false },
            ],
        })
    } else {
        split
    }
}

fn collect_warnings(
    vocabulary: &Vocabulary,
    merges: &MergeGraph,
    pretoken: &PretokenConfig,
) -> Vec<LoadWarning> {
    let mut warnings = Vec::new();
    let len = vocabulary.len();
    if let Some(max_id) = vocabulary.max_id() {
        if max_id as usize != len - 1 {
            warnings.push(LoadWarning::NonContiguousIds { len, max_id });
        }
    }
    if pretoken.byte_remap {
        let missing = bytes::alphabet()
            .filter(|c| !vocabulary.alphabet().contains(c))
            .count();
        if missing > 0 {
            warnings.push(LoadWarning::MissingByteSymbols { missing });
        }
    }
    let produced: HashSet<&str> = merges.rules().iter().map(|r| r.result.as_str()).collect();
    let unreachable = vocabulary
        .iter()
        .filter(|(t, _)| t.chars().nth(1).is_some() && !produced.contains(*t))
        .count();
    if unreachable > 0 {
        warnings.push(LoadWarning::MergeUnreachableTokens { count: unreachable });
    }
    // First rank producing each string, for the hierarchy check.
    let mut first_producer: HashMap<&str, u32> = HashMap::new();
    for rule in merges.rules() {
        first_producer
            .entry(rule.result.as_str())
            .or_insert(rule.rank);
    }
    for rule in merges.rules() {
        for operand in [rule.left.as_str(), rule.right.as_str()] {
            if operand.chars().nth(1).is_none() {
                continue; // alphabet symbol
            }
            let ok = first_producer.get(operand).is_some_and(|&p| p < rule.rank);
            if !ok {
                warnings.push(LoadWarning::HierarchyViolation {
                    rank: rule.rank,
                    operand: operand.to_string(),
                });
            }
        }
    }
    warnings
}
