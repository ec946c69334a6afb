//! File-format tests over the checked-in fixture files.

use std::path::{Path, PathBuf};

use bpekit::encoders::{decode, encode_text, Algorithm};
use bpekit::model::TokenizerModel;

fn testdata(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../testdata")
        .join(name)
}

#[test]
fn fixture_files_load_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in [
        "fixture_standard.tokenizer.json",
        "fixture_vocab_only.tokenizer.json",
        "fixture_shuffle.tokenizer.json",
    ] {
        let model = TokenizerModel::load_tokenizer_json(testdata(name)).unwrap();
        assert!(
            !model.pretoken_config().byte_remap,
            "{name} is a plain fixture"
        );
        let copy = dir.path().join(name);
        model.save_tokenizer(&copy).unwrap();
        let reloaded = TokenizerModel::load_tokenizer_json(&copy).unwrap();
        assert_eq!(model, reloaded, "{name}");
    }
}

#[test]
fn legacy_pair_matches_equivalent_tokenizer_json() {
    let model = TokenizerModel::load_vocab_and_merges(
        testdata("legacy/vocab.json"),
        testdata("legacy/merges.txt"),
    )
    .unwrap();
    assert_eq!(model.merges().len(), 3);
    // Legacy loads default to byte-level, and "ants" is ASCII, so encoding
    // behaves like the in-memory chain model.
    let enc = encode_text("ants", &model, Algorithm::Standard).unwrap();
    assert_eq!(enc.len(), 1);
    assert_eq!(decode(enc.ids(), &model).unwrap(), "ants");

    // Save converts the pair to tokenizer.json; structure survives.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("converted.tokenizer.json");
    model.save_tokenizer(&path).unwrap();
    let converted = TokenizerModel::load_tokenizer_json(&path).unwrap();
    assert_eq!(model, converted);
}

#[test]
fn corrupted_model_survives_the_file_format() {
    let model =
        TokenizerModel::load_tokenizer_json(testdata("fixture_standard.tokenizer.json")).unwrap();
    let (truncated, _) = bpekit::corruption::truncate(&model, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("truncated.tokenizer.json");
    truncated.save_tokenizer(&path).unwrap();
    let reloaded = TokenizerModel::load_tokenizer_json(&path).unwrap();
    assert_eq!(truncated, reloaded);
    assert_eq!(reloaded.merges().len(), 3);
}
