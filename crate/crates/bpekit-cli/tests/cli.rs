//! End-to-end tests of the `bpekit` binary: flags, formats, exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bpekit::model::TokenizerModel;
use bpekit::pretokenizer::PretokenConfig;

fn testdata(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../testdata")
        .join(name)
}

fn bpekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bpekit"))
        .args(args)
        .output()
        .expect("spawning bpekit")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_lines(path: &Path, lines: &[&str]) {
    std::fs::write(path, lines.join("\n")).unwrap();
}

#[test]
fn encode_one_line_file_yields_one_json_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.txt");
    write_lines(&input, &["quantize"]);
    let out = bpekit(&[
        "encode",
        "--tokenizer",
        testdata("fixture_standard.tokenizer.json")
            .to_str()
            .unwrap(),
        "--algo",
        "standard",
        "--input",
        input.to_str().unwrap(),
    ]);
    let stdout = stdout_of(&out);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 1);
    let doc: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(doc["n_tokens"], 3);
    assert_eq!(doc["ids"].as_array().unwrap().len(), 3);
}

#[test]
fn shuffled_encoding_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.txt");
    write_lines(&input, &["quantize quantize", "quantize"]);
    let args = [
        "encode",
        "--tokenizer",
        "", // placeholder, replaced below
        "--algo",
        "shuffled",
        "--seed",
        "7",
        "--input",
        "",
    ];
    let tokenizer = testdata("fixture_shuffle.tokenizer.json");
    let run = || {
        let mut argv: Vec<&str> = args.to_vec();
        argv[2] = tokenizer.to_str().unwrap();
        argv[8] = input.to_str().unwrap();
        stdout_of(&bpekit(&argv))
    };
    let first = run();
    let second = run();
    assert_eq!(first, second, "same seed, same bytes");
}

#[test]
fn shuffled_without_seed_is_a_usage_error() {
    let out = bpekit(&[
        "encode",
        "--tokenizer",
        testdata("fixture_shuffle.tokenizer.json").to_str().unwrap(),
        "--algo",
        "shuffled",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn standard_and_max_compression_disagree_on_quantize() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.txt");
    write_lines(&input, &["quantize"]);
    // Standard replays merges: qu an tize. Maximal compression over the
    // vocabulary-only fixture: quant ize.
    let standard = stdout_of(&bpekit(&[
        "encode",
        "--tokenizer",
        testdata("fixture_standard.tokenizer.json")
            .to_str()
            .unwrap(),
        "--algo",
        "standard",
        "--input",
        input.to_str().unwrap(),
    ]));
    let maxcomp = stdout_of(&bpekit(&[
        "encode",
        "--tokenizer",
        testdata("fixture_vocab_only.tokenizer.json").to_str().unwrap(),
        "--algo",
        "maxcomp",
        "--input",
        input.to_str().unwrap(),
    ]));
    let decode = |line: &str, path: PathBuf| -> String {
        let doc: serde_json::Value = serde_json::from_str(line).unwrap();
        let model = TokenizerModel::load_tokenizer_json(path).unwrap();
        let ids: Vec<bpekit::TokenId> = doc["ids"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| bpekit::TokenId(v.as_u64().unwrap() as u32))
            .collect();
        ids.iter()
            .map(|&id| model.vocabulary().token_of(id).unwrap())
            .collect::<Vec<_>>()
            .join(" ")
    };
    assert_eq!(
        decode(
            standard.lines().next().unwrap(),
            testdata("fixture_standard.tokenizer.json")
        ),
        "qu an tize"
    );
    assert_eq!(
        decode(
            maxcomp.lines().next().unwrap(),
            testdata("fixture_vocab_only.tokenizer.json")
        ),
        "quant ize"
    );
}

#[test]
fn unencodable_input_names_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.txt");
    write_lines(&input, &["quantize", "hello"]);
    let out = bpekit(&[
        "encode",
        "--tokenizer",
        testdata("fixture_standard.tokenizer.json")
            .to_str()
            .unwrap(),
        "--algo",
        "standard",
        "--input",
        input.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(":2"), "line number in {stderr:?}");
    assert!(stderr.contains("unencodable symbol"), "{stderr:?}");
}

#[test]
fn truncate_zero_round_trips_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let output = dir.path().join("out.tokenizer.json");
    let report = dir.path().join("report.json");
    let out = bpekit(&[
        "corrupt",
        "--tokenizer",
        testdata("fixture_standard.tokenizer.json")
            .to_str()
            .unwrap(),
        "--truncate",
        "0",
        "--output",
        output.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let original =
        TokenizerModel::load_tokenizer_json(testdata("fixture_standard.tokenizer.json")).unwrap();
    let corrupted = TokenizerModel::load_tokenizer_json(&output).unwrap();
    assert_eq!(original, corrupted);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report["deleted_rule_count"], 0);
    assert_eq!(report["surviving_merge_count"], 5);
}

fn chain_tokenizer(dir: &Path) -> PathBuf {
    let vocab = ["a", "n", "t", "s", "an", "ant", "ants"]
        .iter()
        .enumerate()
        .map(|(i, t)| (t.to_string(), i as u32));
    let merges = [("a", "n"), ("an", "t"), ("ant", "s")]
        .iter()
        .map(|(l, r)| (l.to_string(), r.to_string()));
    let model = TokenizerModel::new(vocab, merges, PretokenConfig::plain()).unwrap();
    let path = dir.join("chain.tokenizer.json");
    model.save_tokenizer(&path).unwrap();
    path
}

#[test]
fn delete_on_chain_reports_closure() {
    let dir = tempfile::tempdir().unwrap();
    let tokenizer = chain_tokenizer(dir.path());
    let output = dir.path().join("out.tokenizer.json");
    let out = bpekit(&[
        "corrupt",
        "--tokenizer",
        tokenizer.to_str().unwrap(),
        "--delete",
        "--seed",
        "1",
        "--initial",
        "1",
        "--output",
        output.to_str().unwrap(),
    ]);
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert!(report["deleted_rule_count"].as_u64().unwrap() >= 1);
    assert_eq!(report["spec"]["kind"], "delete");
}

#[test]
fn increasing_initial_sets_nest_under_one_seed() {
    let dir = tempfile::tempdir().unwrap();
    let tokenizer = chain_tokenizer(dir.path());
    let mut survivors_by_k = Vec::new();
    for k in 0..=3usize {
        let output = dir.path().join(format!("out{k}.tokenizer.json"));
        let out = bpekit(&[
            "corrupt",
            "--tokenizer",
            tokenizer.to_str().unwrap(),
            "--delete",
            "--seed",
            "5",
            "--initial",
            &k.to_string(),
            "--output",
            output.to_str().unwrap(),
        ]);
        stdout_of(&out);
        let model = TokenizerModel::load_tokenizer_json(&output).unwrap();
        let survivors: Vec<String> = model
            .merges()
            .rules()
            .iter()
            .map(|r| r.result.clone())
            .collect();
        survivors_by_k.push(survivors);
    }
    for window in survivors_by_k.windows(2) {
        for rule in &window[1] {
            assert!(window[0].contains(rule), "deleted sets must nest");
        }
    }
}

#[test]
fn shuffle_corruption_keeps_model_and_reports_spec() {
    let dir = tempfile::tempdir().unwrap();
    let tokenizer = chain_tokenizer(dir.path());
    let output = dir.path().join("out.tokenizer.json");
    let out = bpekit(&[
        "corrupt",
        "--tokenizer",
        tokenizer.to_str().unwrap(),
        "--shuffle",
        "--seed",
        "3",
        "--output",
        output.to_str().unwrap(),
    ]);
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["spec"]["kind"], "shuffle");
    assert_eq!(report["deleted_rule_count"], 0);
    let original = TokenizerModel::load_tokenizer_json(&tokenizer).unwrap();
    let written = TokenizerModel::load_tokenizer_json(&output).unwrap();
    assert_eq!(original, written);
}

#[test]
fn spec_json_flag_and_out_of_range_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let tokenizer = chain_tokenizer(dir.path());
    let output = dir.path().join("out.tokenizer.json");
    let out = bpekit(&[
        "corrupt",
        "--tokenizer",
        tokenizer.to_str().unwrap(),
        "--spec",
        r#"{"kind":"truncate","last_n":1}"#,
        "--output",
        output.to_str().unwrap(),
    ]);
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["surviving_merge_count"], 2);

    // Out of range: spec error, exit 2.
    let out = bpekit(&[
        "corrupt",
        "--tokenizer",
        tokenizer.to_str().unwrap(),
        "--truncate",
        "99",
        "--output",
        output.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Malformed spec JSON: exit 2.
    let out = bpekit(&[
        "corrupt",
        "--tokenizer",
        tokenizer.to_str().unwrap(),
        "--spec",
        r#"{"kind":"implode"}"#,
        "--output",
        output.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn prune_vocab_drops_stranded_tokens() {
    let dir = tempfile::tempdir().unwrap();
    let tokenizer = chain_tokenizer(dir.path());
    let output = dir.path().join("out.tokenizer.json");
    let out = bpekit(&[
        "corrupt",
        "--tokenizer",
        tokenizer.to_str().unwrap(),
        "--truncate",
        "2",
        "--prune-vocab",
        "--output",
        output.to_str().unwrap(),
    ]);
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["pruned_vocab_count"], 2);
    let model = TokenizerModel::load_tokenizer_json(&output).unwrap();
    assert!(model.vocabulary().id_of("ant").is_none());
    assert!(model.vocabulary().id_of("ants").is_none());
    assert!(model.vocabulary().id_of("an").is_some());
}

#[test]
fn diff_self_is_zero_and_line_counts_match() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    write_lines(&corpus, &["quantize", "quantize quantize", "quantize"]);
    let out = bpekit(&[
        "diff",
        "--tokenizer-a",
        testdata("fixture_shuffle.tokenizer.json").to_str().unwrap(),
        "--tokenizer-b",
        testdata("fixture_shuffle.tokenizer.json").to_str().unwrap(),
        "--corpus",
        corpus.to_str().unwrap(),
    ]);
    let stdout = stdout_of(&out);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 4, "3 per-example lines + aggregate");
    let aggregate: serde_json::Value = serde_json::from_str(lines[3]).unwrap();
    assert_eq!(aggregate["aggregate"], true);
    assert_eq!(aggregate["jaccard_distance"], 0.0);
    assert_eq!(aggregate["levenshtein"], 0.0);
    assert_eq!(aggregate["normalized_edit"], 0.0);
}

#[test]
fn diff_char_level_differs_from_standard() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    write_lines(&corpus, &["quantize quantize"]);
    let out = bpekit(&[
        "diff",
        "--tokenizer-a",
        testdata("fixture_shuffle.tokenizer.json").to_str().unwrap(),
        "--tokenizer-b",
        testdata("fixture_shuffle.tokenizer.json").to_str().unwrap(),
        "--algo-b",
        "char",
        "--corpus",
        corpus.to_str().unwrap(),
    ]);
    let stdout = stdout_of(&out);
    let aggregate: serde_json::Value =
        serde_json::from_str(stdout.lines().last().unwrap()).unwrap();
    assert!(aggregate["normalized_edit"].as_f64().unwrap() > 0.0);
}

#[test]
fn diff_length_mismatch_is_a_spec_error() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    write_lines(&a, &[r#"{"ids":[1,2]}"#, r#"{"ids":[3]}"#]);
    write_lines(&b, &[r#"{"ids":[1,2]}"#]);
    let out = bpekit(&[
        "diff",
        "--a",
        a.to_str().unwrap(),
        "--b",
        b.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn diff_merges_perplexity_column() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let ppl = dir.path().join("ppl.txt");
    write_lines(&a, &[r#"{"ids":[1,2]}"#, r#"{"ids":[3]}"#]);
    write_lines(&ppl, &["12.5", "80.0"]);
    let out = bpekit(&[
        "diff",
        "--a",
        a.to_str().unwrap(),
        "--b",
        a.to_str().unwrap(),
        "--perplexity",
        ppl.to_str().unwrap(),
    ]);
    let stdout = stdout_of(&out);
    let lines: Vec<&str> = stdout.lines().collect();
    let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(first["perplexity"], 12.5);
    let aggregate: serde_json::Value = serde_json::from_str(lines[2]).unwrap();
    assert_eq!(aggregate["perplexity"], 46.25);
}

#[test]
fn train_then_encode_anan() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    let tokenizer = dir.path().join("trained.tokenizer.json");
    write_lines(&corpus, &["anan"]);
    let out = bpekit(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--merges",
        "1",
        "--output",
        tokenizer.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let encoded = stdout_of(&bpekit(&[
        "encode",
        "--tokenizer",
        tokenizer.to_str().unwrap(),
        "--algo",
        "standard",
        "--input",
        corpus.to_str().unwrap(),
    ]));
    let doc: serde_json::Value = serde_json::from_str(encoded.lines().next().unwrap()).unwrap();
    assert_eq!(doc["n_tokens"], 2, "anan -> an an");
}

#[test]
fn train_on_empty_corpus_is_a_spec_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    std::fs::write(&corpus, "").unwrap();
    let out = bpekit(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--merges",
        "5",
        "--output",
        dir.path().join("out.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn encode_pattern_override_changes_pretokens() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.txt");
    write_lines(&input, &["anan"]);
    let tokenizer = chain_tokenizer(dir.path());
    // Default pattern keeps "anan" whole; an every-character pattern forces
    // four single-symbol pretokens.
    let default_run = stdout_of(&bpekit(&[
        "encode",
        "--tokenizer",
        tokenizer.to_str().unwrap(),
        "--algo",
        "standard",
        "--input",
        input.to_str().unwrap(),
    ]));
    let split_run = stdout_of(&bpekit(&[
        "encode",
        "--tokenizer",
        tokenizer.to_str().unwrap(),
        "--algo",
        "standard",
        "--pattern",
        r"\p{Any}",
        "--input",
        input.to_str().unwrap(),
    ]));
    let tokens = |s: &str| -> u64 {
        serde_json::from_str::<serde_json::Value>(s.lines().next().unwrap()).unwrap()["n_tokens"]
            .as_u64()
            .unwrap()
    };
    assert_eq!(tokens(&default_run), 2); // an an
    assert_eq!(tokens(&split_run), 4); // a n a n
}

#[test]
fn tsv_encode_format() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.txt");
    write_lines(&input, &["quantize"]);
    let out = stdout_of(&bpekit(&[
        "encode",
        "--tokenizer",
        testdata("fixture_standard.tokenizer.json")
            .to_str()
            .unwrap(),
        "--algo",
        "standard",
        "--format",
        "tsv",
        "--input",
        input.to_str().unwrap(),
    ]));
    assert_eq!(out.trim(), "3\t13 9 12");
}
