//! Command-line front end: encode corpora under any algorithm, corrupt
//! tokenizers, train fixtures, and emit tokenization-diff reports.
//!
//! One document per input line. All randomness flows through explicit
//! `--seed` flags, so every command is deterministic given its arguments.
//! Exit codes: 0 ok, 1 data error, 2 usage or spec error.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bpekit::corruption::CorruptionSpec;
use bpekit::encoders::{encode_text, Algorithm, Encoding};
use bpekit::metrics::DiffReport;
use bpekit::model::{TokenId, TokenizerModel};
use bpekit::pretokenizer::PretokenConfig;
use bpekit::trainer::{train, TrainConfig, TrainError};

#[derive(Parser)]
#[command(
    name = "bpekit",
    version,
    about = "BPE inference, corruption, and diff toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a corpus (one document per line) to JSON-lines of token ids.
    Encode(EncodeArgs),
    /// Write a corrupted copy of a tokenizer plus a corruption report.
    Corrupt(CorruptArgs),
    /// Compare two encodings of the same corpus.
    Diff(DiffArgs),
    /// Train a reference BPE tokenizer from a corpus file.
    Train(TrainArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Standard,
    L2r,
    Maxcomp,
    Char,
    Shuffled,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Jsonl,
    Tsv,
}

#[derive(Args)]
struct EncodeArgs {
    /// Tokenizer file (tokenizer.json format).
    #[arg(long)]
    tokenizer: PathBuf,
    /// Encoding algorithm.
    #[arg(long, value_enum)]
    algo: AlgoArg,
    /// Shuffle seed; required for --algo shuffled.
    #[arg(long)]
    seed: Option<u64>,
    /// Input file, or "-" for standard input.
    #[arg(long, default_value = "-")]
    input: String,
    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: Format,
    /// Override the pretokenizer split pattern stored in the model.
    #[arg(long)]
    pattern: Option<String>,
}

#[derive(Args)]
struct CorruptArgs {
    #[arg(long)]
    tokenizer: PathBuf,
    /// Where to write the corrupted tokenizer file.
    #[arg(long)]
    output: PathBuf,
    /// Where to write the corruption report JSON; standard output when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Delete the last N merges.
    #[arg(long, value_name = "N")]
    truncate: Option<usize>,
    /// Randomly delete merges (with descendant closure); needs --seed and --initial.
    #[arg(long)]
    delete: bool,
    /// Declare a merge-shuffle tokenizer; needs --seed. The stored model is
    /// unchanged (the permutation applies at encode time via
    /// `encode --algo shuffled`).
    #[arg(long)]
    shuffle: bool,
    /// Full corruption spec as inline JSON, instead of the flags above.
    #[arg(long, value_name = "JSON")]
    spec: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Initial deletion set size for --delete.
    #[arg(long, value_name = "K")]
    initial: Option<usize>,
    /// Also drop merge-unreachable vocabulary entries from the output model.
    #[arg(long)]
    prune_vocab: bool,
}

#[derive(Args)]
struct DiffArgs {
    /// Reference encodings (JSON-lines from `encode`).
    #[arg(long, value_name = "FILE")]
    a: Option<PathBuf>,
    /// Candidate encodings (JSON-lines from `encode`).
    #[arg(long, value_name = "FILE")]
    b: Option<PathBuf>,
    /// Encode --corpus with this tokenizer as side A instead of --a.
    #[arg(long)]
    tokenizer_a: Option<PathBuf>,
    #[arg(long)]
    tokenizer_b: Option<PathBuf>,
    /// Corpus to encode when tokenizers are given.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "standard")]
    algo_a: AlgoArg,
    #[arg(long, value_enum, default_value = "standard")]
    algo_b: AlgoArg,
    #[arg(long)]
    seed_a: Option<u64>,
    #[arg(long)]
    seed_b: Option<u64>,
    /// Externally computed per-document perplexities (one number per line),
    /// merged into the report.
    #[arg(long)]
    perplexity: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: Format,
}

#[derive(Args)]
struct TrainArgs {
    /// UTF-8 corpus, one document per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Target merge count.
    #[arg(long, value_name = "N")]
    merges: usize,
    /// Where to write the trained tokenizer file.
    #[arg(long)]
    output: PathBuf,
    /// Pretokenizer split pattern (defaults to the GPT-2 pattern).
    #[arg(long)]
    pattern: Option<String>,
}

// 1 = data error, 2 = usage or spec error.
struct CliFailure {
    code: u8,
    error: anyhow::Error,
}

fn data_err(error: anyhow::Error) -> CliFailure {
    CliFailure { code: 1, error }
}

fn usage_err(error: anyhow::Error) -> CliFailure {
    CliFailure { code: 2, error }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Encode(args) => cmd_encode(args),
        Command::Corrupt(args) => cmd_corrupt(args),
        Command::Diff(args) => cmd_diff(args),
        Command::Train(args) => cmd_train(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}

fn load_model(path: &Path, pattern: Option<&str>) -> Result<TokenizerModel, CliFailure> {
    let model = TokenizerModel::load_tokenizer_json(path)
        .with_context(|| format!("loading tokenizer {}", path.display()))
        .map_err(data_err)?;
    for warning in model.warnings() {
        eprintln!("warning: {}: {warning}", path.display());
    }
    match pattern {
        Some(pattern) => {
            let config = PretokenConfig {
                pattern: pattern.to_string(),
                byte_remap: model.pretoken_config().byte_remap,
            };
            model
                .with_pretoken_config(config)
                .context("applying --pattern")
                .map_err(usage_err)
        }
        None => Ok(model),
    }
}

fn algorithm_for(algo: AlgoArg, seed: Option<u64>, flag: &str) -> Result<Algorithm, CliFailure> {
    match (algo, seed) {
        (AlgoArg::Standard, _) => Ok(Algorithm::Standard),
        (AlgoArg::L2r, _) => Ok(Algorithm::LeftToRight),
        (AlgoArg::Maxcomp, _) => Ok(Algorithm::MaxCompression),
        (AlgoArg::Char, _) => Ok(Algorithm::CharLevel),
        (AlgoArg::Shuffled, Some(seed)) => Ok(Algorithm::Shuffled { seed }),
        (AlgoArg::Shuffled, None) => Err(usage_err(anyhow!(
            "--algo shuffled requires an explicit {flag} (no implicit entropy)"
        ))),
    }
}

fn read_documents(input: &str) -> Result<Vec<String>, CliFailure> {
    let mut text = String::new();
    if input == "-" {
        io::stdin()
            .read_to_string(&mut text)
            .context("reading standard input")
            .map_err(data_err)?;
    } else {
        text = fs::read_to_string(input)
            .with_context(|| format!("reading {input}"))
            .map_err(data_err)?;
    }
    Ok(text.lines().map(str::to_string).collect())
}

fn output_writer(path: Option<&Path>) -> Result<Box<dyn Write>, CliFailure> {
    match path {
        Some(path) => {
            let file = File::create(path)
                .with_context(|| format!("creating {}", path.display()))
                .map_err(data_err)?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn cmd_encode(args: EncodeArgs) -> Result<(), CliFailure> {
    let model = load_model(&args.tokenizer, args.pattern.as_deref())?;
    let algorithm = algorithm_for(args.algo, args.seed, "--seed")?;
    let documents = read_documents(&args.input)?;
    let mut out = output_writer(args.output.as_deref())?;
    for (lineno, doc) in documents.iter().enumerate() {
        let encoding = encode_text(doc, &model, algorithm)
            .with_context(|| format!("{}:{}", args.input, lineno + 1))
            .map_err(data_err)?;
        write_encoding(&mut out, &encoding, args.format).map_err(|e| data_err(e.into()))?;
    }
    out.flush().map_err(|e| data_err(e.into()))?;
    Ok(())
}

fn write_encoding(out: &mut dyn Write, encoding: &Encoding, format: Format) -> io::Result<()> {
    match format {
        Format::Jsonl => {
            let line = serde_json::json!({
                "ids": encoding.ids(),
                "n_tokens": encoding.len(),
            });
            writeln!(out, "{line}")
        }
        Format::Tsv => {
            let ids: Vec<String> = encoding.ids().iter().map(|id| id.to_string()).collect();
            writeln!(out, "{}\t{}", encoding.len(), ids.join(" "))
        }
    }
}

fn corruption_spec(args: &CorruptArgs) -> Result<CorruptionSpec, CliFailure> {
    let chosen = usize::from(args.truncate.is_some())
        + usize::from(args.delete)
        + usize::from(args.shuffle)
        + usize::from(args.spec.is_some());
    if chosen != 1 {
        return Err(usage_err(anyhow!(
            "choose exactly one of --truncate, --delete, --shuffle, or --spec"
        )));
    }
    if let Some(json) = &args.spec {
        return serde_json::from_str(json)
            .context("parsing --spec")
            .map_err(usage_err);
    }
    if let Some(last_n) = args.truncate {
        return Ok(CorruptionSpec::Truncate { last_n });
    }
    let seed = args
        .seed
        .ok_or_else(|| usage_err(anyhow!("this corruption requires an explicit --seed")))?;
    if args.delete {
        let initial_set_size = args
            .initial
            .ok_or_else(|| usage_err(anyhow!("--delete requires --initial K")))?;
        Ok(CorruptionSpec::Delete {
            seed,
            initial_set_size,
        })
    } else {
        Ok(CorruptionSpec::Shuffle { seed })
    }
}

fn cmd_corrupt(args: CorruptArgs) -> Result<(), CliFailure> {
    let spec = corruption_spec(&args)?;
    let model = load_model(&args.tokenizer, None)?;
    let (corrupted, report) = spec
        .apply(&model)
        .context("invalid corruption spec")
        .map_err(usage_err)?;
    let (corrupted, pruned) = if args.prune_vocab {
        let (pruned_model, removed) = corrupted.prune_merge_unreachable();
        (pruned_model, Some(removed))
    } else {
        (corrupted, None)
    };
    corrupted
        .save_tokenizer(&args.output)
        .with_context(|| format!("writing {}", args.output.display()))
        .map_err(data_err)?;
    let mut report_json = serde_json::json!({
        "spec": spec,
        "deleted_rule_count": report.deleted_rule_count,
        "deleted_token_strings": report.deleted_token_strings,
        "surviving_merge_count": report.surviving_merge_count,
    });
    if let Some(removed) = pruned {
        report_json["pruned_vocab_count"] = serde_json::json!(removed.len());
        report_json["pruned_vocab"] = serde_json::json!(removed);
    }
    let mut out = output_writer(args.report.as_deref())?;
    writeln!(out, "{report_json}").map_err(|e| data_err(e.into()))?;
    out.flush().map_err(|e| data_err(e.into()))?;
    Ok(())
}

fn read_encoding_file(path: &Path) -> Result<Vec<Encoding>, CliFailure> {
    let file = File::open(path)
        .with_context(|| format!("opening {}", path.display()))
        .map_err(data_err)?;
    let mut encodings = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| data_err(e.into()))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}", path.display(), lineno + 1))
            .map_err(data_err)?;
        let ids = value
            .get("ids")
            .and_then(|v| v.as_array())
            .ok_or_else(|| {
                data_err(anyhow!(
                    "{}:{}: missing \"ids\" array",
                    path.display(),
                    lineno + 1
                ))
            })?
            .iter()
            .map(|v| v.as_u64().map(|id| TokenId(id as u32)))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| {
                data_err(anyhow!(
                    "{}:{}: non-integer token id",
                    path.display(),
                    lineno + 1
                ))
            })?;
        encodings.push(Encoding::from_ids(ids));
    }
    Ok(encodings)
}

fn cmd_diff(args: DiffArgs) -> Result<(), CliFailure> {
    let (side_a, side_b) = match (&args.a, &args.b, &args.tokenizer_a, &args.tokenizer_b) {
        (Some(a), Some(b), None, None) => (read_encoding_file(a)?, read_encoding_file(b)?),
        (None, None, Some(ta), Some(tb)) => {
            let corpus_path = args.corpus.as_ref().ok_or_else(|| {
                usage_err(anyhow!("--tokenizer-a/--tokenizer-b require --corpus"))
            })?;
            let documents = read_documents(&corpus_path.display().to_string())?;
            let model_a = load_model(ta, None)?;
            let model_b = load_model(tb, None)?;
            let algo_a = algorithm_for(args.algo_a, args.seed_a, "--seed-a")?;
            let algo_b = algorithm_for(args.algo_b, args.seed_b, "--seed-b")?;
            let encode_all = |model: &TokenizerModel, algo| -> Result<Vec<Encoding>, CliFailure> {
                documents
                    .iter()
                    .enumerate()
                    .map(|(lineno, doc)| {
                        encode_text(doc, model, algo)
                            .with_context(|| format!("{}:{}", corpus_path.display(), lineno + 1))
                            .map_err(data_err)
                    })
                    .collect()
            };
            (encode_all(&model_a, algo_a)?, encode_all(&model_b, algo_b)?)
        }
        _ => {
            return Err(usage_err(anyhow!(
                "give either --a and --b, or --tokenizer-a and --tokenizer-b with --corpus"
            )))
        }
    };
    if side_a.len() != side_b.len() {
        return Err(usage_err(anyhow!(
            "document count mismatch: {} vs {}",
            side_a.len(),
            side_b.len()
        )));
    }
    let mut report = DiffReport::from_pairs(side_a.iter().zip(side_b.iter()));
    if let Some(ppl_path) = &args.perplexity {
        let values = read_perplexities(ppl_path)?;
        report
            .attach_perplexities(&values)
            .context("merging --perplexity")
            .map_err(usage_err)?;
    }
    let mut out = output_writer(args.output.as_deref())?;
    match args.format {
        Format::Jsonl => report.write_jsonl(&mut out),
        Format::Tsv => report.write_tsv(&mut out),
    }
    .map_err(|e| data_err(e.into()))?;
    out.flush().map_err(|e| data_err(e.into()))?;
    // The human-readable summary accompanies file output.
    if args.output.is_some() && args.format == Format::Jsonl {
        report
            .write_tsv(io::stdout())
            .map_err(|e| data_err(e.into()))?;
    }
    Ok(())
}

fn read_perplexities(path: &Path) -> Result<Vec<f64>, CliFailure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(data_err)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.trim()
                .parse::<f64>()
                .with_context(|| format!("{}: bad perplexity {l:?}", path.display()))
                .map_err(data_err)
        })
        .collect()
}

fn cmd_train(args: TrainArgs) -> Result<(), CliFailure> {
    let documents = read_documents(&args.corpus.display().to_string())?;
    let pretoken = PretokenConfig {
        pattern: args
            .pattern
            .unwrap_or_else(|| bpekit::pretokenizer::DEFAULT_PATTERN.to_string()),
        byte_remap: true,
    };
    let model =
        train(&documents, &TrainConfig::new(args.merges), &pretoken).map_err(|e| match e {
            TrainError::EmptyCorpus | TrainError::ZeroTarget => usage_err(e.into()),
            other => data_err(other.into()),
        })?;
    model
        .save_tokenizer(&args.output)
        .with_context(|| format!("writing {}", args.output.display()))
        .map_err(data_err)?;
    eprintln!(
        "trained {} merges, vocabulary {} tokens -> {}",
        model.merges().len(),
        model.vocabulary().len(),
        args.output.display()
    );
    Ok(())
}
