//! The `lpi` command-line driver.
//!
//! Exit codes: 0 success, 1 usage error (bad flags, missing input files,
//! unreadable config), 2 data error (malformed or unusable input content).
//! Every successful run writes `<primary output>.manifest.json`.

mod config;
mod manifest;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{load_and_merge, merge_config, parse_config, ConfigError};
pub use manifest::{sha256_file, FileDigest, Manifest};

use crate::baseline::{load_model, save_model, train_ovr_svm_traced, SvmConfig};
use crate::chem::{ecfp, parse_smiles, DEFAULT_RADIUS, DEFAULT_WIDTH};
use crate::corpus::{
    corpus_stats, emit_instruction_corpus, format_instruction, read_instruction_corpus, sample_cohort,
    stratified_split, FormatMode, OrdinalClass, SplitSpec, TestSize, DEFAULT_TOLERANCE_PP,
};
use crate::curation::{
    filter_flat_assays, aggregate_replicates, merge_dedup, normalize_assay_units, parse_affinity_table, parse_fasta,
    read_curated, read_sequence_table, resolve_sequences, to_potency_records, write_curated, AuditLog, LpiExample,
    Source, TableSchema,
};
use crate::evaluation::{
    parse_report_json, read_predictions, read_truths, render_report, score, write_predictions, write_truths,
    GroundTruth, Prediction, ReportFormat,
};
use crate::features::{
    assemble_features, kmer_featurize, load_embeddings, read_feature_matrix, write_feature_matrix, FeatureVector,
};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 41;

#[derive(Debug, Parser)]
#[command(name = "lpi", version, about = "Ligand-protein affinity corpus builder, baseline and scorer")]
struct Cli {
    /// File of `key = value` lines supplying defaults for the subcommand's
    /// long flags; flags on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Raw assay tables -> curated example TSV.
    Curate(CurateArgs),
    /// Recompute ordinal classes of a curated TSV from its pIC50 column.
    Bin(BinArgs),
    /// Stratified train/test split of a curated TSV.
    Split(SplitArgs),
    /// Random fixed-size cohort of a curated TSV.
    Cohort(CohortArgs),
    /// Curated TSV -> instruction corpus JSON (and optional ground truth).
    Format(FormatArgs),
    /// Class balance and prompt composition of a corpus or curated TSV.
    Stats(StatsArgs),
    /// Curated TSV -> l2-normalized ligand+protein feature matrix.
    Featurize(FeaturizeArgs),
    /// Train the one-vs-rest linear SVM baseline.
    TrainBaseline(TrainArgs),
    /// Predict with a saved baseline model.
    PredictBaseline(PredictArgs),
    /// Score predictions against ground truth.
    Score(ScoreArgs),
    /// Re-render a JSON report in another format.
    Report(ReportArgs),
}

#[derive(Debug, Args, Serialize)]
struct CurateArgs {
    /// Raw assay table; repeat to merge several sources.
    #[arg(long = "in", required = true, value_name = "TSV")]
    inputs: Vec<PathBuf>,
    /// Two-column TSV (`uniprot`, `sequence`) of protein sequences.
    #[arg(long, value_name = "TSV", required_unless_present = "fasta", conflicts_with = "fasta")]
    sequences: Option<PathBuf>,
    /// FASTA file of protein sequences keyed by accession.
    #[arg(long, value_name = "FASTA")]
    fasta: Option<PathBuf>,
    #[arg(long, value_name = "TSV")]
    out: PathBuf,
    /// Audit log path; defaults to `<out>.audit.jsonl`.
    #[arg(long, value_name = "JSONL")]
    audit: Option<PathBuf>,
    /// Source recorded for rows without a source column.
    #[arg(long, value_enum, default_value_t = Source::Other)]
    source: Source,
    /// Name of a per-row source column.
    #[arg(long, value_name = "NAME")]
    source_column: Option<String>,
    /// Use commas instead of tabs when reading raw tables.
    #[arg(long)]
    csv: bool,
}

#[derive(Debug, Args, Serialize)]
struct BinArgs {
    #[arg(long = "in", value_name = "TSV")]
    input: PathBuf,
    #[arg(long, value_name = "TSV")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SplitArgs {
    #[arg(long = "in", value_name = "TSV")]
    input: PathBuf,
    /// Number of test examples.
    #[arg(long, conflicts_with = "test_fraction", required_unless_present = "test_fraction")]
    test_count: Option<usize>,
    /// Test share in (0, 1).
    #[arg(long)]
    test_fraction: Option<f64>,
    /// Largest allowed per-class share deviation, in percentage points.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE_PP)]
    tolerance_pp: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_name = "TSV")]
    out_train: PathBuf,
    #[arg(long, value_name = "TSV")]
    out_test: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct CohortArgs {
    #[arg(long = "in", value_name = "TSV")]
    input: PathBuf,
    #[arg(long)]
    size: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_name = "TSV")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct FormatArgs {
    #[arg(long = "in", value_name = "TSV")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatMode::Both)]
    mode: FormatMode,
    #[arg(long, value_name = "JSON")]
    out: PathBuf,
    /// Also write `example_id, ordinal` ground truth (ids are 0-based rows).
    #[arg(long, value_name = "TSV")]
    truth_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct StatsArgs {
    /// Instruction corpus JSON or curated TSV (detected from content).
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "TSV")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("protein").required(true).args(["embeddings", "kmer"]))]
struct FeaturizeArgs {
    #[arg(long = "in", value_name = "TSV")]
    input: PathBuf,
    /// Protein embedding TSV (`accession`, then one column per dimension).
    #[arg(long, value_name = "TSV")]
    embeddings: Option<PathBuf>,
    /// Expected embedding dimension.
    #[arg(long, requires = "embeddings")]
    embedding_dim: Option<usize>,
    /// Use k-mer counts (k = 1, 2 or 3) instead of embeddings.
    #[arg(long, value_name = "K")]
    kmer: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    radius: u32,
    #[arg(long, default_value_t = DEFAULT_WIDTH)]
    width: usize,
    #[arg(long, value_name = "TSV")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct TrainArgs {
    #[arg(long, value_name = "TSV")]
    features: PathBuf,
    /// Curated TSV whose ordinal column labels the feature rows.
    #[arg(long, value_name = "TSV")]
    labels: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1000)]
    max_epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_name = "MODEL")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct PredictArgs {
    #[arg(long, value_name = "MODEL")]
    model: PathBuf,
    #[arg(long, value_name = "TSV")]
    features: PathBuf,
    #[arg(long, value_name = "TSV")]
    out: PathBuf,
    /// Curated TSV for the same rows; with `--truth-out` writes ground truth.
    #[arg(long, value_name = "TSV", requires = "truth_out")]
    labels: Option<PathBuf>,
    #[arg(long, value_name = "TSV", requires = "labels")]
    truth_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ScoreArgs {
    #[arg(long, value_name = "TSV")]
    pred: PathBuf,
    #[arg(long, value_name = "TSV")]
    truth: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Tsv)]
    format: ReportFormat,
}

#[derive(Debug, Args, Serialize)]
struct ReportArgs {
    /// Report written by `score --format json`.
    #[arg(long = "in", value_name = "JSON")]
    input: PathBuf,
    #[arg(long, value_enum)]
    format: ReportFormat,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn data_in<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", path.display()))
}

/// Everything a subcommand produced, for the manifest.
struct Outcome {
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    notes: BTreeMap<String, String>,
}

impl Outcome {
    fn new(inputs: Vec<PathBuf>, outputs: Vec<PathBuf>) -> Self {
        Outcome { inputs, outputs, notes: BTreeMap::new() }
    }

    fn note(mut self, key: &str, value: impl Into<String>) -> Self {
        self.notes.insert(key.to_string(), value.into());
        self
    }
}

fn check_inputs(paths: &[(&str, &Path)]) -> Result<(), CliError> {
    for (flag, path) in paths {
        if !path.is_file() {
            return Err(CliError::Usage(format!("--{flag}: input file `{}` not found", path.display())));
        }
    }
    Ok(())
}

fn check_outputs(paths: &[(&str, &Path)]) -> Result<(), CliError> {
    for (flag, path) in paths {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            if !parent.is_dir() {
                return Err(CliError::Usage(format!("--{flag}: directory `{}` does not exist", parent.display())));
            }
        }
    }
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| data_in(path)(e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| data_in(path)(e))
}

fn read_examples(path: &Path, check_ordinal: bool) -> Result<Vec<LpiExample>, CliError> {
    read_curated(open(path)?, check_ordinal).map_err(|e| data_in(path)(e))
}

fn write_examples(path: &Path, examples: &[LpiExample]) -> Result<(), CliError> {
    write_curated(examples, create(path)?).map_err(|e| data_in(path)(e))
}

fn class_summary(examples: &[LpiExample]) -> String {
    let mut counts = [0usize; 5];
    for e in examples {
        counts[e.ordinal().rank()] += 1;
    }
    OrdinalClass::ALL.iter().map(|c| format!("{c}={}", counts[c.rank()])).collect::<Vec<_>>().join(" ")
}

fn curate(a: &CurateArgs) -> Result<Outcome, CliError> {
    let mut inputs: Vec<(&str, &Path)> = a.inputs.iter().map(|p| ("in", p.as_path())).collect();
    let seq_path = a.sequences.as_deref().or(a.fasta.as_deref()).expect("clap enforces one source");
    inputs.push((if a.sequences.is_some() { "sequences" } else { "fasta" }, seq_path));
    check_inputs(&inputs)?;
    let audit_path = a.audit.clone().unwrap_or_else(|| {
        let mut p = a.out.as_os_str().to_owned();
        p.push(".audit.jsonl");
        PathBuf::from(p)
    });
    check_outputs(&[("out", &a.out), ("audit", &audit_path)])?;

    let sequences = if a.sequences.is_some() {
        read_sequence_table(open(seq_path)?).map_err(|e| data_in(seq_path)(e))?
    } else {
        parse_fasta(open(seq_path)?).map_err(|e| data_in(seq_path)(e))?
    };
    let schema = TableSchema {
        delimiter: if a.csv { b',' } else { b'\t' },
        source: a.source_column.clone(),
        default_source: a.source,
        ..TableSchema::default()
    };

    let mut audit = AuditLog::new();
    let mut datasets = Vec::with_capacity(a.inputs.len());
    for path in &a.inputs {
        let parsed = parse_affinity_table(open(path)?, &schema).map_err(|e| data_in(path)(e))?;
        for r in &parsed.rejects {
            audit.record("parse", format!("{}:{}", path.display(), r.row), "rejected", format!("{:?}: {}", r.reason, r.detail));
        }
        let records = normalize_assay_units(parsed.records, &mut audit);
        let potency = to_potency_records(records, &mut audit);
        let potency = aggregate_replicates(potency, &mut audit);
        let potency = filter_flat_assays(potency, &mut audit);
        datasets.push(resolve_sequences(&potency, &sequences, &mut audit));
    }
    let (examples, profile) = merge_dedup(&datasets);
    audit.write_jsonl(create(&audit_path)?).map_err(data_in(&audit_path))?;
    if examples.is_empty() {
        return Err(CliError::Data(format!("no examples survived curation; see audit log {}", audit_path.display())));
    }
    write_examples(&a.out, &examples)?;
    eprintln!("curated {profile}");

    let mut all_inputs = a.inputs.clone();
    all_inputs.push(seq_path.to_path_buf());
    Ok(Outcome::new(all_inputs, vec![a.out.clone(), audit_path])
        .note("examples", examples.len().to_string())
        .note("audit_entries", audit.len().to_string()))
}

fn bin(a: &BinArgs) -> Result<Outcome, CliError> {
    check_inputs(&[("in", &a.input)])?;
    check_outputs(&[("out", &a.out)])?;
    let examples = read_examples(&a.input, false)?;
    write_examples(&a.out, &examples)?;
    Ok(Outcome::new(vec![a.input.clone()], vec![a.out.clone()]).note("classes", class_summary(&examples)))
}

fn split(a: &SplitArgs) -> Result<Outcome, CliError> {
    check_inputs(&[("in", &a.input)])?;
    check_outputs(&[("out-train", &a.out_train), ("out-test", &a.out_test)])?;
    let test_size = match (a.test_count, a.test_fraction) {
        (Some(n), _) => TestSize::Count(n),
        (None, Some(f)) => TestSize::Fraction(f),
        (None, None) => unreachable!("clap requires one of the test sizes"),
    };
    let examples = read_examples(&a.input, true)?;
    let spec = SplitSpec { test_size, seed: a.seed, tolerance_pp: a.tolerance_pp };
    let (train, test) = stratified_split(&examples, &spec).map_err(data)?;
    write_examples(&a.out_train, &train)?;
    write_examples(&a.out_test, &test)?;
    Ok(Outcome::new(vec![a.input.clone()], vec![a.out_train.clone(), a.out_test.clone()])
        .note("train", train.len().to_string())
        .note("test", test.len().to_string()))
}

fn cohort(a: &CohortArgs) -> Result<Outcome, CliError> {
    check_inputs(&[("in", &a.input)])?;
    check_outputs(&[("out", &a.out)])?;
    let examples = read_examples(&a.input, true)?;
    let subset = sample_cohort(&examples, a.size, a.seed).map_err(data)?;
    write_examples(&a.out, &subset)?;
    Ok(Outcome::new(vec![a.input.clone()], vec![a.out.clone()]).note("classes", class_summary(&subset)))
}

fn truths_of(examples: &[LpiExample]) -> Vec<GroundTruth> {
    examples
        .iter()
        .enumerate()
        .map(|(i, e)| GroundTruth { example_id: i.to_string(), ordinal: e.ordinal() })
        .collect()
}

fn format(a: &FormatArgs) -> Result<Outcome, CliError> {
    check_inputs(&[("in", &a.input)])?;
    check_outputs(&[("out", &a.out)])?;
    if let Some(t) = &a.truth_out {
        check_outputs(&[("truth-out", t)])?;
    }
    let examples = read_examples(&a.input, true)?;
    let records: Vec<_> = examples.iter().map(|e| format_instruction(e, a.mode)).collect();
    emit_instruction_corpus(&records, create(&a.out)?).map_err(data_in(&a.out))?;
    let mut outputs = vec![a.out.clone()];
    if let Some(t) = &a.truth_out {
        write_truths(&truths_of(&examples), create(t)?).map_err(data_in(t))?;
        outputs.push(t.clone());
    }
    Ok(Outcome::new(vec![a.input.clone()], outputs))
}

fn stats(a: &StatsArgs) -> Result<Outcome, CliError> {
    check_inputs(&[("in", &a.input)])?;
    check_outputs(&[("out", &a.out)])?;
    let mut text = String::new();
    open(&a.input)?.read_to_string(&mut text).map_err(data_in(&a.input))?;
    let (kind, result) = if text.trim_start().starts_with('[') {
        let records = read_instruction_corpus(text.as_bytes()).map_err(data_in(&a.input))?;
        ("instruction-corpus", corpus_stats(&records))
    } else {
        let examples = read_curated(text.as_bytes(), true).map_err(data_in(&a.input))?;
        ("curated-examples", corpus_stats(&examples))
    };
    let stats = result.map_err(data_in(&a.input))?;
    let mut w = create(&a.out)?;
    w.write_all(stats.to_tsv().as_bytes()).and_then(|_| w.flush()).map_err(data_in(&a.out))?;
    Ok(Outcome::new(vec![a.input.clone()], vec![a.out.clone()]).note("input_kind", kind))
}

fn featurize(a: &FeaturizeArgs) -> Result<Outcome, CliError> {
    let mut inputs = vec![("in", a.input.as_path())];
    if let Some(e) = &a.embeddings {
        inputs.push(("embeddings", e));
    }
    check_inputs(&inputs)?;
    check_outputs(&[("out", &a.out)])?;
    let examples = read_examples(&a.input, false)?;
    let table = match &a.embeddings {
        Some(path) => Some(load_embeddings(open(path)?, a.embedding_dim).map_err(data_in(path))?),
        None => None,
    };

    let mut rows: Vec<FeatureVector> = Vec::with_capacity(examples.len());
    for (i, e) in examples.iter().enumerate() {
        let mol = parse_smiles(e.ligand_smiles()).map_err(|err| CliError::Data(format!("row {i}: {err}")))?;
        let fp = ecfp(&mol, a.radius, a.width).map_err(|err| CliError::Data(format!("row {i}: {err}")))?;
        let protein = match (&table, a.kmer) {
            (Some(t), _) => t
                .get(e.protein_uniprot())
                .map(<[f64]>::to_vec)
                .ok_or_else(|| CliError::Data(format!("row {i}: no embedding for {}", e.protein_uniprot())))?,
            (None, Some(k)) => kmer_featurize(e.protein_sequence(), k).map_err(|err| CliError::Data(format!("row {i}: {err}")))?,
            (None, None) => unreachable!("clap requires a protein featurizer"),
        };
        rows.push(assemble_features(&fp, &protein).map_err(|err| CliError::Data(format!("row {i}: {err}")))?);
    }
    write_feature_matrix(&rows, create(&a.out)?).map_err(data_in(&a.out))?;

    let mut input_paths = vec![a.input.clone()];
    let protein_features = match (&a.embeddings, a.kmer) {
        (Some(p), _) => {
            input_paths.push(p.clone());
            "embeddings".to_string()
        }
        (None, Some(k)) => {
            eprintln!("note: protein block uses the k-mer fallback (k = {k}), not learned embeddings");
            format!("kmer-fallback-k{k}")
        }
        (None, None) => unreachable!(),
    };
    Ok(Outcome::new(input_paths, vec![a.out.clone()])
        .note("protein_features", protein_features)
        .note("rows", rows.len().to_string())
        .note("dimension", rows.first().map_or(0, |r| r.len()).to_string()))
}

fn train_baseline(a: &TrainArgs) -> Result<Outcome, CliError> {
    check_inputs(&[("features", &a.features), ("labels", &a.labels)])?;
    check_outputs(&[("out", &a.out)])?;
    let rows = read_feature_matrix(open(&a.features)?).map_err(data_in(&a.features))?;
    let labels: Vec<OrdinalClass> = read_examples(&a.labels, true)?.iter().map(|e| e.ordinal()).collect();
    let cfg = SvmConfig { c: a.c, max_epochs: a.max_epochs, tol: a.tol, seed: a.seed };
    let (model, traces) = train_ovr_svm_traced(&rows, &labels, &cfg).map_err(data)?;
    let mut w = create(&a.out)?;
    save_model(&model, &mut w).map_err(data_in(&a.out))?;
    let mut outcome = Outcome::new(vec![a.features.clone(), a.labels.clone()], vec![a.out.clone()]);
    for t in &traces {
        let final_obj = t.objectives.last().copied().unwrap_or(f64::NAN);
        outcome = outcome.note(
            &format!("class_{}", t.class),
            format!("epochs={} converged={} objective={final_obj}", t.epochs, t.converged),
        );
    }
    Ok(outcome)
}

fn predict_baseline(a: &PredictArgs) -> Result<Outcome, CliError> {
    let mut inputs = vec![("model", a.model.as_path()), ("features", a.features.as_path())];
    if let Some(l) = &a.labels {
        inputs.push(("labels", l));
    }
    check_inputs(&inputs)?;
    check_outputs(&[("out", &a.out)])?;
    if let Some(t) = &a.truth_out {
        check_outputs(&[("truth-out", t)])?;
    }
    let model = load_model(open(&a.model)?).map_err(data_in(&a.model))?;
    let rows = read_feature_matrix(open(&a.features)?).map_err(data_in(&a.features))?;
    let mut predictions = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let (class, _) = model.predict(row.values()).map_err(|e| CliError::Data(format!("row {i}: {e}")))?;
        predictions.push(Prediction::from_class(i.to_string(), class));
    }
    write_predictions(&predictions, create(&a.out)?).map_err(data_in(&a.out))?;

    let mut input_paths = vec![a.model.clone(), a.features.clone()];
    let mut outputs = vec![a.out.clone()];
    if let (Some(labels), Some(truth_out)) = (&a.labels, &a.truth_out) {
        let examples = read_examples(labels, true)?;
        if examples.len() != rows.len() {
            return Err(CliError::Data(format!("{} label rows for {} feature rows", examples.len(), rows.len())));
        }
        write_truths(&truths_of(&examples), create(truth_out)?).map_err(data_in(truth_out))?;
        input_paths.push(labels.clone());
        outputs.push(truth_out.clone());
    }
    Ok(Outcome::new(input_paths, outputs))
}

fn score_cmd(a: &ScoreArgs) -> Result<Outcome, CliError> {
    check_inputs(&[("pred", &a.pred), ("truth", &a.truth)])?;
    check_outputs(&[("out", &a.out)])?;
    let predictions = read_predictions(open(&a.pred)?).map_err(data_in(&a.pred))?;
    let truths = read_truths(open(&a.truth)?).map_err(data_in(&a.truth))?;
    let report = score(&predictions, &truths).map_err(data)?;
    render_report(&report, a.format, create(&a.out)?).map_err(data_in(&a.out))?;
    Ok(Outcome::new(vec![a.pred.clone(), a.truth.clone()], vec![a.out.clone()])
        .note("overall_exact", format!("{:.6}", report.overall_exact))
        .note("overall_near", format!("{:.6}", report.overall_near))
        .note("unparseable", report.unparseable_count.to_string()))
}

fn report_cmd(a: &ReportArgs) -> Result<Outcome, CliError> {
    check_inputs(&[("in", &a.input)])?;
    check_outputs(&[("out", &a.out)])?;
    let report = parse_report_json(open(&a.input)?).map_err(data_in(&a.input))?;
    render_report(&report, a.format, create(&a.out)?).map_err(data_in(&a.out))?;
    Ok(Outcome::new(vec![a.input.clone()], vec![a.out.clone()]))
}

fn dispatch(command: &Command) -> Result<(&'static str, serde_json::Value, Outcome), CliError> {
    fn cfg<T: Serialize>(args: &T) -> serde_json::Value {
        serde_json::to_value(args).expect("arguments serialize")
    }
    Ok(match command {
        Command::Curate(a) => ("curate", cfg(a), curate(a)?),
        Command::Bin(a) => ("bin", cfg(a), bin(a)?),
        Command::Split(a) => ("split", cfg(a), split(a)?),
        Command::Cohort(a) => ("cohort", cfg(a), cohort(a)?),
        Command::Format(a) => ("format", cfg(a), format(a)?),
        Command::Stats(a) => ("stats", cfg(a), stats(a)?),
        Command::Featurize(a) => ("featurize", cfg(a), featurize(a)?),
        Command::TrainBaseline(a) => ("train-baseline", cfg(a), train_baseline(a)?),
        Command::PredictBaseline(a) => ("predict-baseline", cfg(a), predict_baseline(a)?),
        Command::Score(a) => ("score", cfg(a), score_cmd(a)?),
        Command::Report(a) => ("report", cfg(a), report_cmd(a)?),
    })
}

/// Runs the driver on a full argument vector (program name first) and
/// returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let argv = match load_and_merge(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = dispatch(&cli.command).and_then(|(name, config, outcome)| {
        let primary = outcome.outputs.first().cloned().expect("every subcommand writes an output");
        let manifest = Manifest::build(name, config, &outcome.inputs, &outcome.outputs, outcome.notes).map_err(data)?;
        manifest.write(&primary).map_err(data)?;
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("usage error: {m}"),
                CliError::Data(m) => eprintln!("data error: {m}"),
            }
            e.code()
        }
    }
}
