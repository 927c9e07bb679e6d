//! Parsing of generated outputs and exact / ±1 near-match scoring.
//!
//! Unparseable generations count as wrong under both criteria and are
//! tracked in their own confusion column. Precision is TP / (TP + FP).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{decode_token, OrdinalClass, RESPONSE_MARKER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseStatus {
    Parsed,
    Unparseable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub example_id: String,
    pub raw_text: Option<String>,
    pub ordinal: Option<OrdinalClass>,
    pub parse_status: ParseStatus,
}

impl Prediction {
    pub fn from_text(example_id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let (ordinal, parse_status) = parse_generation_output(&text);
        Prediction { example_id: example_id.into(), raw_text: Some(text), ordinal, parse_status }
    }

    pub fn from_class(example_id: impl Into<String>, class: OrdinalClass) -> Self {
        Prediction {
            example_id: example_id.into(),
            raw_text: None,
            ordinal: Some(class),
            parse_status: ParseStatus::Parsed,
        }
    }

    /// Text written to a predictions file: the raw generation if there is
    /// one, otherwise the class token.
    pub fn text(&self) -> String {
        match (&self.raw_text, self.ordinal) {
            (Some(t), _) => t.clone(),
            (None, Some(c)) => c.token().to_string(),
            (None, None) => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub example_id: String,
    pub ordinal: OrdinalClass,
}

/// Reads the answer after the last response marker (or the whole text when
/// the marker is absent): trim, case-fold, first whitespace token, decode.
pub fn parse_generation_output(text: &str) -> (Option<OrdinalClass>, ParseStatus) {
    let tail = match text.rfind(RESPONSE_MARKER) {
        Some(pos) => &text[pos + RESPONSE_MARKER.len()..],
        None => text,
    };
    let folded = tail.trim().to_ascii_lowercase();
    match folded.split_whitespace().next().map(decode_token) {
        Some(Ok(class)) => (Some(class), ParseStatus::Parsed),
        _ => (None, ParseStatus::Unparseable),
    }
}

pub fn near_match(pred: OrdinalClass, truth: OrdinalClass) -> bool {
    pred.rank().abs_diff(truth.rank()) <= 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub support: usize,
    /// Recall.
    pub exact: f64,
    pub precision: f64,
    pub f1: f64,
    pub near: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub overall_accuracy: f64,
    pub overall_exact: f64,
    pub overall_near: f64,
    pub per_class: BTreeMap<OrdinalClass, ClassMetrics>,
    /// Rows are truths, columns predictions; column 5 counts unparseable.
    pub confusion: [[usize; 6]; 5],
    pub unparseable_count: usize,
}

pub const UNPARSEABLE_COLUMN: usize = 5;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("{predictions} predictions but {truths} ground-truth rows")]
    LengthMismatch { predictions: usize, truths: usize },
    #[error("prediction `{0}` has no ground-truth row")]
    IdMismatch(String),
    #[error("example id `{0}` appears more than once")]
    DuplicateId(String),
    #[error("nothing to score")]
    Empty,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Pairs predictions with truths by example id and scores them.
pub fn score(predictions: &[Prediction], truths: &[GroundTruth]) -> Result<EvalReport, ScoreError> {
    if predictions.len() != truths.len() {
        return Err(ScoreError::LengthMismatch { predictions: predictions.len(), truths: truths.len() });
    }
    if predictions.is_empty() {
        return Err(ScoreError::Empty);
    }
    let mut truth_of: HashMap<&str, OrdinalClass> = HashMap::with_capacity(truths.len());
    for t in truths {
        if truth_of.insert(&t.example_id, t.ordinal).is_some() {
            return Err(ScoreError::DuplicateId(t.example_id.clone()));
        }
    }
    let mut seen = HashSet::with_capacity(predictions.len());
    let mut confusion = [[0usize; 6]; 5];
    let mut near_by_truth = [0usize; 5];
    for p in predictions {
        if !seen.insert(p.example_id.as_str()) {
            return Err(ScoreError::DuplicateId(p.example_id.clone()));
        }
        let truth = *truth_of.get(p.example_id.as_str()).ok_or_else(|| ScoreError::IdMismatch(p.example_id.clone()))?;
        match (p.parse_status, p.ordinal) {
            (ParseStatus::Parsed, Some(pred)) => {
                confusion[truth.rank()][pred.rank()] += 1;
                if near_match(pred, truth) {
                    near_by_truth[truth.rank()] += 1;
                }
            }
            _ => confusion[truth.rank()][UNPARSEABLE_COLUMN] += 1,
        }
    }

    let n = predictions.len();
    let diag: usize = (0..5).map(|k| confusion[k][k]).sum();
    let near_total: usize = near_by_truth.iter().sum();
    let unparseable_count = confusion.iter().map(|row| row[UNPARSEABLE_COLUMN]).sum();
    let per_class = OrdinalClass::ALL
        .iter()
        .map(|&class| {
            let k = class.rank();
            let support: usize = confusion[k].iter().sum();
            let predicted: usize = (0..5).map(|t| confusion[t][k]).sum();
            let recall = ratio(confusion[k][k], support);
            let precision = ratio(confusion[k][k], predicted);
            let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
            let near = ratio(near_by_truth[k], support);
            (class, ClassMetrics { support, exact: recall, precision, f1, near })
        })
        .collect();
    let exact = ratio(diag, n);
    Ok(EvalReport {
        n,
        overall_accuracy: exact,
        overall_exact: exact,
        overall_near: ratio(near_total, n),
        per_class,
        confusion,
        unparseable_count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    /// One row per class plus three overall rows.
    Tsv,
    /// Pretty JSON of the full report, including the confusion matrix.
    Json,
    /// `class, exact_pct, near_pct` series for bar charts.
    Plotdata,
}

pub const REPORT_TSV_HEADER: &str = "row\tsupport\texact\tnear\tprecision\trecall\tf1";

pub fn render_report<W: Write>(report: &EvalReport, format: ReportFormat, mut sink: W) -> std::io::Result<()> {
    match format {
        ReportFormat::Tsv => {
            writeln!(sink, "{REPORT_TSV_HEADER}")?;
            for (class, m) in &report.per_class {
                writeln!(
                    sink,
                    "{class}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
                    m.support, m.exact, m.near, m.precision, m.exact, m.f1
                )?;
            }
            writeln!(sink, "overall_accuracy\t{}\t{:.6}\t\t\t\t", report.n, report.overall_accuracy)?;
            writeln!(sink, "overall_exact\t{}\t{:.6}\t\t\t\t", report.n, report.overall_exact)?;
            writeln!(sink, "overall_near\t{}\t\t{:.6}\t\t\t", report.n, report.overall_near)?;
        }
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut sink, report)?;
            writeln!(sink)?;
        }
        ReportFormat::Plotdata => {
            writeln!(sink, "class\texact_pct\tnear_pct")?;
            for (class, m) in &report.per_class {
                writeln!(sink, "{class}\t{:.4}\t{:.4}", 100.0 * m.exact, 100.0 * m.near)?;
            }
        }
    }
    sink.flush()
}

pub fn parse_report_json<R: Read>(source: R) -> Result<EvalReport, serde_json::Error> {
    serde_json::from_reader(source)
}

#[derive(Debug, Error)]
pub enum EvalIoError {
    #[error("expected header `{expected}`, found `{found}`")]
    BadHeader { expected: String, found: String },
    #[error("line {line}: expected 2 fields")]
    BadRow { line: u64 },
    #[error("line {line}: unknown ordinal class `{text}`")]
    BadOrdinal { line: u64, text: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const PREDICTIONS_HEADER: [&str; 2] = ["example_id", "raw_text"];
pub const TRUTH_HEADER: [&str; 2] = ["example_id", "ordinal"];

fn tsv_reader<R: Read>(source: R, header: [&str; 2]) -> Result<csv::Reader<R>, EvalIoError> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(b'\t').flexible(true).from_reader(source);
    let found = rdr.headers()?.clone();
    if found.len() != 2 || found.iter().zip(header).any(|(a, b)| a.trim() != b) {
        return Err(EvalIoError::BadHeader { expected: header.join("\t"), found: found.iter().collect::<Vec<_>>().join("\t") });
    }
    Ok(rdr)
}

fn two_fields(rec: &csv::StringRecord) -> Result<(String, String), EvalIoError> {
    let line = rec.position().map_or(0, |p| p.line());
    match (rec.get(0), rec.get(1), rec.len()) {
        (Some(a), Some(b), 2) => Ok((a.to_string(), b.to_string())),
        _ => Err(EvalIoError::BadRow { line }),
    }
}

pub fn write_predictions<W: Write>(predictions: &[Prediction], sink: W) -> Result<(), EvalIoError> {
    let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(sink);
    w.write_record(PREDICTIONS_HEADER)?;
    for p in predictions {
        w.write_record([p.example_id.as_str(), p.text().as_str()])?;
    }
    w.flush()?;
    Ok(())
}

/// Every row becomes a prediction; unparseable text is a status, not an
/// error.
pub fn read_predictions<R: Read>(source: R) -> Result<Vec<Prediction>, EvalIoError> {
    let mut rdr = tsv_reader(source, PREDICTIONS_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let (id, text) = two_fields(&rec?)?;
        out.push(Prediction::from_text(id, text));
    }
    Ok(out)
}

pub fn write_truths<W: Write>(truths: &[GroundTruth], sink: W) -> Result<(), EvalIoError> {
    let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(sink);
    w.write_record(TRUTH_HEADER)?;
    for t in truths {
        w.write_record([t.example_id.as_str(), &t.ordinal.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_truths<R: Read>(source: R) -> Result<Vec<GroundTruth>, EvalIoError> {
    let mut rdr = tsv_reader(source, TRUTH_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let (id, text) = two_fields(&rec)?;
        let ordinal = text.parse().map_err(|_| EvalIoError::BadOrdinal { line, text })?;
        out.push(GroundTruth { example_id: id, ordinal });
    }
    Ok(out)
}
