//! Delimited-text ingestion of assay tables and the curated-example TSV.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::Serialize;
use thiserror::Error;

use super::records::{AffinityRecord, ExampleError, LpiExample, Source};
use crate::corpus::OrdinalClass;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("column `{0}` is missing from the header")]
    MissingColumn(String),
    #[error("row {row}: {reason}")]
    BadRow { row: u64, reason: String },
    #[error("row {row}: {source}")]
    BadExample { row: u64, source: ExampleError },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Column names of a raw assay table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableSchema {
    pub delimiter: u8,
    pub ligand_id: String,
    pub smiles: String,
    pub assay_id: String,
    pub assay_kind: String,
    pub value: String,
    pub unit: String,
    pub protein: String,
    /// Per-row source column; `default_source` applies when absent.
    pub source: Option<String>,
    pub default_source: Source,
}

impl Default for TableSchema {
    fn default() -> Self {
        TableSchema {
            delimiter: b'\t',
            ligand_id: "ligand_id".into(),
            smiles: "smiles".into(),
            assay_id: "assay_id".into(),
            assay_kind: "assay_kind".into(),
            value: "value".into(),
            unit: "unit".into(),
            protein: "uniprot".into(),
            source: None,
            default_source: Source::Other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RejectReason {
    NotANumber,
    NonPositiveValue,
    UnknownUnit,
    UnknownAssayKind,
    UnknownSource,
    MissingField,
    EmptyField,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowReject {
    /// 1-based line number in the input, header included.
    pub row: u64,
    pub reason: RejectReason,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TableParse {
    pub records: Vec<AffinityRecord>,
    pub rejects: Vec<RowReject>,
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, TableError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| TableError::MissingColumn(name.to_string()))
}

pub fn parse_affinity_table<R: Read>(reader: R, schema: &TableSchema) -> Result<TableParse, TableError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let idx = [
        column(&headers, &schema.ligand_id)?,
        column(&headers, &schema.smiles)?,
        column(&headers, &schema.assay_id)?,
        column(&headers, &schema.assay_kind)?,
        column(&headers, &schema.value)?,
        column(&headers, &schema.unit)?,
        column(&headers, &schema.protein)?,
    ];
    let source_idx = schema.source.as_deref().map(|s| column(&headers, s)).transpose()?;

    let mut out = TableParse::default();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let mut reject = |reason, detail: String| out.rejects.push(RowReject { row: line, reason, detail });

        let mut fields = [""; 7];
        let mut missing = None;
        for (slot, &i) in fields.iter_mut().zip(&idx) {
            match row.get(i) {
                Some(v) => *slot = v.trim(),
                None => missing = Some(headers[i].to_string()),
            }
        }
        if let Some(col) = missing {
            reject(RejectReason::MissingField, col);
            continue;
        }
        let [ligand_id, smiles, assay_id, kind, value, unit, protein] = fields;
        if let Some(name) = [(ligand_id, 0), (smiles, 1), (assay_id, 2), (protein, 6)]
            .iter()
            .find(|(v, _)| v.is_empty())
            .map(|&(_, i)| headers[idx[i]].to_string())
        {
            reject(RejectReason::EmptyField, name);
            continue;
        }
        let value_num: f64 = match value.parse() {
            Ok(v) => v,
            Err(_) => {
                reject(RejectReason::NotANumber, value.to_string());
                continue;
            }
        };
        if !value_num.is_finite() {
            reject(RejectReason::NotANumber, value.to_string());
            continue;
        }
        if value_num <= 0.0 {
            reject(RejectReason::NonPositiveValue, value.to_string());
            continue;
        }
        let Ok(unit) = unit.parse() else {
            reject(RejectReason::UnknownUnit, unit.to_string());
            continue;
        };
        let Ok(assay_kind) = kind.parse() else {
            reject(RejectReason::UnknownAssayKind, kind.to_string());
            continue;
        };
        let source = match source_idx.and_then(|i| row.get(i)) {
            Some(text) => match text.parse() {
                Ok(s) => s,
                Err(_) => {
                    reject(RejectReason::UnknownSource, text.to_string());
                    continue;
                }
            },
            None => schema.default_source,
        };
        out.records.push(AffinityRecord {
            ligand_id: ligand_id.to_string(),
            ligand_smiles: smiles.to_string(),
            assay_id: assay_id.to_string(),
            protein_uniprot: protein.to_string(),
            assay_kind,
            value: value_num,
            unit,
            source,
        });
    }
    Ok(out)
}

pub const CURATED_COLUMNS: [&str; 5] = ["smiles", "uniprot", "sequence", "pic50", "ordinal"];

pub fn write_curated<W: Write>(examples: &[LpiExample], sink: W) -> Result<(), TableError> {
    let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(sink);
    w.write_record(CURATED_COLUMNS)?;
    for e in examples {
        w.write_record([
            e.ligand_smiles(),
            e.protein_uniprot(),
            e.protein_sequence(),
            &e.pic50().to_string(),
            &e.ordinal().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a curated TSV. With `check_ordinal`, a present `ordinal` column must
/// agree with the binned pIC50; otherwise it is ignored and recomputed.
pub fn read_curated<R: Read>(source: R, check_ordinal: bool) -> Result<Vec<LpiExample>, TableError> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(b'\t').from_reader(source);
    let headers = rdr.headers()?.clone();
    let smiles = column(&headers, "smiles")?;
    let uniprot = column(&headers, "uniprot")?;
    let sequence = column(&headers, "sequence")?;
    let pic50 = column(&headers, "pic50")?;
    let ordinal = column(&headers, "ordinal").ok();

    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let get = |i: usize| row.get(i).unwrap_or("");
        let value: f64 = get(pic50)
            .trim()
            .parse()
            .map_err(|_| TableError::BadRow { row: line, reason: format!("pic50 `{}` is not a number", get(pic50)) })?;
        let example = LpiExample::new(get(smiles), get(uniprot), get(sequence).trim(), value)
            .map_err(|source| TableError::BadExample { row: line, source })?;
        if let (true, Some(i)) = (check_ordinal, ordinal) {
            let stated: OrdinalClass = get(i)
                .parse()
                .map_err(|e: crate::corpus::OrdinalError| TableError::BadRow { row: line, reason: e.to_string() })?;
            if stated != example.ordinal() {
                return Err(TableError::BadRow {
                    row: line,
                    reason: format!("ordinal {stated} disagrees with pIC50 {value}"),
                });
            }
        }
        out.push(example);
    }
    Ok(out)
}

/// Two-column `uniprot<TAB>sequence` table with a header row.
pub fn read_sequence_table<R: Read>(source: R) -> Result<BTreeMap<String, String>, TableError> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(b'\t').from_reader(source);
    let headers = rdr.headers()?.clone();
    let acc = column(&headers, "uniprot")?;
    let seq = column(&headers, "sequence")?;
    let mut map = BTreeMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let key = row.get(acc).unwrap_or("").trim().to_string();
        let value = row.get(seq).unwrap_or("").trim().to_ascii_uppercase();
        if key.is_empty() || value.is_empty() {
            return Err(TableError::BadRow { row: line, reason: "empty accession or sequence".into() });
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(TableError::BadRow { row: line, reason: format!("duplicate accession `{key}`") });
        }
    }
    Ok(map)
}
