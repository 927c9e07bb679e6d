//! Protein embeddings, the k-mer fallback featurizer and assembly of
//! l2-normalized ligand + protein feature vectors.
//!
//! Embedding TSV: no header, `accession<TAB>v1<TAB>...<TAB>vd` with constant
//! `d`. Saved values use 17 significant digits so 64-bit floats survive a
//! round trip. The k-mer featurizer exists so the pipeline runs without an
//! external protein model; anything built from it is labeled as such.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::chem::Fingerprint;

pub const KMER_ALPHABET: &[u8; 20] = b"ACDEFGHIKLMNPQRSTVWY";
/// Index of the bucket shared by all nonstandard residues.
pub const KMER_OTHER: usize = 20;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("line {line}: expected {expected} values, found {found}")]
    RaggedRows { line: usize, expected: usize, found: usize },
    #[error("line {line}: duplicate accession `{accession}`")]
    DuplicateAccession { line: usize, accession: String },
    #[error("embedding dimension {found} does not match expected {expected}")]
    DimMismatch { expected: usize, found: usize },
    #[error("line {line}: `{text}` is not a number")]
    NotANumber { line: usize, text: String },
    #[error("line {line}: row has no values")]
    EmptyRow { line: usize },
    #[error("k must be 1, 2 or 3, got {0}")]
    BadK(usize),
    #[error("sequence of length {len} is shorter than k = {k}")]
    TooShort { len: usize, k: usize },
    #[error("ligand and protein blocks are both all-zero")]
    ZeroVector,
    #[error("empty {0} block")]
    EmptyBlock(&'static str),
    #[error("feature matrix: {0}")]
    BadMatrix(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, accession: &str) -> Option<&[f64]> {
        self.vectors.get(accession).map(Vec::as_slice)
    }

    pub fn from_vectors(vectors: BTreeMap<String, Vec<f64>>) -> Result<Self, FeatureError> {
        let dim = vectors.values().next().map_or(0, Vec::len);
        for (i, v) in vectors.values().enumerate() {
            if v.len() != dim {
                return Err(FeatureError::RaggedRows { line: i + 1, expected: dim, found: v.len() });
            }
        }
        Ok(EmbeddingTable { dim, vectors })
    }

    pub fn save<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        for (acc, v) in &self.vectors {
            sink.write_all(acc.as_bytes())?;
            for x in v {
                write!(sink, "\t{x:.16e}")?;
            }
            sink.write_all(b"\n")?;
        }
        sink.flush()
    }
}

pub fn load_embeddings<R: BufRead>(reader: R, expected_dim: Option<usize>) -> Result<EmbeddingTable, FeatureError> {
    let mut vectors = BTreeMap::new();
    let mut dim: Option<usize> = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let accession = fields.next().unwrap_or("").trim().to_string();
        let values = fields
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| FeatureError::NotANumber { line: line_no, text: t.to_string() })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if values.is_empty() {
            return Err(FeatureError::EmptyRow { line: line_no });
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(FeatureError::RaggedRows { line: line_no, expected: d, found: values.len() });
            }
            _ => {}
        }
        if vectors.contains_key(&accession) {
            return Err(FeatureError::DuplicateAccession { line: line_no, accession });
        }
        vectors.insert(accession, values);
    }
    let dim = dim.unwrap_or(0);
    if let Some(expected) = expected_dim {
        if expected != dim {
            return Err(FeatureError::DimMismatch { expected, found: dim });
        }
    }
    Ok(EmbeddingTable { dim, vectors })
}

fn residue_index(c: u8) -> usize {
    let c = c.to_ascii_uppercase();
    KMER_ALPHABET.iter().position(|&a| a == c).unwrap_or(KMER_OTHER)
}

/// Counts of overlapping k-mers over 20 residues plus an "other" bucket;
/// dimension `21^k`.
pub fn kmer_featurize(sequence: &str, k: usize) -> Result<Vec<f64>, FeatureError> {
    if !(1..=3).contains(&k) {
        return Err(FeatureError::BadK(k));
    }
    let bytes = sequence.as_bytes();
    if bytes.len() < k {
        return Err(FeatureError::TooShort { len: bytes.len(), k });
    }
    let mut counts = vec![0.0; 21usize.pow(k as u32)];
    for window in bytes.windows(k) {
        let idx = window.iter().fold(0, |acc, &c| acc * 21 + residue_index(c));
        counts[idx] += 1.0;
    }
    Ok(counts)
}

/// Concatenated, l2-normalized ligand + protein features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
    ligand_width: usize,
    protein_width: usize,
}

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ligand_width(&self) -> usize {
        self.ligand_width
    }

    pub fn protein_width(&self) -> usize {
        self.protein_width
    }

    pub fn ligand_block(&self) -> &[f64] {
        &self.values[..self.ligand_width]
    }

    pub fn protein_block(&self) -> &[f64] {
        &self.values[self.ligand_width..]
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

pub fn assemble_features(fp: &Fingerprint, protein: &[f64]) -> Result<FeatureVector, FeatureError> {
    if fp.width() == 0 {
        return Err(FeatureError::EmptyBlock("ligand"));
    }
    if protein.is_empty() {
        return Err(FeatureError::EmptyBlock("protein"));
    }
    let mut values = fp.to_dense();
    values.extend_from_slice(protein);
    let norm = values.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(FeatureError::ZeroVector);
    }
    values.iter_mut().for_each(|x| *x /= norm);
    Ok(FeatureVector { values, ligand_width: fp.width(), protein_width: protein.len() })
}

/// Writes `n<TAB>ligand_width<TAB>protein_width` then one tab-separated row
/// per vector.
pub fn write_feature_matrix<W: Write>(rows: &[FeatureVector], mut sink: W) -> Result<(), FeatureError> {
    let (lw, pw) = rows.first().map_or((0, 0), |r| (r.ligand_width, r.protein_width));
    writeln!(sink, "{}\t{lw}\t{pw}", rows.len())?;
    for row in rows {
        if row.ligand_width != lw || row.protein_width != pw {
            return Err(FeatureError::BadMatrix("rows have differing block widths".into()));
        }
        let mut first = true;
        for x in &row.values {
            if !first {
                sink.write_all(b"\t")?;
            }
            first = false;
            write!(sink, "{x:.16e}")?;
        }
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(())
}

pub fn read_feature_matrix<R: BufRead>(reader: R) -> Result<Vec<FeatureVector>, FeatureError> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| FeatureError::BadMatrix("missing header".into()))??;
    let dims: Vec<usize> = header
        .split('\t')
        .map(|t| t.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| FeatureError::BadMatrix(format!("bad header `{header}`")))?;
    let [n, lw, pw] = dims[..] else {
        return Err(FeatureError::BadMatrix(format!("bad header `{header}`")));
    };
    let mut rows = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let values = line
            .split('\t')
            .map(|t| t.parse::<f64>().map_err(|_| FeatureError::NotANumber { line: i + 2, text: t.to_string() }))
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != lw + pw {
            return Err(FeatureError::RaggedRows { line: i + 2, expected: lw + pw, found: values.len() });
        }
        rows.push(FeatureVector { values, ligand_width: lw, protein_width: pw });
    }
    if rows.len() != n {
        return Err(FeatureError::BadMatrix(format!("header declares {n} rows, found {}", rows.len())));
    }
    Ok(rows)
}
