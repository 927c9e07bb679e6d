use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{bin_pic50, OrdinalClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssayKind {
    IC50,
    EC50,
    AC50,
    Ki,
    Kd,
}

impl FromStr for AssayKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ic50" => Ok(AssayKind::IC50),
            "ec50" => Ok(AssayKind::EC50),
            "ac50" => Ok(AssayKind::AC50),
            "ki" => Ok(AssayKind::Ki),
            "kd" => Ok(AssayKind::Kd),
            _ => Err(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConcentrationUnit {
    Molar,
    Millimolar,
    Micromolar,
    Nanomolar,
    Unspecified,
}

impl ConcentrationUnit {
    /// `-log10` of one unit expressed in molar.
    pub fn molar_exponent(self) -> Option<f64> {
        match self {
            ConcentrationUnit::Molar => Some(0.0),
            ConcentrationUnit::Millimolar => Some(3.0),
            ConcentrationUnit::Micromolar => Some(6.0),
            ConcentrationUnit::Nanomolar => Some(9.0),
            ConcentrationUnit::Unspecified => None,
        }
    }

    /// Multiplier into nM; unspecified values are read as nM.
    pub fn to_nanomolar(self) -> f64 {
        match self {
            ConcentrationUnit::Molar => 1e9,
            ConcentrationUnit::Millimolar => 1e6,
            ConcentrationUnit::Micromolar => 1e3,
            ConcentrationUnit::Nanomolar | ConcentrationUnit::Unspecified => 1.0,
        }
    }
}

impl FromStr for ConcentrationUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "M" => Ok(ConcentrationUnit::Molar),
            "mM" => Ok(ConcentrationUnit::Millimolar),
            "uM" | "µM" | "μM" => Ok(ConcentrationUnit::Micromolar),
            "nM" => Ok(ConcentrationUnit::Nanomolar),
            "" | "unspecified" => Ok(ConcentrationUnit::Unspecified),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Pubchem,
    Bindingdb,
    Davis,
    #[default]
    Other,
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pubchem" => Ok(Source::Pubchem),
            "bindingdb" => Ok(Source::Bindingdb),
            "davis" => Ok(Source::Davis),
            "other" | "" => Ok(Source::Other),
            other => Err(other.to_string()),
        }
    }
}

/// Raw assay measurement as read from a source table.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityRecord {
    pub ligand_id: String,
    pub ligand_smiles: String,
    pub assay_id: String,
    pub protein_uniprot: String,
    pub assay_kind: AssayKind,
    pub value: f64,
    pub unit: ConcentrationUnit,
    pub source: Source,
}

/// Measurement after conversion to pIC50.
#[derive(Debug, Clone, PartialEq)]
pub struct PotencyRecord {
    pub ligand_id: String,
    pub ligand_smiles: String,
    pub assay_id: String,
    pub protein_uniprot: String,
    pub assay_kind: AssayKind,
    pub source: Source,
    pub pic50: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExampleError {
    #[error("protein sequence is empty")]
    EmptySequence,
    #[error("protein sequence has invalid residue `{0}`")]
    InvalidResidue(char),
    #[error("ligand SMILES is empty")]
    EmptySmiles,
    #[error("accession is empty")]
    EmptyAccession,
    #[error("pIC50 {0} is not finite")]
    NonFinite(f64),
}

/// Curated ligand-protein example. The ordinal is always derived from the
/// pIC50 at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LpiExample {
    ligand_smiles: String,
    protein_uniprot: String,
    protein_sequence: String,
    pic50: f64,
    ordinal: OrdinalClass,
}

impl LpiExample {
    pub fn new(smiles: &str, uniprot: &str, sequence: &str, pic50: f64) -> Result<Self, ExampleError> {
        let smiles = smiles.trim();
        if smiles.is_empty() {
            return Err(ExampleError::EmptySmiles);
        }
        let uniprot = uniprot.trim();
        if uniprot.is_empty() {
            return Err(ExampleError::EmptyAccession);
        }
        if sequence.is_empty() {
            return Err(ExampleError::EmptySequence);
        }
        // 20 standard residues plus B, J, O, U, X, Z cover A-Z
        if let Some(bad) = sequence.chars().find(|c| !c.is_ascii_uppercase()) {
            return Err(ExampleError::InvalidResidue(bad));
        }
        let ordinal = bin_pic50(pic50).map_err(|_| ExampleError::NonFinite(pic50))?;
        Ok(LpiExample {
            ligand_smiles: smiles.to_string(),
            protein_uniprot: uniprot.to_string(),
            protein_sequence: sequence.to_string(),
            pic50,
            ordinal,
        })
    }

    pub fn ligand_smiles(&self) -> &str {
        &self.ligand_smiles
    }

    pub fn protein_uniprot(&self) -> &str {
        &self.protein_uniprot
    }

    pub fn protein_sequence(&self) -> &str {
        &self.protein_sequence
    }

    pub fn pic50(&self) -> f64 {
        self.pic50
    }

    pub fn ordinal(&self) -> OrdinalClass {
        self.ordinal
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DatasetProfile {
    pub n_examples: usize,
    pub n_unique_ligands: usize,
    pub n_unique_proteins: usize,
    /// Indexed by class rank.
    pub class_counts: [usize; 5],
}

impl DatasetProfile {
    pub fn of(examples: &[LpiExample]) -> DatasetProfile {
        let ligands: std::collections::HashSet<_> = examples.iter().map(|e| e.ligand_smiles()).collect();
        let proteins: std::collections::HashSet<_> = examples.iter().map(|e| e.protein_uniprot()).collect();
        let mut class_counts = [0; 5];
        for e in examples {
            class_counts[e.ordinal().rank()] += 1;
        }
        DatasetProfile {
            n_examples: examples.len(),
            n_unique_ligands: ligands.len(),
            n_unique_proteins: proteins.len(),
            class_counts,
        }
    }
}

impl fmt::Display for DatasetProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} examples, {} ligands, {} proteins, classes A-E {:?}",
            self.n_examples, self.n_unique_ligands, self.n_unique_proteins, self.class_counts
        )
    }
}
