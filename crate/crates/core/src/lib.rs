//! Ligand-protein affinity data pipeline: SMILES parsing and circular
//! fingerprints, assay curation, ordinal binning and instruction corpora,
//! a one-vs-rest linear SVM baseline and exact/near-match scoring.

pub mod baseline;
pub mod chem;
pub mod cli;
pub mod corpus;
pub mod curation;
pub mod evaluation;
pub mod features;
