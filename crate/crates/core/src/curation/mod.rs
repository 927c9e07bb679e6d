//! Assay ingestion and curation into ligand-protein examples.

mod audit;
mod fasta;
mod pipeline;
mod records;
mod table;

pub use audit::{AuditEntry, AuditLog};
pub use fasta::{parse_fasta, FastaError};
pub use pipeline::{
    aggregate_replicates, duplicate_keys, filter_flat_assays, median, merge_dedup,
    normalize_assay_units, resolve_sequences, select_scale_step, to_pic50, to_potency_records,
    ConversionError, MAX_SCALE_STEP, WINDOW_HIGH_NM, WINDOW_LOW_NM,
};
pub use records::{
    AffinityRecord, AssayKind, ConcentrationUnit, DatasetProfile, ExampleError, LpiExample,
    PotencyRecord, Source,
};
pub use table::{
    parse_affinity_table, read_curated, read_sequence_table, write_curated, RejectReason,
    RowReject, TableError, TableParse, TableSchema, CURATED_COLUMNS,
};
