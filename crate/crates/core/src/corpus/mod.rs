//! Ordinal binning, the onomatopoeia label codec, instruction formatting,
//! stratified sampling and corpus statistics.

mod instruction;
mod ordinal;
mod sampling;
mod stats;

pub use instruction::{
    emit_instruction_corpus, format_instruction, instruction_composition, read_instruction_corpus,
    wrap_prompt, CorpusFileError, EmptyInstruction, FormatMode, InstructionRecord, BOTH_JOINER,
    BOTH_PREFIX, INSTRUCTION_MARKER, LIGAND_PREFIX, PROMPT_HEADER, PROTEIN_PREFIX, RESPONSE_MARKER,
};
pub use ordinal::{bin_pic50, decode_token, encode_class, OrdinalClass, OrdinalError};
pub use sampling::{
    sample_cohort, stratified_split, stratified_split_indices, Labeled, SamplingError, SplitSpec,
    TestSize, DEFAULT_TOLERANCE_PP,
};
pub use stats::{corpus_stats, Composition, CorpusItem, CorpusStats, EmptyInput};
