//! Instruction records, prompt templates and the `.json` corpus file.

use std::io::{Read, Write};

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use super::ordinal::{decode_token, OrdinalClass};
use crate::curation::LpiExample;

pub const BOTH_PREFIX: &str = "Predict the potency of the following SMILES and UNIPROT sequences: ";
pub const BOTH_JOINER: &str = " and ";
pub const LIGAND_PREFIX: &str = "Predict the potency of the following SMILES sequence: ";
pub const PROTEIN_PREFIX: &str = "Predict the potency of the following UNIPROT sequence: ";

pub const PROMPT_HEADER: &str =
    "Below is an instruction that describes a task. Write a response that appropriately completes the request.";
pub const INSTRUCTION_MARKER: &str = "### Instruction:";
pub const RESPONSE_MARKER: &str = "### Response:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FormatMode {
    #[default]
    Both,
    LigandOnly,
    ProteinOnly,
}

#[derive(Debug, Error)]
pub enum CorpusFileError {
    #[error("malformed corpus file: {0}")]
    MalformedFile(String),
    #[error("record {index} is missing key `{key}`")]
    MissingKey { index: usize, key: &'static str },
    #[error("record {index} has unexpected key `{key}`")]
    UnexpectedKey { index: usize, key: String },
    #[error("record {index}: {reason}")]
    InvalidRecord { index: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("instruction text is empty")]
pub struct EmptyInstruction;

/// One `{instruction, input, output}` training or test item. `input` is
/// always the empty string and is not stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstructionRecord {
    instruction: String,
    output: OrdinalClass,
}

impl InstructionRecord {
    pub fn new(instruction: impl Into<String>, output: OrdinalClass) -> Result<Self, EmptyInstruction> {
        let instruction = instruction.into();
        if instruction.trim().is_empty() {
            return Err(EmptyInstruction);
        }
        Ok(InstructionRecord { instruction, output })
    }

    pub fn instruction(&self) -> &str {
        &self.instruction
    }

    pub fn input(&self) -> &str {
        ""
    }

    pub fn output_class(&self) -> OrdinalClass {
        self.output
    }

    pub fn output(&self) -> &'static str {
        self.output.token()
    }
}

pub fn format_instruction(example: &LpiExample, mode: FormatMode) -> InstructionRecord {
    let instruction = match mode {
        FormatMode::Both => format!(
            "{BOTH_PREFIX}{}{BOTH_JOINER}{}",
            example.ligand_smiles(),
            example.protein_sequence()
        ),
        FormatMode::LigandOnly => format!("{LIGAND_PREFIX}{}", example.ligand_smiles()),
        FormatMode::ProteinOnly => format!("{PROTEIN_PREFIX}{}", example.protein_sequence()),
    };
    InstructionRecord { instruction, output: example.ordinal() }
}

/// Character counts `(ligand, protein, template)` of an instruction built by
/// [`format_instruction`]; `None` if the text matches no template.
pub fn instruction_composition(instruction: &str) -> Option<(usize, usize, usize)> {
    let total = instruction.chars().count();
    if let Some(rest) = instruction.strip_prefix(BOTH_PREFIX) {
        // SMILES never contains spaces, so the first joiner splits the blocks
        let split = rest.find(BOTH_JOINER)?;
        let ligand = rest[..split].chars().count();
        let protein = rest[split + BOTH_JOINER.len()..].chars().count();
        return Some((ligand, protein, total - ligand - protein));
    }
    if let Some(rest) = instruction.strip_prefix(LIGAND_PREFIX) {
        let ligand = rest.chars().count();
        return Some((ligand, 0, total - ligand));
    }
    if let Some(rest) = instruction.strip_prefix(PROTEIN_PREFIX) {
        let protein = rest.chars().count();
        return Some((0, protein, total - protein));
    }
    None
}

/// Prompt text shared by training and generation. With `include_output` the
/// target token follows the response marker.
pub fn wrap_prompt(record: &InstructionRecord, include_output: bool) -> String {
    let mut text = format!(
        "{PROMPT_HEADER} {INSTRUCTION_MARKER} {} {RESPONSE_MARKER}",
        record.instruction
    );
    if include_output {
        text.push(' ');
        text.push_str(record.output());
    }
    text
}

#[derive(Serialize)]
struct RecordRow<'a> {
    instruction: &'a str,
    input: &'a str,
    output: &'a str,
}

pub fn emit_instruction_corpus<W: Write>(records: &[InstructionRecord], mut sink: W) -> Result<(), CorpusFileError> {
    let rows: Vec<RecordRow<'_>> = records
        .iter()
        .map(|r| RecordRow { instruction: &r.instruction, input: "", output: r.output() })
        .collect();
    serde_json::to_writer_pretty(&mut sink, &rows).map_err(|e| CorpusFileError::Io(e.into()))?;
    sink.flush()?;
    Ok(())
}

pub fn read_instruction_corpus<R: Read>(source: R) -> Result<Vec<InstructionRecord>, CorpusFileError> {
    let value: Value =
        serde_json::from_reader(source).map_err(|e| CorpusFileError::MalformedFile(e.to_string()))?;
    let Value::Array(items) = value else {
        return Err(CorpusFileError::MalformedFile("top level is not an array".into()));
    };
    let mut records = Vec::with_capacity(items.len());
    for (index, item) in items.into_iter().enumerate() {
        let Value::Object(map) = item else {
            return Err(CorpusFileError::MalformedFile(format!("record {index} is not an object")));
        };
        if let Some(key) = map.keys().find(|k| !matches!(k.as_str(), "instruction" | "input" | "output")) {
            return Err(CorpusFileError::UnexpectedKey { index, key: key.clone() });
        }
        let field = |key: &'static str| -> Result<&str, CorpusFileError> {
            match map.get(key) {
                None => Err(CorpusFileError::MissingKey { index, key }),
                Some(Value::String(s)) => Ok(s.as_str()),
                Some(_) => Err(CorpusFileError::InvalidRecord { index, reason: format!("`{key}` is not a string") }),
            }
        };
        let instruction = field("instruction")?;
        let input = field("input")?;
        let output = field("output")?;
        if !input.is_empty() {
            return Err(CorpusFileError::InvalidRecord { index, reason: "`input` must be empty".into() });
        }
        let class = decode_token(output)
            .map_err(|e| CorpusFileError::InvalidRecord { index, reason: e.to_string() })?;
        let record = InstructionRecord::new(instruction, class)
            .map_err(|e| CorpusFileError::InvalidRecord { index, reason: e.to_string() })?;
        records.push(record);
    }
    Ok(records)
}
