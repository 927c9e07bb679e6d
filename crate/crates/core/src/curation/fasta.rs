use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::io::BufRead;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FastaError {
    #[error("line {line}: sequence data before any `>` header")]
    NoHeader { line: usize },
    #[error("accession `{0}` appears more than once")]
    DuplicateAccession(String),
    #[error("accession `{0}` has an empty sequence")]
    EmptySequence(String),
    #[error("line {line}: header has no accession")]
    EmptyHeader { line: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// First header token, with `db|ACC|name` decoration reduced to `ACC`.
fn accession(header: &str) -> Option<&str> {
    let token = header.split_whitespace().next()?;
    let parts: Vec<&str> = token.split('|').collect();
    let acc = if parts.len() >= 2 { parts[1] } else { parts[0] };
    (!acc.is_empty()).then_some(acc)
}

/// Reads FASTA text into accession -> uppercase sequence.
pub fn parse_fasta<R: BufRead>(reader: R) -> Result<BTreeMap<String, String>, FastaError> {
    let mut map = BTreeMap::new();
    let mut current: Option<(String, String)> = None;

    let finish = |entry: Option<(String, String)>, map: &mut BTreeMap<String, String>| -> Result<(), FastaError> {
        if let Some((acc, seq)) = entry {
            if seq.is_empty() {
                return Err(FastaError::EmptySequence(acc));
            }
            match map.entry(acc) {
                Entry::Occupied(o) => return Err(FastaError::DuplicateAccession(o.key().clone())),
                Entry::Vacant(v) => {
                    v.insert(seq);
                }
            }
        }
        Ok(())
    };

    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if let Some(header) = line.strip_prefix('>') {
            let acc = accession(header).ok_or(FastaError::EmptyHeader { line: line_no })?;
            finish(current.take(), &mut map)?;
            current = Some((acc.to_string(), String::new()));
            continue;
        }
        let data: String = line
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '*')
            .map(|c| c.to_ascii_uppercase())
            .collect();
        if data.is_empty() {
            continue;
        }
        match current.as_mut() {
            Some((_, seq)) => seq.push_str(&data),
            None => return Err(FastaError::NoHeader { line: line_no }),
        }
    }
    finish(current.take(), &mut map)?;
    Ok(map)
}
