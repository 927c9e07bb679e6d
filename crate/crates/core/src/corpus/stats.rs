use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::instruction::{format_instruction, instruction_composition, FormatMode, InstructionRecord};
use super::ordinal::OrdinalClass;
use super::sampling::Labeled;
use crate::curation::LpiExample;

/// Mean per-prompt character share, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    pub protein: f64,
    pub ligand: f64,
    pub template: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n: usize,
    pub class_counts: [usize; 5],
    pub class_percentages: [f64; 5],
    /// Present when every item's instruction matches a known template.
    pub composition: Option<Composition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot compute statistics of an empty corpus")]
pub struct EmptyInput;

pub trait CorpusItem: Labeled {
    /// `(ligand, protein, template)` character counts of the instruction.
    fn composition(&self) -> Option<(usize, usize, usize)>;
}

impl CorpusItem for InstructionRecord {
    fn composition(&self) -> Option<(usize, usize, usize)> {
        instruction_composition(self.instruction())
    }
}

impl CorpusItem for LpiExample {
    /// Composition of the `both` formatting of the example.
    fn composition(&self) -> Option<(usize, usize, usize)> {
        instruction_composition(format_instruction(self, FormatMode::Both).instruction())
    }
}

pub fn corpus_stats<T: CorpusItem>(items: &[T]) -> Result<CorpusStats, EmptyInput> {
    if items.is_empty() {
        return Err(EmptyInput);
    }
    let n = items.len();
    let mut class_counts = [0usize; 5];
    let mut sums = Some((0.0f64, 0.0f64, 0.0f64));
    for item in items {
        class_counts[item.ordinal().rank()] += 1;
        sums = match (sums, item.composition()) {
            (Some((l, p, t)), Some((cl, cp, ct))) => {
                let total = (cl + cp + ct) as f64;
                Some((l + cl as f64 / total, p + cp as f64 / total, t + ct as f64 / total))
            }
            _ => None,
        };
    }
    let class_percentages = class_counts.map(|c| 100.0 * c as f64 / n as f64);
    let composition = sums.map(|(l, p, t)| Composition {
        ligand: 100.0 * l / n as f64,
        protein: 100.0 * p / n as f64,
        template: 100.0 * t / n as f64,
    });
    Ok(CorpusStats { n, class_counts, class_percentages, composition })
}

impl CorpusStats {
    /// Tab-separated report: one row per class, then composition rows.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("row\tcount\tpercent\n");
        for class in OrdinalClass::ALL {
            let k = class.rank();
            let _ = writeln!(out, "{class}\t{}\t{:.4}", self.class_counts[k], self.class_percentages[k]);
        }
        let _ = writeln!(out, "total\t{}\t100.0000", self.n);
        if let Some(c) = self.composition {
            let _ = writeln!(out, "composition_protein\t\t{:.4}", c.protein);
            let _ = writeln!(out, "composition_ligand\t\t{:.4}", c.ligand);
            let _ = writeln!(out, "composition_template\t\t{:.4}", c.template);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_percentages() {
        let all_e = [OrdinalClass::E; 10];
        let recs: Vec<_> = all_e.iter().map(|&c| InstructionRecord::new("x", c).unwrap()).collect();
        let s = corpus_stats(&recs).unwrap();
        assert_eq!(s.class_percentages, [0.0, 0.0, 0.0, 0.0, 100.0]);
        assert!(s.composition.is_none());

        let recs: Vec<_> = OrdinalClass::ALL.iter().map(|&c| InstructionRecord::new("x", c).unwrap()).collect();
        assert_eq!(corpus_stats(&recs).unwrap().class_percentages, [20.0; 5]);
        assert_eq!(corpus_stats::<InstructionRecord>(&[]), Err(EmptyInput));
    }

    #[test]
    fn composition_sums_to_hundred() {
        let ex = LpiExample::new(&"C".repeat(68), "P1", &"M".repeat(667), 6.0).unwrap();
        let s = corpus_stats(&[ex.clone(), ex]).unwrap();
        let c = s.composition.unwrap();
        assert!((c.protein + c.ligand + c.template - 100.0).abs() < 1e-9);
        let template = (crate::corpus::BOTH_PREFIX.len() + crate::corpus::BOTH_JOINER.len()) as f64;
        assert!((c.protein - 100.0 * 667.0 / (735.0 + template)).abs() < 1e-9);
        assert!(s.to_tsv().contains("composition_protein"));
    }
}
