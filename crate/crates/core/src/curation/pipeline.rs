//! Curation steps: unit normalization, pIC50 conversion, replicate means,
//! flat-assay removal, sequence resolution and multi-source merging.
//!
//! Every step emits its output sorted by its grouping key so results do not
//! depend on input order of groups.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::audit::AuditLog;
use super::records::{AffinityRecord, ConcentrationUnit, DatasetProfile, LpiExample, PotencyRecord};

/// Lower edge of the accepted median window, in nM (0.1 nM).
pub const WINDOW_LOW_NM: f64 = 0.1;
/// Upper edge of the accepted median window, in nM (100 µM).
pub const WINDOW_HIGH_NM: f64 = 1e5;
/// Scale exponents `k` (scale `10^(3k)`) tried by unit normalization.
pub const MAX_SCALE_STEP: i32 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConversionError {
    #[error("concentration {0} is not positive")]
    NonPositiveValue(f64),
    #[error("unit is unspecified")]
    UnspecifiedUnit,
}

/// `-log10` of the concentration in molar.
pub fn to_pic50(value: f64, unit: ConcentrationUnit) -> Result<f64, ConversionError> {
    if !(value.is_finite() && value > 0.0) {
        return Err(ConversionError::NonPositiveValue(value));
    }
    let exponent = unit.molar_exponent().ok_or(ConversionError::UnspecifiedUnit)?;
    Ok(exponent - value.log10())
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { (v[mid - 1] + v[mid]) / 2.0 })
}

fn in_window(x: f64) -> bool {
    (WINDOW_LOW_NM..=WINDOW_HIGH_NM).contains(&x)
}

/// Smallest-magnitude `k` in `[-3, 3]` placing `median_nm * 10^(3k)` inside
/// the window, or `None`.
pub fn select_scale_step(median_nm: f64) -> Option<i32> {
    if !(median_nm.is_finite() && median_nm > 0.0) {
        return None;
    }
    // feasible k satisfy (log10(low) - log10 m)/3 <= k <= (log10(high) - log10 m)/3
    let lm = median_nm.log10();
    let lo = ((WINDOW_LOW_NM.log10() - lm) / 3.0).ceil() as i32;
    let hi = ((WINDOW_HIGH_NM.log10() - lm) / 3.0).floor() as i32;
    let guess = 0.clamp(lo, hi);
    // the logarithm can land a hair off an edge; confirm on the real predicate
    [guess, guess - 1, guess + 1]
        .into_iter()
        .filter(|k| k.abs() <= MAX_SCALE_STEP)
        .filter(|&k| in_window(median_nm * 10f64.powi(3 * k)))
        .min_by_key(|k| k.abs())
}

/// Rescales every assay group so its median lands in 0.1 nM .. 100 µM.
/// Values are converted to nM first (unspecified units read as nM); output
/// units are nM. Groups no scale can fix are dropped.
pub fn normalize_assay_units(records: Vec<AffinityRecord>, audit: &mut AuditLog) -> Vec<AffinityRecord> {
    let mut groups: BTreeMap<String, Vec<AffinityRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.assay_id.clone()).or_default().push(r);
    }
    let mut out = Vec::new();
    for (assay, mut group) in groups {
        for r in &mut group {
            r.value *= r.unit.to_nanomolar();
            r.unit = ConcentrationUnit::Nanomolar;
        }
        let values: Vec<f64> = group.iter().map(|r| r.value).collect();
        let m = median(&values).unwrap_or(f64::NAN);
        match select_scale_step(m) {
            Some(0) => out.extend(group),
            Some(k) => {
                let scale = 10f64.powi(3 * k);
                audit.record("normalize_units", &assay, "rescaled", format!("scale=1e{} median_nm={m}", 3 * k));
                out.extend(group.into_iter().map(|mut r| {
                    r.value *= scale;
                    r
                }));
            }
            None => {
                audit.record("normalize_units", &assay, "dropped", format!("unscalable median_nm={m}"));
            }
        }
    }
    out
}

/// Converts normalized records to pIC50. Records whose conversion fails are
/// logged and skipped.
pub fn to_potency_records(records: Vec<AffinityRecord>, audit: &mut AuditLog) -> Vec<PotencyRecord> {
    records
        .into_iter()
        .filter_map(|r| match to_pic50(r.value, r.unit) {
            Ok(pic50) => Some(PotencyRecord {
                ligand_id: r.ligand_id,
                ligand_smiles: r.ligand_smiles,
                assay_id: r.assay_id,
                protein_uniprot: r.protein_uniprot,
                assay_kind: r.assay_kind,
                source: r.source,
                pic50,
            }),
            Err(e) => {
                audit.record("to_pic50", format!("{}/{}", r.assay_id, r.ligand_id), "dropped", e.to_string());
                None
            }
        })
        .collect()
}

/// One record per `(ligand_id, assay_id)` carrying the mean pIC50 (the
/// geometric mean of concentrations). Other fields come from the first
/// record of the group.
pub fn aggregate_replicates(records: Vec<PotencyRecord>, audit: &mut AuditLog) -> Vec<PotencyRecord> {
    let mut groups: BTreeMap<(String, String), Vec<PotencyRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.ligand_id.clone(), r.assay_id.clone())).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((ligand, assay), group)| {
            if group.len() == 1 {
                return group.into_iter().next().unwrap();
            }
            let mean = group.iter().map(|r| r.pic50).sum::<f64>() / group.len() as f64;
            audit.record(
                "aggregate_replicates",
                format!("{ligand}/{assay}"),
                "merged",
                format!("n={} mean_pic50={mean}", group.len()),
            );
            let mut first = group.into_iter().next().unwrap();
            first.pic50 = mean;
            first
        })
        .collect()
}

/// Drops assays with fewer than two distinct pIC50 values (3 decimals).
pub fn filter_flat_assays(records: Vec<PotencyRecord>, audit: &mut AuditLog) -> Vec<PotencyRecord> {
    let mut distinct: BTreeMap<&str, Vec<i64>> = BTreeMap::new();
    for r in &records {
        let key = (r.pic50 * 1000.0).round() as i64;
        let seen = distinct.entry(r.assay_id.as_str()).or_default();
        if !seen.contains(&key) && seen.len() < 2 {
            seen.push(key);
        }
    }
    let flat: Vec<String> = distinct
        .into_iter()
        .filter(|(_, v)| v.len() < 2)
        .map(|(k, _)| k.to_string())
        .collect();
    for assay in &flat {
        audit.record("filter_flat_assays", assay, "dropped", "no range of affinity values");
    }
    records.into_iter().filter(|r| !flat.contains(&r.assay_id)).collect()
}

/// Attaches protein sequences. Records whose accession is absent, or that
/// fail example validation, are logged and skipped.
pub fn resolve_sequences(
    records: &[PotencyRecord],
    sequences: &BTreeMap<String, String>,
    audit: &mut AuditLog,
) -> Vec<LpiExample> {
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        let key = format!("{}/{}", r.assay_id, r.ligand_id);
        let Some(seq) = sequences.get(&r.protein_uniprot) else {
            audit.record("resolve_sequences", key, "rejected", format!("no sequence for {}", r.protein_uniprot));
            continue;
        };
        match LpiExample::new(&r.ligand_smiles, &r.protein_uniprot, seq, r.pic50) {
            Ok(e) => out.push(e),
            Err(e) => audit.record("resolve_sequences", key, "rejected", e.to_string()),
        }
    }
    out
}

/// Union of datasets keyed by `(SMILES, accession)`. Duplicate keys collapse
/// to one example with the mean pIC50, re-binned. Output is sorted by key.
pub fn merge_dedup(datasets: &[Vec<LpiExample>]) -> (Vec<LpiExample>, DatasetProfile) {
    let mut merged: BTreeMap<(&str, &str), Vec<&LpiExample>> = BTreeMap::new();
    for e in datasets.iter().flatten() {
        merged.entry((e.ligand_smiles(), e.protein_uniprot())).or_default().push(e);
    }
    let examples: Vec<LpiExample> = merged
        .into_values()
        .map(|group| {
            let first = group[0];
            if group.len() == 1 {
                return first.clone();
            }
            let mean = group.iter().map(|e| e.pic50()).sum::<f64>() / group.len() as f64;
            LpiExample::new(first.ligand_smiles(), first.protein_uniprot(), first.protein_sequence(), mean)
                .expect("fields already validated")
        })
        .collect();
    let profile = DatasetProfile::of(&examples);
    (examples, profile)
}

/// Number of examples per duplicate key; used by callers that want to audit
/// collapsed keys.
pub fn duplicate_keys(datasets: &[Vec<LpiExample>]) -> HashMap<(String, String), usize> {
    let mut counts = HashMap::new();
    for e in datasets.iter().flatten() {
        *counts
            .entry((e.ligand_smiles().to_string(), e.protein_uniprot().to_string()))
            .or_insert(0) += 1;
    }
    counts.retain(|_, c| *c > 1);
    counts
}
