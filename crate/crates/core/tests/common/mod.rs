//! Independent oracles and data generators shared by the integration
//! tests. Nothing here calls the code path it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use lpi_core::chem::{BondOrder, Molecule};
use lpi_core::corpus::OrdinalClass;
use lpi_core::curation::{ConcentrationUnit, PotencyRecord};
use lpi_core::evaluation::{GroundTruth, Prediction};
use rand::seq::SliceRandom;
use rand::Rng;

/// Boundary suite for the potency bins, written from the inequalities
/// A ≥ 8 > B ≥ 7 > C ≥ 6 > D ≥ 5 > E.
pub const BINNING_CASES: [(f64, char); 15] = [
    (20.0, 'A'),
    (9.5, 'A'),
    (8.0, 'A'),
    (7.999, 'B'),
    (7.5, 'B'),
    (7.0, 'B'),
    (6.999, 'C'),
    (6.5, 'C'),
    (6.0, 'C'),
    (5.999, 'D'),
    (5.5, 'D'),
    (5.0, 'D'),
    (4.999, 'E'),
    (0.0, 'E'),
    (-20.0, 'E'),
];

pub const TOKENS: [(char, &str); 5] = [
    ('A', "achoo"),
    ('B', "blurpblurp"),
    ('C', "choochoo"),
    ('D', "dibbledopp"),
    ('E', "eekeek"),
];

pub fn class_of_letter(c: char) -> OrdinalClass {
    OrdinalClass::ALL[(c as u8 - b'A') as usize]
}

/// Every non-empty proper substring of `token`.
pub fn strict_substrings(token: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for i in 0..token.len() {
        for j in i + 1..=token.len() {
            if j - i < token.len() {
                out.insert(token[i..j].to_string());
            }
        }
    }
    out
}

/// Labels with exact class counts, shuffled.
pub fn labels_with_counts<R: Rng>(counts: [usize; 5], rng: &mut R) -> Vec<OrdinalClass> {
    let mut labels: Vec<OrdinalClass> = counts
        .iter()
        .enumerate()
        .flat_map(|(k, &n)| std::iter::repeat_n(OrdinalClass::ALL[k], n))
        .collect();
    labels.shuffle(rng);
    labels
}

/// Percentage of each class in a label multiset.
pub fn class_shares(labels: &[OrdinalClass]) -> [f64; 5] {
    let mut counts = [0usize; 5];
    for l in labels {
        counts[OrdinalClass::ALL.iter().position(|c| c == l).unwrap()] += 1;
    }
    counts.map(|c| 100.0 * c as f64 / labels.len() as f64)
}

fn bond_symbol(order: BondOrder) -> &'static str {
    match order {
        BondOrder::Single => "-",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic => ":",
    }
}

fn bracket_atom(mol: &Molecule, i: usize) -> String {
    let a = &mol.atoms()[i];
    let mut s = String::from("[");
    if let Some(iso) = a.isotope {
        s.push_str(&iso.to_string());
    }
    let sym = a.element.symbol();
    if a.aromatic {
        s.push_str(&sym.to_ascii_lowercase());
    } else {
        s.push_str(sym);
    }
    match a.total_h() {
        0 => {}
        1 => s.push('H'),
        n => s.push_str(&format!("H{n}")),
    }
    match a.formal_charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        q if q > 0 => s.push_str(&format!("+{q}")),
        q => s.push_str(&format!("-{}", -q)),
    }
    s.push(']');
    s
}

/// Writes the molecular graph as SMILES starting from `root` with a random
/// neighbor order. Every atom is bracketed with its hydrogen count, every
/// bond carries an explicit symbol and ring closures use `%nn` labels.
/// Stereo marks are not written.
pub fn rerooted_smiles<R: Rng>(mol: &Molecule, root: usize, rng: &mut R) -> String {
    let n = mol.atom_count();
    let mut visited = vec![false; n];
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    // per atom: (label, bond, opens)
    let mut closures: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); n];
    let mut tree_bond = vec![false; mol.bonds().len()];
    let mut closed_bond = vec![false; mol.bonds().len()];
    let mut next_label = 10;

    let mut starts = vec![root];
    starts.extend((0..n).filter(|&i| i != root));
    let mut roots = Vec::new();
    for s in starts {
        if visited[s] {
            continue;
        }
        roots.push(s);
        // explicit stack of (atom, shuffled neighbor list, cursor)
        visited[s] = true;
        let mut neigh: Vec<(usize, usize)> = mol.neighbors(s).to_vec();
        neigh.shuffle(rng);
        let mut stack = vec![(s, neigh, 0usize)];
        while let Some((atom, list, cursor)) = stack.last_mut() {
            if *cursor == list.len() {
                stack.pop();
                continue;
            }
            let (v, b) = list[*cursor];
            *cursor += 1;
            let atom = *atom;
            if tree_bond[b] || closed_bond[b] {
                continue;
            }
            if visited[v] {
                closed_bond[b] = true;
                closures[v].push((next_label, b, true));
                closures[atom].push((next_label, b, false));
                next_label += 1;
                assert!(next_label < 100, "too many rings for %nn labels");
            } else {
                tree_bond[b] = true;
                visited[v] = true;
                children[atom].push((v, b));
                let mut nl: Vec<(usize, usize)> = mol.neighbors(v).to_vec();
                nl.shuffle(rng);
                stack.push((v, nl, 0));
            }
        }
    }

    fn emit(
        mol: &Molecule,
        atom: usize,
        children: &[Vec<(usize, usize)>],
        closures: &[Vec<(usize, usize, bool)>],
        out: &mut String,
    ) {
        out.push_str(&bracket_atom(mol, atom));
        let mut cl = closures[atom].clone();
        cl.sort();
        for (label, bond, opens) in cl {
            if opens {
                out.push_str(bond_symbol(mol.bonds()[bond].order));
            }
            out.push_str(&format!("%{label}"));
        }
        let kids = &children[atom];
        for (i, &(child, bond)) in kids.iter().enumerate() {
            let last = i + 1 == kids.len();
            if !last {
                out.push('(');
            }
            out.push_str(bond_symbol(mol.bonds()[bond].order));
            emit(mol, child, children, closures, out);
            if !last {
                out.push(')');
            }
        }
    }

    let mut parts = Vec::new();
    for r in roots {
        let mut s = String::new();
        emit(mol, r, &children, &closures, &mut s);
        parts.push(s);
    }
    parts.join(".")
}

/// Nanomolar per unit, written out independently of the library.
pub fn nm_per_unit(unit: ConcentrationUnit) -> f64 {
    match unit {
        ConcentrationUnit::Molar => 1e9,
        ConcentrationUnit::Millimolar => 1e6,
        ConcentrationUnit::Micromolar => 1e3,
        ConcentrationUnit::Nanomolar | ConcentrationUnit::Unspecified => 1.0,
    }
}

pub fn naive_median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Exhaustive scan of `k ∈ [−3, 3]` for the smallest `|k|` putting
/// `median · 10^(3k)` inside `[0.1, 1e5]` nM.
pub fn scan_scale_step(median_nm: f64) -> Option<i32> {
    let mut ks: Vec<i32> = (-3..=3).collect();
    ks.sort_by_key(|k| (k.abs(), *k));
    ks.into_iter().find(|&k| {
        let scaled = median_nm * 10f64.powi(3 * k);
        (0.1..=1e5).contains(&scaled)
    })
}

/// `(ligand_id, assay_id) → mean pIC50` by direct pairwise grouping.
pub fn brute_replicates(records: &[PotencyRecord]) -> BTreeMap<(String, String), f64> {
    let mut out = BTreeMap::new();
    for r in records {
        let key = (r.ligand_id.clone(), r.assay_id.clone());
        if out.contains_key(&key) {
            continue;
        }
        let same: Vec<f64> = records
            .iter()
            .filter(|s| s.ligand_id == r.ligand_id && s.assay_id == r.assay_id)
            .map(|s| s.pic50)
            .collect();
        out.insert(key, same.iter().sum::<f64>() / same.len() as f64);
    }
    out
}

/// Assays with fewer than two distinct pIC50 values at three decimals.
pub fn brute_flat_assays(records: &[PotencyRecord]) -> BTreeSet<String> {
    let mut per: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for r in records {
        per.entry(&r.assay_id).or_default().insert(format!("{:.3}", r.pic50));
    }
    per.into_iter().filter(|(_, v)| v.len() < 2).map(|(k, _)| k.to_string()).collect()
}

/// `(smiles, uniprot) → (mean pIC50, count)` by direct grouping.
pub fn brute_merge(examples: &[(String, String, f64)]) -> BTreeMap<(String, String), (f64, usize)> {
    let mut out = BTreeMap::new();
    for (s, u, _) in examples {
        let key = (s.trim().to_string(), u.clone());
        if out.contains_key(&key) {
            continue;
        }
        let vals: Vec<f64> = examples
            .iter()
            .filter(|(s2, u2, _)| s2.trim() == key.0 && *u2 == key.1)
            .map(|(_, _, p)| *p)
            .collect();
        out.insert(key, (vals.iter().sum::<f64>() / vals.len() as f64, vals.len()));
    }
    out
}

/// Bin by the literal inequalities, for recomputing expected classes.
pub fn naive_bin(pic50: f64) -> OrdinalClass {
    let letter = if pic50 >= 8.0 {
        'A'
    } else if pic50 >= 7.0 {
        'B'
    } else if pic50 >= 6.0 {
        'C'
    } else if pic50 >= 5.0 {
        'D'
    } else {
        'E'
    };
    class_of_letter(letter)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveMetrics {
    pub exact: f64,
    pub near: f64,
    pub unparseable: usize,
    /// Per class: (support, recall, precision, f1, near).
    pub per_class: Vec<(usize, f64, f64, f64, f64)>,
    pub confusion: Vec<Vec<usize>>,
}

fn naive_token(text: &str) -> Option<usize> {
    let tail = match text.rfind("### Response:") {
        Some(p) => &text[p + "### Response:".len()..],
        None => text,
    };
    let first = tail.split_whitespace().next()?.to_lowercase();
    TOKENS.iter().position(|(_, t)| *t == first)
}

/// Recount of every metric straight from the (prediction text, truth)
/// pairs, one class at a time.
pub fn naive_score(pairs: &[(String, OrdinalClass)]) -> NaiveMetrics {
    let n = pairs.len() as f64;
    let rank = |c: OrdinalClass| OrdinalClass::ALL.iter().position(|x| *x == c).unwrap();
    let decoded: Vec<(Option<usize>, usize)> = pairs.iter().map(|(t, c)| (naive_token(t), rank(*c))).collect();
    let exact = decoded.iter().filter(|(p, t)| *p == Some(*t)).count() as f64 / n;
    let near = decoded
        .iter()
        .filter(|(p, t)| p.is_some_and(|p| (p as i64 - *t as i64).abs() <= 1))
        .count() as f64
        / n;
    let unparseable = decoded.iter().filter(|(p, _)| p.is_none()).count();
    let mut per_class = Vec::new();
    let mut confusion = vec![vec![0usize; 6]; 5];
    for (p, t) in &decoded {
        confusion[*t][p.unwrap_or(5)] += 1;
    }
    for k in 0..5 {
        let support = decoded.iter().filter(|(_, t)| *t == k).count();
        let tp = decoded.iter().filter(|(p, t)| *t == k && *p == Some(k)).count();
        let fp = decoded.iter().filter(|(p, t)| *t != k && *p == Some(k)).count();
        let near_k = decoded
            .iter()
            .filter(|(p, t)| *t == k && p.is_some_and(|p| (p as i64 - k as i64).abs() <= 1))
            .count();
        let recall = if support == 0 { 0.0 } else { tp as f64 / support as f64 };
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        let nr = if support == 0 { 0.0 } else { near_k as f64 / support as f64 };
        per_class.push((support, recall, precision, f1, nr));
    }
    NaiveMetrics { exact, near, unparseable, per_class, confusion }
}

/// Random scoring instance: texts mix valid tokens (varied case/spacing,
/// with and without a response marker) with garbage.
pub fn random_scoring_instance<R: Rng>(n: usize, rng: &mut R) -> (Vec<Prediction>, Vec<GroundTruth>, Vec<(String, OrdinalClass)>) {
    let mut preds = Vec::new();
    let mut truths = Vec::new();
    let mut pairs = Vec::new();
    for i in 0..n {
        let truth = OrdinalClass::ALL[rng.gen_range(0..5)];
        let text = match rng.gen_range(0..6) {
            0 => "### Response: banana".to_string(),
            1 => String::new(),
            2 => format!("Below is ... ### Response:   {}  trailing", TOKENS[rng.gen_range(0..5)].1.to_uppercase()),
            3 => format!(" {}\n", TOKENS[rng.gen_range(0..5)].1),
            4 => TOKENS[rng.gen_range(0..5)].1[..3].to_string(),
            _ => format!("### Response: {}", TOKENS[rng.gen_range(0..5)].1),
        };
        let id = format!("ex{i}");
        preds.push(Prediction::from_text(id.clone(), text.clone()));
        truths.push(GroundTruth { example_id: id, ordinal: truth });
        pairs.push((text, truth));
    }
    (preds, truths, pairs)
}

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Two 2-D Gaussian blobs, 50 points each, centered at ±(3, 3) with σ = 0.5,
/// redrawing any point that falls on the wrong side of `x + y = 0` so the
/// line separates them by construction.
pub fn separable_blobs<R: Rng>(rng: &mut R) -> (Vec<Vec<f64>>, Vec<OrdinalClass>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (sign, class) in [(1.0, OrdinalClass::B), (-1.0, OrdinalClass::D)] {
        let mut k = 0;
        while k < 50 {
            let p = vec![sign * 3.0 + 0.5 * gaussian(rng), sign * 3.0 + 0.5 * gaussian(rng)];
            if sign * (p[0] + p[1]) > 0.5 {
                xs.push(p);
                ys.push(class);
                k += 1;
            }
        }
    }
    (xs, ys)
}

/// The regularized hinge objective the baseline minimizes, written out
/// directly: ½(‖w‖² + b²) + C Σ max(0, 1 − y(w·x + b)).
pub fn reference_objective(w: &[f64], b: f64, xs: &[Vec<f64>], ys: &[f64], c: f64) -> f64 {
    let reg: f64 = w.iter().map(|v| v * v).sum::<f64>() + b * b;
    let mut loss = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let m: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
        loss += f64::max(0.0, 1.0 - y * m);
    }
    0.5 * reg + c * loss
}

/// Exhaustive minimization of [`reference_objective`] over the lattice
/// `{−2, −1.75, …, 2}^(d+1)` (weights then bias).
pub fn lattice_binary(xs: &[Vec<f64>], ys: &[f64], c: f64) -> (Vec<f64>, f64) {
    let d = xs[0].len();
    let grid: Vec<f64> = (-8..=8).map(|i| i as f64 * 0.25).collect();
    let mut best = (f64::INFINITY, vec![0.0; d], 0.0);
    let total = grid.len().pow(d as u32 + 1);
    let mut point = vec![0.0; d + 1];
    for mut code in 0..total {
        for slot in point.iter_mut() {
            *slot = grid[code % grid.len()];
            code /= grid.len();
        }
        let obj = reference_objective(&point[..d], point[d], xs, ys, c);
        if obj < best.0 - 1e-12 {
            best = (obj, point[..d].to_vec(), point[d]);
        }
    }
    (best.1, best.2)
}

/// One-vs-rest prediction from the lattice optima: argmax, lowest rank on
/// ties.
pub fn lattice_ovr_predict(models: &[(OrdinalClass, Vec<f64>, f64)], x: &[f64]) -> OrdinalClass {
    let mut best: Option<(f64, OrdinalClass)> = None;
    for (class, w, b) in models {
        let s: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + b;
        match best {
            Some((bs, _)) if s <= bs => {}
            _ => best = Some((s, *class)),
        }
    }
    best.unwrap().1
}

/// Random SMILES built from a fragment grammar, grown until it reaches
/// `target_len` characters. Always valid.
pub fn synthetic_smiles<R: Rng>(target_len: usize, rng: &mut R) -> String {
    const CHAIN: [&str; 8] = ["C", "CC", "O", "N", "C(=O)", "C(C)", "CN", "S"];
    const RINGS: [&str; 5] = ["c1ccccc1", "c1ccncc1", "C1CCCCC1", "c1ccc(F)cc1", "C1CCNCC1"];
    let mut s = String::from("C");
    while s.len() < target_len {
        if rng.gen_bool(0.25) {
            s.push_str(RINGS[rng.gen_range(0..RINGS.len())]);
        } else {
            s.push_str(CHAIN[rng.gen_range(0..CHAIN.len())]);
        }
    }
    s
}

pub fn random_protein<R: Rng>(len: usize, rng: &mut R) -> String {
    const AA: &[u8] = b"ACDEFGHIKLMNPQRSTVWY";
    (0..len).map(|_| AA[rng.gen_range(0..AA.len())] as char).collect()
}
