//! Extended-connectivity (Morgan) circular fingerprints.
//!
//! Identifiers are 64-bit values from [`StableHasher`]: FNV-1a over the
//! little-endian bytes of each `u64` word (offset basis
//! `0xcbf29ce484222325`, prime `0x100000001b3`) followed by the splitmix64
//! finalizer (`0xbf58476d1ce4e5b9`, `0x94d049bb133111eb`). No seed, no
//! platform dependence.
//!
//! Round 0 hashes `(atomic number, degree, formal charge, total H, in ring,
//! aromatic)`. Round `r` rehashes each atom's previous identifier together
//! with the sorted `(bond order, neighbor identifier)` pairs. Every
//! identifier of every round sets bit `id mod width`.

use std::collections::BTreeSet;

use thiserror::Error;

use super::molecule::Molecule;

pub const DEFAULT_WIDTH: usize = 2048;
pub const DEFAULT_RADIUS: u32 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FingerprintError {
    #[error("fingerprint width {0} is not a power of two >= 64")]
    BadWidth(usize),
    #[error("molecule has no atoms")]
    EmptyMolecule,
}

/// Word-at-a-time FNV-1a with a splitmix64 finalizer.
#[derive(Debug, Clone)]
pub struct StableHasher {
    state: u64,
}

impl StableHasher {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;

    pub fn new() -> Self {
        StableHasher { state: Self::OFFSET }
    }

    pub fn write_u64(&mut self, value: u64) {
        for byte in value.to_le_bytes() {
            self.state ^= u64::from(byte);
            self.state = self.state.wrapping_mul(Self::PRIME);
        }
    }

    pub fn finish(&self) -> u64 {
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

impl Default for StableHasher {
    fn default() -> Self {
        Self::new()
    }
}

fn hash_words(words: &[u64]) -> u64 {
    let mut h = StableHasher::new();
    for &w in words {
        h.write_u64(w);
    }
    h.finish()
}

/// Fixed-width folded fingerprint. Comparable only with fingerprints of the
/// same width and radius.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    words: Vec<u64>,
    width: usize,
    radius: u32,
}

impl Fingerprint {
    pub fn empty(width: usize, radius: u32) -> Result<Fingerprint, FingerprintError> {
        check_width(width)?;
        Ok(Fingerprint { words: vec![0; width / 64], width, radius })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn set(&mut self, bit: usize) {
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Fraction of unset bits.
    pub fn sparsity(&self) -> f64 {
        1.0 - self.popcount() as f64 / self.width as f64
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(move |&i| self.get(i))
    }

    pub fn comparable(&self, other: &Fingerprint) -> bool {
        self.width == other.width && self.radius == other.radius
    }

    /// Bits as 0.0 / 1.0 values.
    pub fn to_dense(&self) -> Vec<f64> {
        (0..self.width).map(|i| if self.get(i) { 1.0 } else { 0.0 }).collect()
    }
}

fn check_width(width: usize) -> Result<(), FingerprintError> {
    if width < 64 || !width.is_power_of_two() {
        return Err(FingerprintError::BadWidth(width));
    }
    Ok(())
}

/// Round-0 invariant of one atom.
fn initial_identifier(mol: &Molecule, atom: usize) -> u64 {
    let a = &mol.atoms()[atom];
    hash_words(&[
        u64::from(a.element.atomic_number()),
        mol.degree(atom) as u64,
        a.formal_charge as i64 as u64,
        u64::from(a.total_h()),
        u64::from(mol.is_in_ring(atom)),
        u64::from(a.aromatic),
    ])
}

/// Per-round identifiers: `rounds[r][atom]` for `r` in `0..=radius`.
pub fn atom_identifiers(mol: &Molecule, radius: u32) -> Vec<Vec<u64>> {
    let n = mol.atom_count();
    let mut rounds = Vec::with_capacity(radius as usize + 1);
    let mut current: Vec<u64> = (0..n).map(|i| initial_identifier(mol, i)).collect();
    rounds.push(current.clone());
    for _ in 0..radius {
        let next: Vec<u64> = (0..n)
            .map(|i| {
                let mut env: Vec<(u64, u64)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(j, b)| (mol.bonds()[b].order.code(), current[j]))
                    .collect();
                env.sort_unstable();
                let mut words = Vec::with_capacity(2 + 2 * env.len());
                words.push(current[i]);
                words.push(env.len() as u64);
                for (order, id) in env {
                    words.push(order);
                    words.push(id);
                }
                hash_words(&words)
            })
            .collect();
        rounds.push(next.clone());
        current = next;
    }
    rounds
}

/// Distinct unfolded identifiers across rounds `0..=radius`.
pub fn environment_ids(mol: &Molecule, radius: u32) -> BTreeSet<u64> {
    atom_identifiers(mol, radius).into_iter().flatten().collect()
}

pub fn ecfp(mol: &Molecule, radius: u32, width: usize) -> Result<Fingerprint, FingerprintError> {
    check_width(width)?;
    if mol.atom_count() == 0 {
        return Err(FingerprintError::EmptyMolecule);
    }
    let mut fp = Fingerprint::empty(width, radius)?;
    // width is a power of two, so the mask equals `mod width`
    let mask = width as u64 - 1;
    for id in atom_identifiers(mol, radius).into_iter().flatten() {
        fp.set((id & mask) as usize);
    }
    Ok(fp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn fp(smiles: &str, radius: u32) -> Fingerprint {
        ecfp(&parse_smiles(smiles).unwrap(), radius, DEFAULT_WIDTH).unwrap()
    }

    #[test]
    fn single_atom_single_bit() {
        assert_eq!(fp("C", 0).popcount(), 1);
    }

    #[test]
    fn ethanol_orderings_agree() {
        assert_eq!(fp("CCO", 2), fp("OCC", 2));
        assert_eq!(fp("CCO", 2), fp("C(O)C", 2));
        assert_ne!(fp("CCO", 2), fp("CCN", 2));
    }

    #[test]
    fn aspirin_bounds() {
        let f = fp("CC(=O)Oc1ccccc1C(=O)O", 2);
        assert!(f.popcount() <= 39, "popcount {}", f.popcount());
        assert!(f.sparsity() >= 0.98);
    }

    #[test]
    fn stereo_does_not_change_bits() {
        assert_eq!(fp("N[C@H](C)O", 2), fp("N[C@@H](C)O", 2));
        assert_eq!(fp("N[C@H](C)O", 2), fp("NC(C)O", 2));
        assert_eq!(fp("F/C=C/F", 2), fp("FC=CF", 2));
    }

    #[test]
    fn width_validation() {
        let m = parse_smiles("CC").unwrap();
        assert_eq!(ecfp(&m, 2, 1000), Err(FingerprintError::BadWidth(1000)));
        assert_eq!(ecfp(&m, 2, 32), Err(FingerprintError::BadWidth(32)));
        assert!(ecfp(&m, 2, 64).is_ok());
    }

    #[test]
    fn hasher_is_stable() {
        // frozen values guard against accidental changes to the constants
        let mut h = StableHasher::new();
        h.write_u64(0);
        let a = h.finish();
        let mut h = StableHasher::new();
        h.write_u64(0);
        assert_eq!(a, h.finish());
        assert_ne!(hash_words(&[1, 2]), hash_words(&[2, 1]));
        assert_eq!(hash_words(&[0, 7]), 0x5e4c_7e2c_aadf_c3a5);
        assert_eq!(hash_words(&[]), {
            let mut z: u64 = 0xcbf2_9ce4_8422_2325;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^ (z >> 31)
        });
    }

    #[test]
    fn radius_refinement_is_monotone() {
        let m = parse_smiles("N[C@H]1C[C@H]1c1ccc(NC(=O)c2ccccc2)cc1").unwrap();
        for r in 0..4 {
            assert!(environment_ids(&m, r).is_subset(&environment_ids(&m, r + 1)));
        }
    }
}
