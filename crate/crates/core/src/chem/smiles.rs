//! SMILES reader covering the organic subset, bracket atoms, branches,
//! ring closures (`1`..`9`, `%nn`), explicit bond symbols and
//! dot-separated components.

use std::collections::HashMap;

use thiserror::Error;

use super::element::Element;
use super::molecule::{Atom, Bond, BondOrder, BondStereo, Chirality, Molecule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesErrorKind {
    #[error("empty input")]
    EmptyInput,
    #[error("ring closure {0} is never closed")]
    UnbalancedRing(u16),
    #[error("unbalanced parenthesis")]
    UnbalancedParen,
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("malformed charge")]
    BadCharge,
    #[error("malformed bracket atom: {0}")]
    BadBracket(&'static str),
    #[error("bond symbol is not followed by an atom")]
    DanglingBond,
    #[error("two bond symbols in a row")]
    DoubleBondSymbol,
    #[error("ring closure or branch without a preceding atom")]
    MissingAtom,
    #[error("ring closure bond symbols disagree")]
    RingBondMismatch,
    #[error("duplicate bond or self-loop")]
    DuplicateBond,
    #[error("unsupported bond symbol `{0}`")]
    UnsupportedBond(char),
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
}

/// Parse failure with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("SMILES error at byte {offset}: {kind}")]
pub struct SmilesError {
    pub offset: usize,
    pub kind: SmilesErrorKind,
}

impl SmilesError {
    fn new(offset: usize, kind: SmilesErrorKind) -> Self {
        SmilesError { offset, kind }
    }
}

#[derive(Debug, Clone, Copy)]
struct BondSpec {
    order: BondOrder,
    stereo: BondStereo,
}

struct RingOpening {
    atom: usize,
    bond: Option<BondSpec>,
    offset: usize,
}

struct Parser<'a> {
    input: &'a [u8],
    base: usize,
    pos: usize,
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    prev: Option<usize>,
    pending: Option<(BondSpec, usize)>,
    branches: Vec<(usize, usize)>,
    rings: HashMap<u16, RingOpening>,
}

/// Parses a SMILES string into a [`Molecule`]. Surrounding ASCII
/// whitespace is ignored; offsets in errors refer to the untrimmed text.
pub fn parse_smiles(text: &str) -> Result<Molecule, SmilesError> {
    let trimmed = text.trim_matches(|c: char| c.is_ascii_whitespace());
    if trimmed.is_empty() {
        return Err(SmilesError::new(0, SmilesErrorKind::EmptyInput));
    }
    let base = trimmed.as_ptr() as usize - text.as_ptr() as usize;
    let mut parser = Parser {
        input: trimmed.as_bytes(),
        base,
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
        prev: None,
        pending: None,
        branches: Vec::new(),
        rings: HashMap::new(),
    };
    parser.run()?;
    Ok(Molecule::assemble(parser.atoms, parser.bonds, trimmed))
}

impl<'a> Parser<'a> {
    fn err(&self, offset: usize, kind: SmilesErrorKind) -> SmilesError {
        SmilesError::new(self.base + offset, kind)
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    let Some(prev) = self.prev else {
                        return Err(self.err(start, SmilesErrorKind::MissingAtom));
                    };
                    if self.pending.is_some() {
                        return Err(self.err(start, SmilesErrorKind::DanglingBond));
                    }
                    self.branches.push((prev, start));
                    self.pos += 1;
                }
                b')' => {
                    if self.pending.is_some() {
                        return Err(self.err(start, SmilesErrorKind::DanglingBond));
                    }
                    let Some((atom, _)) = self.branches.pop() else {
                        return Err(self.err(start, SmilesErrorKind::UnbalancedParen));
                    };
                    self.prev = Some(atom);
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if self.pending.is_some() {
                        return Err(self.err(start, SmilesErrorKind::DoubleBondSymbol));
                    }
                    let spec = match c {
                        b'-' => BondSpec { order: BondOrder::Single, stereo: BondStereo::None },
                        b'=' => BondSpec { order: BondOrder::Double, stereo: BondStereo::None },
                        b'#' => BondSpec { order: BondOrder::Triple, stereo: BondStereo::None },
                        b':' => BondSpec { order: BondOrder::Aromatic, stereo: BondStereo::None },
                        b'/' => BondSpec { order: BondOrder::Single, stereo: BondStereo::Up },
                        _ => BondSpec { order: BondOrder::Single, stereo: BondStereo::Down },
                    };
                    self.pending = Some((spec, start));
                    self.pos += 1;
                }
                b'$' => return Err(self.err(start, SmilesErrorKind::UnsupportedBond('$'))),
                b'.' => {
                    if self.pending.is_some() {
                        return Err(self.err(start, SmilesErrorKind::DanglingBond));
                    }
                    self.prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' => {
                    self.pos += 1;
                    self.ring_bond(u16::from(c - b'0'), start)?;
                }
                b'%' => {
                    let digits = self.input.get(self.pos + 1..self.pos + 3);
                    let number = match digits {
                        Some(&[d1, d2]) if d1.is_ascii_digit() && d2.is_ascii_digit() => {
                            u16::from(d1 - b'0') * 10 + u16::from(d2 - b'0')
                        }
                        _ => return Err(self.err(start, SmilesErrorKind::UnexpectedChar('%'))),
                    };
                    self.pos += 3;
                    self.ring_bond(number, start)?;
                }
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.add_atom(atom, start)?;
                }
                c if c.is_ascii_alphabetic() => {
                    let atom = self.organic_atom()?;
                    self.add_atom(atom, start)?;
                }
                other => {
                    return Err(self.err(start, SmilesErrorKind::UnexpectedChar(other as char)));
                }
            }
        }

        if let Some((_, offset)) = self.pending {
            return Err(self.err(offset, SmilesErrorKind::DanglingBond));
        }
        if let Some(&(_, offset)) = self.branches.last() {
            return Err(self.err(offset, SmilesErrorKind::UnbalancedParen));
        }
        if let Some((&number, opening)) = self.rings.iter().min_by_key(|(_, o)| o.offset) {
            return Err(self.err(opening.offset, SmilesErrorKind::UnbalancedRing(number)));
        }
        Ok(())
    }

    fn add_atom(&mut self, atom: Atom, offset: usize) -> Result<(), SmilesError> {
        let idx = self.atoms.len();
        self.atoms.push(atom);
        if let Some(prev) = self.prev {
            let spec = self
                .pending
                .take()
                .map(|(s, _)| s)
                .unwrap_or_else(|| self.default_bond(prev, idx));
            self.push_bond(prev, idx, spec, offset)?;
        } else if let Some((_, off)) = self.pending {
            // bond symbol at the start of a component
            return Err(self.err(off, SmilesErrorKind::MissingAtom));
        }
        self.prev = Some(idx);
        Ok(())
    }

    fn default_bond(&self, a: usize, b: usize) -> BondSpec {
        let order = if self.atoms[a].aromatic && self.atoms[b].aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        };
        BondSpec { order, stereo: BondStereo::None }
    }

    fn push_bond(&mut self, a: usize, b: usize, spec: BondSpec, offset: usize) -> Result<(), SmilesError> {
        let duplicate = a == b
            || self
                .bonds
                .iter()
                .any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a));
        if duplicate {
            return Err(self.err(offset, SmilesErrorKind::DuplicateBond));
        }
        self.bonds.push(Bond { a, b, order: spec.order, stereo: spec.stereo });
        Ok(())
    }

    fn ring_bond(&mut self, number: u16, offset: usize) -> Result<(), SmilesError> {
        let Some(current) = self.prev else {
            return Err(self.err(offset, SmilesErrorKind::MissingAtom));
        };
        let here = self.pending.take().map(|(s, _)| s);
        match self.rings.remove(&number) {
            Some(opening) => {
                let spec = match (opening.bond, here) {
                    (Some(x), Some(y)) if x.order != y.order => {
                        return Err(self.err(offset, SmilesErrorKind::RingBondMismatch));
                    }
                    (Some(x), _) => x,
                    (None, Some(y)) => y,
                    (None, None) => self.default_bond(opening.atom, current),
                };
                self.push_bond(opening.atom, current, spec, offset)
            }
            None => {
                self.rings.insert(number, RingOpening { atom: current, bond: here, offset });
                Ok(())
            }
        }
    }

    fn organic_atom(&mut self) -> Result<Atom, SmilesError> {
        let start = self.pos;
        let rest = &self.input[self.pos..];
        let (element, aromatic, len) = match rest {
            [b'C', b'l', ..] => (Element::CL, false, 2),
            [b'B', b'r', ..] => (Element::BR, false, 2),
            [b'B', ..] => (Element::B, false, 1),
            [b'C', ..] => (Element::C, false, 1),
            [b'N', ..] => (Element::N, false, 1),
            [b'O', ..] => (Element::O, false, 1),
            [b'P', ..] => (Element::P, false, 1),
            [b'S', ..] => (Element::S, false, 1),
            [b'F', ..] => (Element::F, false, 1),
            [b'I', ..] => (Element::I, false, 1),
            [b'b', ..] => (Element::B, true, 1),
            [b'c', ..] => (Element::C, true, 1),
            [b'n', ..] => (Element::N, true, 1),
            [b'o', ..] => (Element::O, true, 1),
            [b'p', ..] => (Element::P, true, 1),
            [b's', ..] => (Element::S, true, 1),
            _ => {
                let end = (start + 2).min(self.input.len());
                let symbol = String::from_utf8_lossy(&self.input[start..end]).into_owned();
                return Err(self.err(start, SmilesErrorKind::UnknownElement(symbol)));
            }
        };
        self.pos += len;
        Ok(Atom {
            element,
            formal_charge: 0,
            aromatic,
            explicit_h: 0,
            implicit_h: 0,
            isotope: None,
            chirality: Chirality::None,
            bracket: false,
        })
    }

    fn read_number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        std::str::from_utf8(&self.input[start..self.pos]).ok()?.parse().ok()
    }

    fn bracket_atom(&mut self) -> Result<Atom, SmilesError> {
        let open = self.pos;
        self.pos += 1;

        let isotope = match self.read_number() {
            Some(0) => return Err(self.err(open, SmilesErrorKind::BadBracket("isotope must be positive"))),
            Some(v) if v <= u32::from(u16::MAX) => Some(v as u16),
            Some(_) => return Err(self.err(open, SmilesErrorKind::BadBracket("isotope too large"))),
            None => None,
        };

        let sym_start = self.pos;
        let rest = &self.input[self.pos..];
        let (element, aromatic, len) = match rest {
            [b's', b'e', ..] => (Element::from_symbol("Se"), true, 2),
            [b'a', b's', ..] => (Element::from_symbol("As"), true, 2),
            [c @ (b'b' | b'c' | b'n' | b'o' | b'p' | b's'), ..] => {
                let upper = (c.to_ascii_uppercase() as char).to_string();
                (Element::from_symbol(&upper), true, 1)
            }
            [u, l, ..] if u.is_ascii_uppercase() && l.is_ascii_lowercase() => {
                let two = std::str::from_utf8(&rest[..2]).unwrap_or("");
                match Element::from_symbol(two) {
                    Some(e) => (Some(e), false, 2),
                    None => (Element::from_symbol(&(*u as char).to_string()), false, 1),
                }
            }
            [u, ..] if u.is_ascii_uppercase() => {
                (Element::from_symbol(&(*u as char).to_string()), false, 1)
            }
            [b']', ..] | [] => return Err(self.err(open, SmilesErrorKind::BadBracket("missing element"))),
            _ => (None, false, 1),
        };
        let Some(element) = element else {
            let end = (sym_start + len.max(1)).min(self.input.len());
            let symbol = String::from_utf8_lossy(&self.input[sym_start..end]).into_owned();
            return Err(self.err(sym_start, SmilesErrorKind::UnknownElement(symbol)));
        };
        self.pos += len;

        let mut chirality = Chirality::None;
        if self.peek() == Some(b'@') {
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
                chirality = Chirality::Clockwise;
            } else {
                chirality = Chirality::CounterClockwise;
            }
        }

        let mut explicit_h = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            explicit_h = match self.read_number() {
                Some(n) if n <= 9 => n as u8,
                Some(_) => return Err(self.err(open, SmilesErrorKind::BadBracket("hydrogen count too large"))),
                None => 1,
            };
        }

        let mut formal_charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let charge_start = self.pos;
            self.pos += 1;
            let unit = if sign == b'+' { 1 } else { -1 };
            if let Some(n) = self.read_number() {
                formal_charge = unit * n as i32;
            } else {
                let mut count = 1;
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    count += 1;
                }
                formal_charge = unit * count;
            }
            if matches!(self.peek(), Some(b'+' | b'-')) || !(-15..=15).contains(&formal_charge) {
                return Err(self.err(charge_start, SmilesErrorKind::BadCharge));
            }
        }

        if self.peek() == Some(b':') {
            self.pos += 1;
            if self.read_number().is_none() {
                return Err(self.err(open, SmilesErrorKind::BadBracket("atom class needs digits")));
            }
        }

        if self.peek() != Some(b']') {
            return Err(self.err(open, SmilesErrorKind::BadBracket("expected `]`")));
        }
        self.pos += 1;

        if aromatic && !element.can_be_aromatic() {
            return Err(self.err(sym_start, SmilesErrorKind::UnknownElement(element.symbol().to_lowercase())));
        }

        Ok(Atom {
            element,
            formal_charge: formal_charge as i8,
            aromatic,
            explicit_h,
            implicit_h: 0,
            isotope,
            chirality,
            bracket: true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind(text: &str) -> SmilesErrorKind {
        parse_smiles(text).unwrap_err().kind
    }

    #[test]
    fn methane() {
        let m = parse_smiles("C").unwrap();
        assert_eq!(m.atom_count(), 1);
        assert!(m.bonds().is_empty());
        assert_eq!(m.atoms()[0].implicit_h, 4);
    }

    #[test]
    fn benzene_ring_closure() {
        let m = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(m.atom_count(), 6);
        assert_eq!(m.bonds().len(), 6);
        assert!(m.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
        assert!(m.atoms().iter().all(|a| a.aromatic && a.implicit_h == 1));
        assert_eq!(m.ring_count(), 1);
        assert!((0..6).all(|i| m.smallest_ring_size(i) == Some(6)));
    }

    #[test]
    fn example_ligand() {
        let m = parse_smiles("N[C@H]1C[C@H]1c1ccc(NC(=O)c2ccccc2)cc1").unwrap();
        assert_eq!(m.heavy_atom_count(), 19);
        assert_eq!(m.ring_count(), 3);
        assert_eq!(m.atoms()[1].chirality, Chirality::CounterClockwise);
        assert_eq!(m.atoms()[1].explicit_h, 1);
        assert_eq!(m.smallest_ring_size(1), Some(3));
        assert!(!m.is_in_ring(0));
        assert!(m.warnings().is_empty());
    }

    #[test]
    fn ring_reuse_and_two_digit_closures() {
        let m = parse_smiles("C1CC1C1CC1").unwrap();
        assert_eq!(m.ring_count(), 2);
        let m = parse_smiles("C%10CCCC%10").unwrap();
        assert_eq!(m.ring_count(), 1);
        assert_eq!(m.smallest_ring_size(0), Some(5));
    }

    #[test]
    fn bond_symbols_and_hydrogens() {
        let m = parse_smiles("C=CC#N").unwrap();
        let orders: Vec<_> = m.bonds().iter().map(|b| b.order).collect();
        assert_eq!(orders, [BondOrder::Double, BondOrder::Single, BondOrder::Triple]);
        let h: Vec<_> = m.atoms().iter().map(|a| a.implicit_h).collect();
        assert_eq!(h, [2, 1, 0, 0]);

        let m = parse_smiles("CS(=O)(=O)C").unwrap();
        assert_eq!(m.atoms()[1].implicit_h, 0);
        let m = parse_smiles("OP(=O)(O)O").unwrap();
        assert_eq!(m.atoms()[1].implicit_h, 0);
        assert!(m.warnings().is_empty());
    }

    #[test]
    fn aromatic_exocyclic_double_bond() {
        let m = parse_smiles("O=c1cc[nH]cc1").unwrap();
        assert!(m.warnings().is_empty());
        assert_eq!(m.atoms()[1].implicit_h, 0);
        assert_eq!(m.atoms()[2].implicit_h, 1);
        assert!(parse_smiles("Cn1cnc2c1c(=O)[nH]c(=O)n2C").unwrap().warnings().is_empty());
    }

    #[test]
    fn aromatic_heteroatoms() {
        let m = parse_smiles("c1ccncc1").unwrap();
        assert_eq!(m.atoms()[3].implicit_h, 0);
        let m = parse_smiles("c1ccoc1").unwrap();
        assert_eq!(m.atoms()[3].implicit_h, 0);
        let m = parse_smiles("c1cc[nH]c1").unwrap();
        assert_eq!(m.atoms()[3].total_h(), 1);
        // naphthalene fusion carbons
        let m = parse_smiles("c1ccc2ccccc2c1").unwrap();
        assert_eq!(m.atoms()[3].implicit_h, 0);
        assert_eq!(m.atoms()[4].implicit_h, 1);
    }

    #[test]
    fn bracket_atoms() {
        let m = parse_smiles("[13CH3][NH3+].[Cl-]").unwrap();
        let a = &m.atoms()[0];
        assert_eq!((a.isotope, a.explicit_h, a.implicit_h), (Some(13), 3, 0));
        assert_eq!(m.atoms()[1].formal_charge, 1);
        assert_eq!(m.atoms()[2].formal_charge, -1);
        assert_eq!(m.component_count(), 2);
        let m = parse_smiles("[Fe++]").unwrap();
        assert_eq!(m.atoms()[0].formal_charge, 2);
        let m = parse_smiles("[O-2]").unwrap();
        assert_eq!(m.atoms()[0].formal_charge, -2);
        let m = parse_smiles("[CH2:7]").unwrap();
        assert_eq!(m.atoms()[0].explicit_h, 2);
        let m = parse_smiles("[se]1cccc1").unwrap();
        assert!(m.atoms()[0].aromatic);
        let m = parse_smiles("[Co]").unwrap();
        assert_eq!(m.atoms()[0].element.symbol(), "Co");
    }

    #[test]
    fn stereo_bonds_are_single() {
        let m = parse_smiles("F/C=C\\F").unwrap();
        assert_eq!(m.bonds()[0].stereo, BondStereo::Up);
        assert_eq!(m.bonds()[2].stereo, BondStereo::Down);
        assert_eq!(m.bonds()[2].order, BondOrder::Single);
    }

    #[test]
    fn hypervalent_carbon_warns() {
        let m = parse_smiles("CC(C)(C)(C)C").unwrap();
        assert_eq!(m.atoms()[1].implicit_h, 0);
        assert_eq!(m.warnings().len(), 1);
        assert_eq!(m.warnings()[0].atom, 1);
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse_smiles("C1CC").unwrap_err();
        assert_eq!(e.kind, SmilesErrorKind::UnbalancedRing(1));
        assert_eq!(e.offset, 1);
        assert_eq!(kind(""), SmilesErrorKind::EmptyInput);
        assert_eq!(kind("   "), SmilesErrorKind::EmptyInput);
        assert_eq!(kind("CC(C"), SmilesErrorKind::UnbalancedParen);
        assert_eq!(kind("CC)C"), SmilesErrorKind::UnbalancedParen);
        assert!(matches!(kind("CXC"), SmilesErrorKind::UnknownElement(_)));
        assert!(matches!(kind("[Xx]"), SmilesErrorKind::UnknownElement(_)));
        assert_eq!(kind("[N+-]"), SmilesErrorKind::BadCharge);
        assert!(matches!(kind("[NH4"), SmilesErrorKind::BadBracket(_)));
        assert!(matches!(kind("[]"), SmilesErrorKind::BadBracket(_)));
        assert_eq!(kind("CC="), SmilesErrorKind::DanglingBond);
        assert_eq!(kind("C11"), SmilesErrorKind::DuplicateBond);
        assert_eq!(kind("C12CC12"), SmilesErrorKind::DuplicateBond);
        let e = parse_smiles("  C1CC").unwrap_err();
        assert_eq!(e.offset, 3);
    }

    #[test]
    fn ring_bond_symbol_on_either_side() {
        let m = parse_smiles("C=1CCC1").unwrap();
        assert_eq!(m.bonds().last().unwrap().order, BondOrder::Double);
        let m = parse_smiles("C1CCC=1").unwrap();
        assert_eq!(m.bonds().last().unwrap().order, BondOrder::Double);
        assert_eq!(kind("C=1CCC#1"), SmilesErrorKind::RingBondMismatch);
    }
}
