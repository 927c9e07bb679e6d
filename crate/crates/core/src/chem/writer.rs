//! Non-canonical SMILES writer. Traversal starts from a caller-chosen root,
//! which makes it possible to produce many spellings of the same graph.
//! Stereo markers are not written.

use super::element::Element;
use super::molecule::{Atom, BondOrder, Molecule};

#[derive(Debug, Clone, Copy, Default)]
pub struct WriteOptions {
    /// First atom of the traversal; other components follow in index order.
    pub root: usize,
    /// Visit neighbors in reverse bond order, changing branch layout.
    pub reverse_neighbors: bool,
}

pub fn write_smiles(mol: &Molecule, options: WriteOptions) -> String {
    let n = mol.atom_count();
    if n == 0 {
        return String::new();
    }
    let mut plan = Plan {
        mol,
        reverse: options.reverse_neighbors,
        visited: vec![false; n],
        bond_used: vec![false; mol.bonds().len()],
        children: vec![Vec::new(); n],
        ring_bonds: vec![Vec::new(); n],
    };

    let mut roots = vec![options.root.min(n - 1)];
    roots.extend(0..n);
    let mut out = String::new();
    let mut numbering = RingNumbers::default();
    for root in roots {
        if plan.visited[root] {
            continue;
        }
        plan.visit(root, None);
        if !out.is_empty() {
            out.push('.');
        }
        plan.emit(root, &mut out, &mut numbering);
    }
    out
}

struct Plan<'a> {
    mol: &'a Molecule,
    reverse: bool,
    visited: Vec<bool>,
    bond_used: Vec<bool>,
    /// (child, bond) in traversal order.
    children: Vec<Vec<(usize, usize)>>,
    /// Ring-closure bonds touching each atom, in discovery order.
    ring_bonds: Vec<Vec<usize>>,
}

#[derive(Default)]
struct RingNumbers {
    in_use: Vec<usize>,
    assigned: std::collections::HashMap<usize, usize>,
}

impl RingNumbers {
    fn open(&mut self, bond: usize) -> usize {
        let number = (1..).find(|k| !self.in_use.contains(k)).unwrap_or(1);
        self.in_use.push(number);
        self.assigned.insert(bond, number);
        number
    }

    fn close(&mut self, bond: usize) -> Option<usize> {
        let number = self.assigned.remove(&bond)?;
        self.in_use.retain(|&k| k != number);
        Some(number)
    }
}

impl<'a> Plan<'a> {
    fn neighbor_order(&self, atom: usize) -> Vec<(usize, usize)> {
        let mut list = self.mol.neighbors(atom).to_vec();
        if self.reverse {
            list.reverse();
        }
        list
    }

    fn visit(&mut self, atom: usize, parent_bond: Option<usize>) {
        self.visited[atom] = true;
        for (next, bond) in self.neighbor_order(atom) {
            if Some(bond) == parent_bond || self.bond_used[bond] {
                continue;
            }
            self.bond_used[bond] = true;
            if self.visited[next] {
                self.ring_bonds[next].push(bond);
                self.ring_bonds[atom].push(bond);
            } else {
                self.children[atom].push((next, bond));
                self.visit(next, Some(bond));
            }
        }
    }

    fn emit(&self, atom: usize, out: &mut String, numbers: &mut RingNumbers) {
        write_atom(&self.mol.atoms()[atom], out);
        for &bond in &self.ring_bonds[atom] {
            match numbers.close(bond) {
                Some(k) => push_ring_number(out, k),
                None => {
                    let b = self.mol.bonds()[bond];
                    out.push_str(bond_symbol(self.mol, b.a, b.b, b.order));
                    let k = numbers.open(bond);
                    push_ring_number(out, k);
                }
            }
        }
        let children = &self.children[atom];
        for (i, &(child, bond)) in children.iter().enumerate() {
            let last = i + 1 == children.len();
            if !last {
                out.push('(');
            }
            out.push_str(bond_symbol(self.mol, atom, child, self.mol.bonds()[bond].order));
            self.emit(child, out, numbers);
            if !last {
                out.push(')');
            }
        }
    }
}

fn push_ring_number(out: &mut String, k: usize) {
    if k < 10 {
        out.push_str(&k.to_string());
    } else {
        out.push_str(&format!("%{k:02}"));
    }
}

fn bond_symbol(mol: &Molecule, a: usize, b: usize, order: BondOrder) -> &'static str {
    let both_aromatic = mol.atoms()[a].aromatic && mol.atoms()[b].aromatic;
    match order {
        BondOrder::Single if both_aromatic => "-",
        BondOrder::Single => "",
        BondOrder::Aromatic if both_aromatic => "",
        BondOrder::Aromatic => ":",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
    }
}

fn write_atom(atom: &Atom, out: &mut String) {
    let symbol = if atom.aromatic {
        atom.element.symbol().to_lowercase()
    } else {
        atom.element.symbol().to_string()
    };
    let organic = !atom.bracket && atom.element.organic_valences().is_some() && atom.element != Element::H;
    if organic {
        out.push_str(&symbol);
        return;
    }
    out.push('[');
    if let Some(iso) = atom.isotope {
        out.push_str(&iso.to_string());
    }
    out.push_str(&symbol);
    match atom.explicit_h {
        0 => {}
        1 => out.push('H'),
        h => out.push_str(&format!("H{h}")),
    }
    match atom.formal_charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        c if c > 0 => out.push_str(&format!("+{c}")),
        c => out.push_str(&format!("-{}", -c)),
    }
    out.push(']');
}
