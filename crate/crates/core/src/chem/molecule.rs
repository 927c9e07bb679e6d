use super::element::Element;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Chirality {
    #[default]
    None,
    /// `@@`
    Clockwise,
    /// `@`
    CounterClockwise,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub element: Element,
    pub formal_charge: i8,
    pub aromatic: bool,
    /// Hydrogen count written inside a bracket atom.
    pub explicit_h: u8,
    /// Hydrogens implied by standard valence; always 0 for bracket atoms.
    pub implicit_h: u8,
    pub isotope: Option<u16>,
    pub chirality: Chirality,
    /// Written in bracket form (`[...]`) in the source.
    pub bracket: bool,
}

impl Atom {
    pub fn total_h(&self) -> u8 {
        self.explicit_h + self.implicit_h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Stable code used in fingerprint hashing.
    pub fn code(self) -> u64 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }

    /// Contribution to the explicit valence of either endpoint.
    pub(crate) fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }
}

/// Directional marker on a single bond (`/` or `\`). Carried, not interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BondStereo {
    #[default]
    None,
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    pub stereo: BondStereo,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// Raised when an organic-subset atom carries more bonds than any allowed
/// valence. Its implicit hydrogen count is set to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValenceWarning {
    pub atom: usize,
    pub element: Element,
    pub bond_valence: u8,
}

/// Molecular graph parsed from a SMILES string. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    in_ring: Vec<bool>,
    warnings: Vec<ValenceWarning>,
    source_smiles: String,
}

impl Molecule {
    /// Builds the derived tables (adjacency, ring membership, implicit
    /// hydrogens). Bond endpoints must already be validated.
    pub(crate) fn assemble(mut atoms: Vec<Atom>, bonds: Vec<Bond>, source: &str) -> Molecule {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (i, bond) in bonds.iter().enumerate() {
            adjacency[bond.a].push((bond.b, i));
            adjacency[bond.b].push((bond.a, i));
        }

        let mut warnings = Vec::new();
        for (idx, atom) in atoms.iter_mut().enumerate() {
            if atom.bracket {
                atom.implicit_h = 0;
                continue;
            }
            let Some(valences) = atom.element.organic_valences() else {
                continue;
            };
            let mut used: u8 = adjacency[idx]
                .iter()
                .map(|&(_, b)| bonds[b].order.valence())
                .sum();
            let has_double = adjacency[idx].iter().any(|&(_, b)| bonds[b].order == BondOrder::Double);
            if atom.aromatic && !has_double {
                // one valence unit goes to the delocalized pi system, unless
                // an exocyclic double bond (as in pyridones) already holds it
                match atom.element {
                    Element::B | Element::C => used += 1,
                    Element::N | Element::P if used < 3 => used += 1,
                    _ => {}
                }
            }
            match valences.iter().find(|&&v| v >= used) {
                Some(&v) => atom.implicit_h = v - used,
                None => {
                    atom.implicit_h = 0;
                    warnings.push(ValenceWarning {
                        atom: idx,
                        element: atom.element,
                        bond_valence: used,
                    });
                }
            }
        }

        let in_ring = ring_atoms(atoms.len(), &bonds, &adjacency);
        Molecule {
            atoms,
            bonds,
            adjacency,
            in_ring,
            warnings,
            source_smiles: source.to_string(),
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Atoms other than hydrogen.
    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element != Element::H).count()
    }

    pub fn source_smiles(&self) -> &str {
        &self.source_smiles
    }

    pub fn warnings(&self) -> &[ValenceWarning] {
        &self.warnings
    }

    /// `(neighbor, bond index)` pairs in bond insertion order.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn is_in_ring(&self, atom: usize) -> bool {
        self.in_ring[atom]
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.atoms.len()];
        let mut count = 0;
        for start in 0..self.atoms.len() {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }

    /// Cyclomatic number: the size of any cycle basis.
    pub fn ring_count(&self) -> usize {
        self.bonds.len() + self.component_count() - self.atoms.len()
    }

    /// Length of the shortest cycle through `atom`, if any.
    pub fn smallest_ring_size(&self, atom: usize) -> Option<usize> {
        if !self.in_ring[atom] {
            return None;
        }
        // shortest cycle through `atom` = min over incident bonds (atom, v)
        // of 1 + shortest path v -> atom avoiding that bond
        let mut best: Option<usize> = None;
        for &(start, skip) in &self.adjacency[atom] {
            let mut dist = vec![usize::MAX; self.atoms.len()];
            let mut queue = std::collections::VecDeque::new();
            dist[start] = 0;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                if u == atom {
                    break;
                }
                for &(v, b) in &self.adjacency[u] {
                    if b != skip && dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if dist[atom] != usize::MAX {
                let len = dist[atom] + 1;
                best = Some(best.map_or(len, |b| b.min(len)));
            }
        }
        best
    }
}

/// Marks atoms incident to at least one non-bridge bond.
fn ring_atoms(n: usize, bonds: &[Bond], adjacency: &[Vec<(usize, usize)>]) -> Vec<bool> {
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_bridge = vec![false; bonds.len()];
    let mut timer = 0;

    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // iterative Tarjan: (node, parent bond, next neighbor index)
        let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(root, None, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (u, parent_bond, ref mut next)) = stack.last_mut() {
            if *next < adjacency[u].len() {
                let (v, b) = adjacency[u][*next];
                *next += 1;
                if Some(b) == parent_bond {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, Some(b), 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let (Some(&(p, _, _)), Some(b)) = (stack.last(), parent_bond) {
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        is_bridge[b] = true;
                    }
                }
            }
        }
    }

    let mut in_ring = vec![false; n];
    for (i, bond) in bonds.iter().enumerate() {
        if !is_bridge[i] {
            in_ring[bond.a] = true;
            in_ring[bond.b] = true;
        }
    }
    in_ring
}
