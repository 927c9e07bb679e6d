//! Molecular graphs from SMILES and circular fingerprints over them.

mod ecfp;
mod element;
mod molecule;
mod smiles;
mod writer;

pub use ecfp::{
    atom_identifiers, ecfp, environment_ids, Fingerprint, FingerprintError, StableHasher,
    DEFAULT_RADIUS, DEFAULT_WIDTH,
};
pub use element::Element;
pub use molecule::{Atom, Bond, BondOrder, BondStereo, Chirality, Molecule, ValenceWarning};
pub use smiles::{parse_smiles, SmilesError, SmilesErrorKind};
pub use writer::{write_smiles, WriteOptions};
