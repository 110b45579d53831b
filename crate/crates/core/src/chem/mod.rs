//! Molecular graphs: a SMILES-subset reader, perception passes (implicit
//! hydrogens, rings, aromaticity), descriptors, substructure search,
//! scaffolds, and a canonical graph key.

mod aromaticity;
mod canon;
mod descriptors;
mod elements;
mod hydrogens;
mod parser;
mod rings;
mod scaffold;
mod substructure;

pub use canon::canonical_key;
pub use descriptors::{compute_descriptors, molecular_weight, DescriptorSet, DESCRIPTOR_IDS};
pub use elements::Element;
pub use parser::{parse_smiles, SmilesError, SmilesErrorKind};
pub use scaffold::murcko_scaffold;
pub use substructure::{
    contains, match_substructure, MatchResult, SubstructureError, MAX_PATTERN_HEAVY_ATOMS,
};

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Bond multiplicity. Aromatic bonds contribute 1.5 to valence sums.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to an atom's bond-order sum.
    pub fn valence_units(self) -> f64 {
        match self {
            BondOrder::Single => 1.0,
            BondOrder::Double => 2.0,
            BondOrder::Triple => 3.0,
            BondOrder::Aromatic => 1.5,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
    pub formal_charge: i32,
    /// Mass number when the source wrote one (e.g. `[13C]`).
    pub isotope: Option<u16>,
    /// Hydrogen count written in a bracket atom; `None` for organic-subset
    /// atoms, whose count is derived.
    pub explicit_h: Option<u32>,
    /// Hydrogens not present as graph atoms. For bracket atoms this always
    /// equals `explicit_h`.
    pub implicit_h: u32,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            aromatic: false,
            formal_charge: 0,
            isotope: None,
            explicit_h: None,
            implicit_h: 0,
        }
    }

    /// Hydrogens carried by this atom that are not graph atoms.
    pub fn hydrogen_count(&self) -> u32 {
        self.implicit_h
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    /// The other endpoint, assuming `atom` is one of the two.
    pub fn partner(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// A molecular graph. Indices into `atoms` are stable identifiers; `bonds`
/// holds each edge once with `a < b` not guaranteed.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Molecule {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
    /// The source text this graph was read from; empty for derived graphs.
    pub source_smiles: String,
    /// Atom indices whose bond-order sum exceeded the default valence, so
    /// their implicit hydrogen count was clamped to zero.
    pub clamped_valence_atoms: Vec<usize>,
}

impl Molecule {
    pub fn empty() -> Molecule {
        Molecule {
            atoms: Vec::new(),
            bonds: Vec::new(),
            source_smiles: String::new(),
            clamped_valence_atoms: Vec::new(),
        }
    }

    /// Full reading pipeline: parse, fill implicit hydrogens, perceive
    /// aromatic rings written in Kekulé form.
    pub fn from_smiles(smiles: &str) -> Result<Molecule, SmilesError> {
        let mut mol = parse_smiles(smiles)?;
        mol.assign_implicit_hydrogens();
        mol.perceive_aromaticity();
        Ok(mol)
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Atoms other than hydrogen written as graph atoms.
    pub fn heavy_atom_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| a.element != Element::H)
            .map(|(i, _)| i)
    }

    /// Adjacency list: for each atom, `(neighbor, bond index)` pairs in bond
    /// insertion order.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = alloc::vec![Vec::new(); self.atoms.len()];
        for (bi, bond) in self.bonds.iter().enumerate() {
            adj[bond.a].push((bond.b, bi));
            adj[bond.b].push((bond.a, bi));
        }
        adj
    }

    /// Bond-order sum per atom (aromatic bonds count 1.5).
    pub fn bond_order_sums(&self) -> Vec<f64> {
        let mut sums = alloc::vec![0.0; self.atoms.len()];
        for bond in &self.bonds {
            let units = bond.order.valence_units();
            sums[bond.a] += units;
            sums[bond.b] += units;
        }
        sums
    }

    /// Connected-component label per atom plus the component count.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let adj = self.adjacency();
        let mut label = alloc::vec![usize::MAX; self.atoms.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.atoms.len() {
            if label[start] != usize::MAX {
                continue;
            }
            stack.push(start);
            label[start] = count;
            while let Some(v) = stack.pop() {
                for &(w, _) in &adj[v] {
                    if label[w] == usize::MAX {
                        label[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn assign_implicit_hydrogens(&mut self) {
        hydrogens::assign_implicit_hydrogens(self);
    }

    pub fn perceive_aromaticity(&mut self) {
        aromaticity::perceive_aromaticity(self);
    }

    /// Minimum cycle basis as ordered atom cycles. See `rings`.
    pub fn perceive_rings(&self) -> Vec<Vec<usize>> {
        rings::perceive_rings(self)
    }

    pub fn ring_count(&self) -> usize {
        let (_, components) = self.components();
        self.bonds.len() + components - self.atoms.len()
    }
}
