//! Aromaticity perception. An atom is aromatic when the source wrote it
//! lowercase, or when it sits on a six-membered carbon/nitrogen ring whose
//! bond orders strictly alternate single/double (a Kekulé ring). Perceived
//! rings have their bonds rewritten to aromatic so both notations of the
//! same structure match the same patterns.

use super::rings::cycle_bond_indices;
use super::{BondOrder, Element, Molecule};

pub fn perceive_aromaticity(mol: &mut Molecule) {
    let rings = mol.perceive_rings();
    let mut flip_atoms = alloc::vec::Vec::new();
    let mut flip_bonds = alloc::vec::Vec::new();

    for ring in &rings {
        if ring.len() != 6 {
            continue;
        }
        if !ring
            .iter()
            .all(|&a| matches!(mol.atoms[a].element, Element::C | Element::N))
        {
            continue;
        }
        let bond_indices = cycle_bond_indices(mol, ring);
        let orders: alloc::vec::Vec<BondOrder> =
            bond_indices.iter().map(|&bi| mol.bonds[bi].order).collect();
        let alternating = |start: BondOrder, next: BondOrder| {
            orders
                .iter()
                .enumerate()
                .all(|(i, &o)| o == if i % 2 == 0 { start } else { next })
        };
        if alternating(BondOrder::Single, BondOrder::Double)
            || alternating(BondOrder::Double, BondOrder::Single)
        {
            flip_atoms.extend(ring.iter().copied());
            flip_bonds.extend(bond_indices);
        }
    }

    for a in flip_atoms {
        mol.atoms[a].aromatic = true;
    }
    for bi in flip_bonds {
        mol.bonds[bi].order = BondOrder::Aromatic;
    }
}
