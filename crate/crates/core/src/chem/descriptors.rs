//! Shipped molecular descriptors. All nine are computed in one pass over a
//! perceived molecule (implicit hydrogens and aromaticity already assigned).

use super::rings::cycle_bond_indices;
use super::{BondOrder, Element, Molecule};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use serde::{Deserialize, Serialize};

/// Identifiers the rule language may reference, in canonical order.
pub const DESCRIPTOR_IDS: [&str; 9] = [
    "molecular_weight",
    "heavy_atom_count",
    "ring_count",
    "aromatic_ring_count",
    "hbd_count",
    "hba_count",
    "rotatable_bond_count",
    "halogen_count",
    "net_formal_charge",
];

/// Descriptor values keyed by identifier.
#[derive(Clone, PartialEq, Debug, Default, Serialize, Deserialize)]
pub struct DescriptorSet {
    values: BTreeMap<String, f64>,
}

impl DescriptorSet {
    pub fn get(&self, id: &str) -> Option<f64> {
        self.values.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Sum of atomic masses plus implicit hydrogens. Isotope labels use the
/// nuclide mass; everything else the standard atomic weight.
pub fn molecular_weight(mol: &Molecule) -> f64 {
    let h_weight = Element::H.standard_weight();
    mol.atoms
        .iter()
        .map(|a| {
            let own = match a.isotope {
                Some(mass_number) => a.element.isotope_mass(mass_number),
                None => a.element.standard_weight(),
            };
            own + a.implicit_h as f64 * h_weight
        })
        .sum()
}

pub fn compute_descriptors(mol: &Molecule) -> DescriptorSet {
    let rings = mol.perceive_rings();
    let ring_bonds: BTreeSet<usize> = rings
        .iter()
        .flat_map(|ring| cycle_bond_indices(mol, ring))
        .collect();
    let aromatic_rings = rings
        .iter()
        .filter(|ring| ring.iter().all(|&a| mol.atoms[a].aromatic))
        .count();

    // Hydrogens on an atom: implicit plus explicit H graph neighbors.
    let adj = mol.adjacency();
    let total_h = |i: usize| -> u32 {
        let neighbors = adj[i]
            .iter()
            .filter(|&&(w, _)| mol.atoms[w].element == Element::H)
            .count() as u32;
        mol.atoms[i].implicit_h + neighbors
    };
    let heavy_degree = |i: usize| -> usize {
        adj[i]
            .iter()
            .filter(|&&(w, _)| mol.atoms[w].element != Element::H)
            .count()
    };

    let mut hbd = 0usize;
    let mut hba = 0usize;
    let mut halogens = 0usize;
    let mut heavy = 0usize;
    let mut charge = 0i64;
    for (i, atom) in mol.atoms.iter().enumerate() {
        if atom.element != Element::H {
            heavy += 1;
        }
        if matches!(atom.element, Element::N | Element::O) {
            hba += 1;
            if total_h(i) > 0 {
                hbd += 1;
            }
        }
        if atom.element.is_halogen() {
            halogens += 1;
        }
        charge += atom.formal_charge as i64;
    }

    // A bond to a carbon that carries a double bond to oxygen, from nitrogen:
    // the amide linkage, excluded from rotatable bonds.
    let is_amide = |c: usize, n: usize| -> bool {
        mol.atoms[c].element == Element::C
            && mol.atoms[n].element == Element::N
            && adj[c].iter().any(|&(w, bi)| {
                mol.atoms[w].element == Element::O && mol.bonds[bi].order == BondOrder::Double
            })
    };
    let rotatable = mol
        .bonds
        .iter()
        .enumerate()
        .filter(|(bi, bond)| {
            bond.order == BondOrder::Single
                && !ring_bonds.contains(bi)
                && mol.atoms[bond.a].element != Element::H
                && mol.atoms[bond.b].element != Element::H
                && heavy_degree(bond.a) >= 2
                && heavy_degree(bond.b) >= 2
                && !is_amide(bond.a, bond.b)
                && !is_amide(bond.b, bond.a)
        })
        .count();

    let mut values = BTreeMap::new();
    values.insert("molecular_weight".to_string(), molecular_weight(mol));
    values.insert("heavy_atom_count".to_string(), heavy as f64);
    values.insert("ring_count".to_string(), mol.ring_count() as f64);
    values.insert("aromatic_ring_count".to_string(), aromatic_rings as f64);
    values.insert("hbd_count".to_string(), hbd as f64);
    values.insert("hba_count".to_string(), hba as f64);
    values.insert("rotatable_bond_count".to_string(), rotatable as f64);
    values.insert("halogen_count".to_string(), halogens as f64);
    values.insert("net_formal_charge".to_string(), charge as f64);
    DescriptorSet { values }
}

#[cfg(test)]
mod tests {
    use super::super::Molecule;
    use super::*;

    fn descriptors(smiles: &str) -> DescriptorSet {
        compute_descriptors(&Molecule::from_smiles(smiles).unwrap())
    }

    #[test]
    fn ids_cover_the_set() {
        let d = descriptors("CCO");
        for id in DESCRIPTOR_IDS {
            assert!(d.get(id).is_some(), "missing {id}");
        }
        assert_eq!(d.iter().count(), DESCRIPTOR_IDS.len());
    }

    #[test]
    fn ethanol_weight() {
        // C2H6O: 2 * 12.011 + 6 * 1.008 + 15.999 = 46.069
        assert!((descriptors("CCO").get("molecular_weight").unwrap() - 46.069).abs() < 1e-6);
    }

    #[test]
    fn benzene_weight_same_in_both_notations() {
        let a = descriptors("c1ccccc1").get("molecular_weight").unwrap();
        let b = descriptors("C1=CC=CC=C1").get("molecular_weight").unwrap();
        assert!((a - b).abs() < 1e-12);
        // C6H6: 6 * 12.011 + 6 * 1.008 = 78.114
        assert!((a - 78.114).abs() < 1e-6);
    }

    #[test]
    fn isotope_labels_change_the_weight() {
        let plain = descriptors("C").get("molecular_weight").unwrap();
        let labeled = descriptors("[13CH4]").get("molecular_weight").unwrap();
        assert!((plain - 16.043).abs() < 1e-6);
        assert!((labeled - (13.003 + 4.0 * 1.008)).abs() < 1e-6);
    }

    #[test]
    fn counts_on_aspirin() {
        // CC(=O)Oc1ccccc1C(=O)O
        let d = descriptors("CC(=O)Oc1ccccc1C(=O)O");
        assert_eq!(d.get("heavy_atom_count").unwrap(), 13.0);
        assert_eq!(d.get("ring_count").unwrap(), 1.0);
        assert_eq!(d.get("aromatic_ring_count").unwrap(), 1.0);
        assert_eq!(d.get("hba_count").unwrap(), 4.0);
        assert_eq!(d.get("hbd_count").unwrap(), 1.0);
        assert_eq!(d.get("halogen_count").unwrap(), 0.0);
        assert_eq!(d.get("net_formal_charge").unwrap(), 0.0);
    }

    #[test]
    fn rotatable_bonds() {
        // Butane: one central C-C bond rotates.
        assert_eq!(
            descriptors("CCCC").get("rotatable_bond_count").unwrap(),
            1.0
        );
        // Ethane: terminal bonds never count.
        assert_eq!(descriptors("CC").get("rotatable_bond_count").unwrap(), 0.0);
        // Cyclohexane: ring bonds never count.
        assert_eq!(
            descriptors("C1CCCCC1").get("rotatable_bond_count").unwrap(),
            0.0
        );
        // N-methylacetamide: the amide C-N bond is excluded, and bonds to
        // terminal methyls do not count.
        assert_eq!(
            descriptors("CC(=O)NC").get("rotatable_bond_count").unwrap(),
            0.0
        );
        // Biphenyl: the inter-ring bond rotates.
        assert_eq!(
            descriptors("c1ccccc1-c1ccccc1")
                .get("rotatable_bond_count")
                .unwrap(),
            1.0
        );
    }

    #[test]
    fn charged_species() {
        let d = descriptors("[NH4+].[Cl-]");
        assert_eq!(d.get("net_formal_charge").unwrap(), 0.0);
        assert_eq!(d.get("halogen_count").unwrap(), 1.0);
        let d = descriptors("C(=O)[O-]");
        assert_eq!(d.get("net_formal_charge").unwrap(), -1.0);
    }

    #[test]
    fn hbd_counts_explicit_hydrogen_neighbors() {
        // Hydroxyl written with an explicit H graph atom still donates.
        let d = descriptors("CO[H]");
        assert_eq!(d.get("hbd_count").unwrap(), 1.0);
    }
}
