//! Implicit hydrogen filling. Organic-subset atoms receive default valence
//! minus their bond-order sum (aromatic bonds count 1.5; a fractional sum is
//! floored). Bracket atoms keep exactly the hydrogen count they wrote.

use super::Molecule;

pub fn assign_implicit_hydrogens(mol: &mut Molecule) {
    let sums = mol.bond_order_sums();
    mol.clamped_valence_atoms.clear();
    for (i, atom) in mol.atoms.iter_mut().enumerate() {
        if let Some(h) = atom.explicit_h {
            atom.implicit_h = h;
            continue;
        }
        let default = atom.element.default_valence() as i64;
        // Floor with a tolerance so 1.5 + 1.5 lands exactly on 3.
        let used = (sums[i] + 1e-9) as i64;
        let free = default - used;
        if free >= 0 {
            atom.implicit_h = free as u32;
        } else {
            atom.implicit_h = 0;
            mol.clamped_valence_atoms.push(i);
        }
    }
}
