//! Scaffold extraction: iteratively strip degree-one atoms until only the
//! ring systems and their linkers remain (the graph 2-core), then pull back
//! exocyclic atoms attached to a retained atom by a bond of order two or
//! higher (so a carbonyl on a ring stays part of the scaffold). An acyclic
//! molecule yields the empty scaffold.

use super::{BondOrder, Molecule};
use alloc::vec;
use alloc::vec::Vec;

pub fn murcko_scaffold(mol: &Molecule) -> Molecule {
    let n = mol.atoms.len();
    let adj = mol.adjacency();

    // 2-core by repeated leaf removal; isolated atoms vanish too.
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut queue: Vec<usize> = (0..n).filter(|&i| degree[i] <= 1).collect();
    while let Some(v) = queue.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for &(w, _) in &adj[v] {
            if alive[w] {
                degree[w] -= 1;
                if degree[w] <= 1 {
                    queue.push(w);
                }
            }
        }
    }

    // Pull back multiply-bonded exocyclic atoms, cascading along chains of
    // such bonds so the scaffold is a fixed point of this function.
    let mut retained = alive;
    loop {
        let mut changed = false;
        for bond in &mol.bonds {
            if matches!(bond.order, BondOrder::Single | BondOrder::Aromatic) {
                continue;
            }
            if retained[bond.a] != retained[bond.b] {
                retained[bond.a] = true;
                retained[bond.b] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut scaffold = induced_subgraph(mol, &retained);
    // Attachment points lost a substituent; refill their hydrogen counts so
    // toluene's ring keys identically to benzene. Bracket atoms keep the
    // count they wrote.
    scaffold.assign_implicit_hydrogens();
    scaffold
}

/// The sub-molecule on the atoms flagged `true`, with indices remapped in
/// ascending order. Derived graphs carry no source text.
fn induced_subgraph(mol: &Molecule, keep: &[bool]) -> Molecule {
    let mut remap = vec![usize::MAX; mol.atoms.len()];
    let mut atoms = Vec::new();
    for (i, atom) in mol.atoms.iter().enumerate() {
        if keep[i] {
            remap[i] = atoms.len();
            atoms.push(atom.clone());
        }
    }
    let bonds = mol
        .bonds
        .iter()
        .filter(|b| keep[b.a] && keep[b.b])
        .map(|b| super::Bond {
            a: remap[b.a],
            b: remap[b.b],
            order: b.order,
        })
        .collect();
    Molecule {
        atoms,
        bonds,
        source_smiles: alloc::string::String::new(),
        clamped_valence_atoms: Vec::new(),
    }
}
