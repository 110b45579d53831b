//! Canonical graph key: iterative neighborhood refinement, with
//! individualization when symmetry leaves color classes unresolved, taking
//! the lexicographically smallest rendering over all leaves. Two parses of
//! the same structure — atom order permuted, or Kekulé versus aromatic
//! notation after perception — produce byte-identical keys.
//!
//! Atom identity in the key: element, aromatic flag, formal charge, isotope
//! label, and hydrogen count. Explicit hydrogen graph atoms are ordinary
//! atoms, so `[H]O[H]` and `O` key differently by design.

use super::{BondOrder, Molecule};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

pub fn canonical_key(mol: &Molecule) -> String {
    if mol.atoms.is_empty() {
        return String::new();
    }
    let adj = mol.adjacency();
    let mut colors = initial_colors(mol);
    refine(mol, &adj, &mut colors);

    let mut best: Option<String> = None;
    search(mol, &adj, colors, &mut best);
    best.expect("at least one leaf")
}

fn bond_code(order: BondOrder) -> u8 {
    match order {
        BondOrder::Single => 1,
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
        BondOrder::Aromatic => 4,
    }
}

fn initial_colors(mol: &Molecule) -> Vec<usize> {
    let keys: Vec<(u8, bool, i32, u16, u32)> = mol
        .atoms
        .iter()
        .map(|a| {
            (
                a.element.atomic_number(),
                a.aromatic,
                a.formal_charge,
                a.isotope.unwrap_or(0),
                a.implicit_h,
            )
        })
        .collect();
    rank(&keys)
}

/// Dense ranks of the values' sort order.
fn rank<T: Ord + Clone>(values: &[T]) -> Vec<usize> {
    let mut distinct: Vec<T> = values.to_vec();
    distinct.sort();
    distinct.dedup();
    let index: BTreeMap<&T, usize> = distinct.iter().enumerate().map(|(i, v)| (v, i)).collect();
    values.iter().map(|v| index[v]).collect()
}

/// One refinement pass: an atom's new color is its old color plus the
/// multiset of (bond order, neighbor color) pairs. Iterates to a fixed
/// point; the partition only ever splits.
fn refine(mol: &Molecule, adj: &[Vec<(usize, usize)>], colors: &mut Vec<usize>) {
    loop {
        let before = class_count(colors);
        let signatures: Vec<(usize, Vec<(u8, usize)>)> = (0..mol.atoms.len())
            .map(|i| {
                let mut neighbors: Vec<(u8, usize)> = adj[i]
                    .iter()
                    .map(|&(w, bi)| (bond_code(mol.bonds[bi].order), colors[w]))
                    .collect();
                neighbors.sort_unstable();
                (colors[i], neighbors)
            })
            .collect();
        *colors = rank(&signatures);
        if class_count(colors) == before {
            return;
        }
    }
}

fn class_count(colors: &[usize]) -> usize {
    let mut seen: Vec<usize> = colors.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

fn search(
    mol: &Molecule,
    adj: &[Vec<(usize, usize)>],
    colors: Vec<usize>,
    best: &mut Option<String>,
) {
    if class_count(&colors) == mol.atoms.len() {
        let rendered = render(mol, &colors);
        if best.as_ref().is_none_or(|b| rendered < *b) {
            *best = Some(rendered);
        }
        return;
    }

    // Smallest color class with more than one member; splitting it is
    // isomorphism-invariant because colors are canonical ranks.
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &colors {
        *counts.entry(c).or_insert(0) += 1;
    }
    let target = *counts
        .iter()
        .find(|(_, &n)| n > 1)
        .expect("non-discrete coloring has a multi-member class")
        .0;

    for atom in 0..mol.atoms.len() {
        if colors[atom] != target {
            continue;
        }
        // Individualize: the chosen atom precedes the rest of its class.
        let mut branched: Vec<usize> = colors.iter().map(|&c| c * 2 + 1).collect();
        branched[atom] -= 1;
        let mut branched = rank(&branched);
        refine(mol, adj, &mut branched);
        search(mol, adj, branched, best);
    }
}

/// Text form of a discretely colored graph: atoms in color order, then bonds
/// between color positions, sorted.
fn render(mol: &Molecule, colors: &[usize]) -> String {
    let n = mol.atoms.len();
    let mut by_position = vec![usize::MAX; n];
    for (atom, &c) in colors.iter().enumerate() {
        by_position[c] = atom;
    }

    let mut out = String::new();
    for (pos, &atom_idx) in by_position.iter().enumerate() {
        if pos > 0 {
            out.push(',');
        }
        let a = &mol.atoms[atom_idx];
        out.push_str(a.element.symbol());
        if a.aromatic {
            out.push('~');
        }
        if a.formal_charge != 0 {
            let _ = write!(out, "{:+}", a.formal_charge);
        }
        if let Some(iso) = a.isotope {
            let _ = write!(out, "#{iso}");
        }
        let _ = write!(out, "H{}", a.implicit_h);
    }

    let mut edges: Vec<(usize, usize, u8)> = mol
        .bonds
        .iter()
        .map(|b| {
            let (x, y) = (colors[b.a], colors[b.b]);
            (x.min(y), x.max(y), bond_code(b.order))
        })
        .collect();
    edges.sort_unstable();
    out.push('|');
    for (i, (x, y, code)) in edges.iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        let _ = write!(out, "{x}-{y}:{code}");
    }
    out
}
