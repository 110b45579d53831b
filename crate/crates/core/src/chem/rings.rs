//! Ring perception: a minimum cycle basis via Horton's candidate set (all
//! shortest-path-through-vertex cycles) reduced by Gaussian elimination over
//! GF(2) on edge incidence vectors. Deterministic: candidates are processed
//! in (length, edge-set) order.

use super::Molecule;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

/// Edge set of a cycle as a bitset over bond indices.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct EdgeBits(Vec<u64>);

impl EdgeBits {
    fn zeros(bond_count: usize) -> EdgeBits {
        EdgeBits(vec![0; bond_count.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn xor_assign(&mut self, other: &EdgeBits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    fn leading_bit(&self) -> Option<usize> {
        for (w, word) in self.0.iter().enumerate().rev() {
            if *word != 0 {
                return Some(w * 64 + 63 - word.leading_zeros() as usize);
            }
        }
        None
    }
}

/// Ordered atom cycles forming a minimum cycle basis. The basis size always
/// equals `bonds - atoms + components`.
pub fn perceive_rings(mol: &Molecule) -> Vec<Vec<usize>> {
    let n = mol.atoms.len();
    let rank = mol.ring_count();
    if rank == 0 {
        return Vec::new();
    }
    let adj = mol.adjacency();

    // Candidate cycles: for every root r and every edge (x, y), the two
    // shortest paths r->x and r->y plus the edge, kept when the paths only
    // share the root.
    let mut seen: BTreeSet<EdgeBits> = BTreeSet::new();
    let mut candidates: Vec<(usize, EdgeBits, Vec<usize>)> = Vec::new();
    let mut dist = vec![usize::MAX; n];
    let mut parent_vertex = vec![usize::MAX; n];
    let mut parent_bond = vec![usize::MAX; n];

    for root in 0..n {
        for d in dist.iter_mut() {
            *d = usize::MAX;
        }
        let mut queue = alloc::collections::VecDeque::new();
        dist[root] = 0;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            for &(w, bi) in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    parent_vertex[w] = v;
                    parent_bond[w] = bi;
                    queue.push_back(w);
                }
            }
        }

        for (bi, bond) in mol.bonds.iter().enumerate() {
            let (x, y) = (bond.a, bond.b);
            if dist[x] == usize::MAX || dist[y] == usize::MAX {
                continue;
            }
            // Skip tree edges of this BFS.
            if parent_bond[x] == bi || parent_bond[y] == bi {
                continue;
            }
            let path = |mut v: usize| {
                let mut atoms = vec![v];
                let mut bonds = Vec::new();
                while v != root {
                    bonds.push(parent_bond[v]);
                    v = parent_vertex[v];
                    atoms.push(v);
                }
                (atoms, bonds)
            };
            let (px_atoms, px_bonds) = path(x);
            let (py_atoms, py_bonds) = path(y);
            // Paths must be vertex-disjoint apart from the root.
            let shares = px_atoms[..px_atoms.len() - 1]
                .iter()
                .any(|a| py_atoms[..py_atoms.len() - 1].contains(a));
            if shares {
                continue;
            }

            let mut bits = EdgeBits::zeros(mol.bonds.len());
            for &b in px_bonds.iter().chain(&py_bonds) {
                bits.set(b);
            }
            bits.set(bi);
            if !seen.insert(bits.clone()) {
                continue;
            }

            // Vertex order around the cycle: root..x, then y..(child of root).
            let mut cycle: Vec<usize> = px_atoms.iter().rev().copied().collect();
            cycle.extend(py_atoms[..py_atoms.len() - 1].iter());
            let len = px_bonds.len() + py_bonds.len() + 1;
            candidates.push((len, bits, cycle));
        }
    }

    candidates.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));

    let mut basis_rows: Vec<EdgeBits> = Vec::new();
    let mut rings = Vec::new();
    for (_, bits, cycle) in candidates {
        let mut reduced = bits;
        while let Some(lead) = reduced.leading_bit() {
            match basis_rows.iter().find(|r| r.leading_bit() == Some(lead)) {
                Some(row) => reduced.xor_assign(row),
                None => break,
            }
        }
        if reduced.leading_bit().is_some() {
            basis_rows.push(reduced);
            rings.push(cycle);
            if rings.len() == rank {
                break;
            }
        }
    }

    debug_assert_eq!(rings.len(), rank);
    rings
}

/// Bond indices traversed by an ordered atom cycle.
pub fn cycle_bond_indices(mol: &Molecule, cycle: &[usize]) -> Vec<usize> {
    let lookup: BTreeMap<(usize, usize), usize> = mol
        .bonds
        .iter()
        .enumerate()
        .map(|(i, b)| ((b.a.min(b.b), b.a.max(b.b)), i))
        .collect();
    (0..cycle.len())
        .map(|i| {
            let a = cycle[i];
            let b = cycle[(i + 1) % cycle.len()];
            lookup[&(a.min(b), a.max(b))]
        })
        .collect()
}
