//! Subgraph matching for SMILES-expressed patterns. A match maps every
//! pattern atom to a distinct target atom so that element and aromatic flag
//! agree and every pattern bond has a target bond of equal order between the
//! images (a monomorphism: extra target bonds are allowed). Occurrences are
//! counted as distinct matched atom sets, so benzene contains one benzene,
//! not twelve.

use super::Molecule;
use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct MatchResult {
    pub found: bool,
    pub count: usize,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum SubstructureError {
    #[error("pattern has {0} heavy atoms; the matcher accepts at most {MAX_PATTERN_HEAVY_ATOMS}")]
    PatternTooLarge(usize),
    #[error("pattern must be a single connected fragment")]
    PatternDisconnected,
    #[error("pattern has no atoms")]
    EmptyPattern,
}

pub const MAX_PATTERN_HEAVY_ATOMS: usize = 32;

pub fn match_substructure(
    pattern: &Molecule,
    target: &Molecule,
) -> Result<MatchResult, SubstructureError> {
    let heavy = pattern.heavy_atom_indices().count();
    if pattern.atoms.is_empty() {
        return Err(SubstructureError::EmptyPattern);
    }
    if heavy > MAX_PATTERN_HEAVY_ATOMS {
        return Err(SubstructureError::PatternTooLarge(heavy));
    }
    let (_, components) = pattern.components();
    if components != 1 {
        return Err(SubstructureError::PatternDisconnected);
    }

    if pattern.atoms.len() > target.atoms.len() {
        return Ok(MatchResult {
            found: false,
            count: 0,
        });
    }

    let p_adj = pattern.adjacency();
    let t_adj = target.adjacency();

    // Visit pattern atoms in BFS order from atom 0 so every atom after the
    // first extends the partial match through an already-mapped neighbor.
    let order = {
        let mut order = Vec::with_capacity(pattern.atoms.len());
        let mut seen = vec![false; pattern.atoms.len()];
        let mut queue = alloc::collections::VecDeque::new();
        seen[0] = true;
        queue.push_back(0usize);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, _) in &p_adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        order
    };

    let compatible = |p: usize, t: usize| -> bool {
        let pa = &pattern.atoms[p];
        let ta = &target.atoms[t];
        pa.element == ta.element && pa.aromatic == ta.aromatic
    };

    let mut mapping = vec![usize::MAX; pattern.atoms.len()];
    let mut used = vec![false; target.atoms.len()];
    let mut matched_sets: BTreeSet<Vec<usize>> = BTreeSet::new();

    #[allow(clippy::too_many_arguments)]
    fn extend(
        step: usize,
        order: &[usize],
        pattern: &Molecule,
        target: &Molecule,
        p_adj: &[Vec<(usize, usize)>],
        t_adj: &[Vec<(usize, usize)>],
        compatible: &dyn Fn(usize, usize) -> bool,
        mapping: &mut [usize],
        used: &mut [bool],
        matched_sets: &mut BTreeSet<Vec<usize>>,
    ) {
        if step == order.len() {
            let mut set: Vec<usize> = mapping.to_vec();
            set.sort_unstable();
            matched_sets.insert(set);
            return;
        }
        let p = order[step];

        // Candidate targets: neighbors of the image of some mapped pattern
        // neighbor, or any target atom for the first step.
        let anchored: Option<(usize, usize)> = p_adj[p]
            .iter()
            .find_map(|&(w, bi)| (mapping[w] != usize::MAX).then(|| (mapping[w], bi)));
        let try_candidate = |t: usize,
                             mapping: &mut [usize],
                             used: &mut [bool],
                             matched_sets: &mut BTreeSet<Vec<usize>>| {
            if used[t] || !compatible(p, t) {
                return;
            }
            // Every pattern bond from p into the mapped region needs a
            // target bond of equal order.
            let ok = p_adj[p].iter().all(|&(w, pbi)| {
                if mapping[w] == usize::MAX {
                    return true;
                }
                t_adj[t].iter().any(|&(tw, tbi)| {
                    tw == mapping[w] && target.bonds[tbi].order == pattern.bonds[pbi].order
                })
            });
            if !ok {
                return;
            }
            mapping[p] = t;
            used[t] = true;
            extend(
                step + 1,
                order,
                pattern,
                target,
                p_adj,
                t_adj,
                compatible,
                mapping,
                used,
                matched_sets,
            );
            mapping[p] = usize::MAX;
            used[t] = false;
        };

        match anchored {
            Some((mapped_image, _)) => {
                for &(t, _) in &t_adj[mapped_image] {
                    try_candidate(t, mapping, used, matched_sets);
                }
            }
            None => {
                for t in 0..target.atoms.len() {
                    try_candidate(t, mapping, used, matched_sets);
                }
            }
        }
    }

    extend(
        0,
        &order,
        pattern,
        target,
        &p_adj,
        &t_adj,
        &compatible,
        &mut mapping,
        &mut used,
        &mut matched_sets,
    );

    Ok(MatchResult {
        found: !matched_sets.is_empty(),
        count: matched_sets.len(),
    })
}

/// Convenience: does `target` contain the pattern at all.
pub fn contains(pattern: &Molecule, target: &Molecule) -> Result<bool, SubstructureError> {
    match_substructure(pattern, target).map(|r| r.found)
}

#[cfg(test)]
mod tests {
    use super::super::Molecule;
    use super::*;

    fn count(pattern: &str, target: &str) -> usize {
        let p = Molecule::from_smiles(pattern).unwrap();
        let t = Molecule::from_smiles(target).unwrap();
        match_substructure(&p, &t).unwrap().count
    }

    #[test]
    fn single_atom_pattern() {
        assert_eq!(count("O", "CCO"), 1);
        assert_eq!(count("C", "CCO"), 2);
        assert_eq!(count("N", "CCO"), 0);
    }

    #[test]
    fn carbonyl_in_acetic_acid() {
        assert_eq!(count("C=O", "CC(=O)O"), 1);
    }

    #[test]
    fn benzene_counts_once_per_ring() {
        assert_eq!(count("c1ccccc1", "c1ccccc1"), 1);
        // Biphenyl has two.
        assert_eq!(count("c1ccccc1", "c1ccccc1-c1ccccc1"), 2);
    }

    #[test]
    fn kekule_target_matches_aromatic_pattern() {
        assert_eq!(count("c1ccccc1", "C1=CC=CC=C1"), 1);
    }

    #[test]
    fn aromatic_flag_is_respected() {
        // Aliphatic chain carbon never matches an aromatic pattern atom.
        assert_eq!(count("c1ccccc1", "C1CCCCC1"), 0);
        assert_eq!(count("C1CCCCC1", "c1ccccc1"), 0);
    }

    #[test]
    fn monomorphism_not_induced() {
        // A path of three carbons embeds in cyclopropane even though the
        // ring has an extra bond between the images of the path ends.
        assert_eq!(count("CCC", "C1CC1"), 1);
    }

    #[test]
    fn bond_order_is_respected() {
        assert_eq!(count("C=C", "CC"), 0);
        assert_eq!(count("C=C", "C=C"), 1);
        assert_eq!(count("C#N", "CC#N"), 1);
    }

    #[test]
    fn pattern_larger_than_target() {
        assert_eq!(count("CCCC", "CC"), 0);
    }

    #[test]
    fn oversized_pattern_is_rejected() {
        let p = Molecule::from_smiles(&"C".repeat(33)).unwrap();
        let t = Molecule::from_smiles("CC").unwrap();
        assert!(matches!(
            match_substructure(&p, &t),
            Err(SubstructureError::PatternTooLarge(33))
        ));
    }

    #[test]
    fn disconnected_pattern_is_rejected() {
        let p = Molecule::from_smiles("C.C").unwrap();
        let t = Molecule::from_smiles("CC").unwrap();
        assert!(matches!(
            match_substructure(&p, &t),
            Err(SubstructureError::PatternDisconnected)
        ));
    }

    #[test]
    fn hydroxyl_count_on_diol() {
        assert_eq!(count("CO", "OCCO"), 2);
    }
}
