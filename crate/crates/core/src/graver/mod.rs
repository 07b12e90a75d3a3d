//! Primitive moves, Graver bases, the square-free subset and pair pruning.

mod completion;

use std::collections::{BTreeMap, HashSet};

pub use completion::{graver_basis, square_free_graver, Budget};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::moves::{Move, MoveMask, MoveSet, Provenance};

/// True iff no move `w ∉ {0, z}` has `0 ≤ w⁺ ≤ z⁺` and `0 ≤ w⁻ ≤ z⁻`.
///
/// Exhaustive search over the box below `z`, pruned by per-row reachability of
/// zero for the partial product `A w`.
pub fn is_primitive(cfg: &Configuration, z: &Move) -> Result<bool> {
    if !cfg.is_move(z) {
        return Err(Error::NotAMove);
    }
    let a = cfg.matrix();
    let m = a.rows();
    let support: Vec<(usize, i64)> = z.entries().to_vec();
    let k = support.len();
    // lo/hi[i][r]: range of row r contributions from support cells i.. onward
    let mut lo = vec![vec![0i64; m]; k + 1];
    let mut hi = vec![vec![0i64; m]; k + 1];
    for i in (0..k).rev() {
        let (c, v) = support[i];
        for r in 0..m {
            let full = a.get(r, c) * v;
            lo[i][r] = lo[i + 1][r] + full.min(0);
            hi[i][r] = hi[i + 1][r] + full.max(0);
        }
    }
    let mut partial = vec![0i64; m];
    let mut chosen = vec![0i64; k];
    Ok(!proper_sub_move(
        a,
        &support,
        &lo,
        &hi,
        0,
        &mut partial,
        &mut chosen,
    ))
}

fn proper_sub_move(
    a: &crate::linalg::IntMatrix,
    support: &[(usize, i64)],
    lo: &[Vec<i64>],
    hi: &[Vec<i64>],
    i: usize,
    partial: &mut [i64],
    chosen: &mut [i64],
) -> bool {
    if (0..partial.len()).any(|r| partial[r] + lo[i][r] > 0 || partial[r] + hi[i][r] < 0) {
        return false;
    }
    if i == support.len() {
        let nonzero = chosen.iter().any(|&w| w != 0);
        let whole = chosen.iter().zip(support).all(|(&w, &(_, v))| w == v);
        return nonzero && !whole;
    }
    let (c, v) = support[i];
    let step = v.signum();
    for mag in 0..=v.abs() {
        let w = step * mag;
        chosen[i] = w;
        for (r, p) in partial.iter_mut().enumerate() {
            *p += a.get(r, c) * w;
        }
        let hit = proper_sub_move(a, support, lo, hi, i + 1, partial, chosen);
        for (r, p) in partial.iter_mut().enumerate() {
            *p -= a.get(r, c) * w;
        }
        if hit {
            return true;
        }
    }
    chosen[i] = 0;
    false
}

/// Members with every entry in `{-1, 0, 1}`, retagged square-free.
pub fn square_free_subset(b: &MoveSet) -> MoveSet {
    b.filter(Move::is_square_free).retag(Provenance::SquareFree)
}

/// Counts of members by degree.
pub fn degree_histogram(b: &MoveSet) -> BTreeMap<i64, usize> {
    let mut h = BTreeMap::new();
    for m in b.moves() {
        *h.entry(m.degree()).or_insert(0) += 1;
    }
    h
}

fn canonical_mask(m: MoveMask) -> MoveMask {
    let s = m.support();
    if s == 0 || m.pos & (s & s.wrapping_neg()) != 0 {
        m
    } else {
        m.negate()
    }
}

/// Greedy removal of members that are sums of two other current members with
/// exactly one sign cancellation, repeated to a fixed point.
///
/// Pairs are scanned in canonical order; the result is deterministic but not
/// claimed to be a minimal subset.
pub fn prune_by_one_cancellation(b0: &MoveSet) -> MoveSet {
    let masks: Option<Vec<MoveMask>> = b0.moves().iter().map(Move::masks).collect();
    let removed = match masks {
        Some(masks) => prune_masks(&masks),
        None => prune_moves(b0.moves()),
    };
    let survivors = b0
        .moves()
        .iter()
        .enumerate()
        .filter(|(k, _)| !removed.contains(k))
        .map(|(_, m)| m.clone());
    MoveSet::tagged(
        b0.cell_count(),
        b0.source(),
        survivors,
        Provenance::PrunedSurvivor,
    )
}

fn prune_masks(masks: &[MoveMask]) -> HashSet<usize> {
    let index: std::collections::HashMap<MoveMask, usize> = masks
        .iter()
        .enumerate()
        .map(|(k, &m)| (canonical_mask(m), k))
        .collect();
    let mut removed = HashSet::new();
    loop {
        let mut changed = false;
        for a in 0..masks.len() {
            for b in a + 1..masks.len() {
                if removed.contains(&a) || removed.contains(&b) {
                    continue;
                }
                let (z, w) = (masks[a], masks[b]);
                for w in [w, w.negate()] {
                    let cancel = (z.pos & w.neg) | (z.neg & w.pos);
                    let doubled = (z.pos & w.pos) | (z.neg & w.neg);
                    if cancel.count_ones() != 1 || doubled != 0 {
                        continue;
                    }
                    let sum = canonical_mask(MoveMask {
                        pos: (z.pos | w.pos) & !cancel,
                        neg: (z.neg | w.neg) & !cancel,
                    });
                    if let Some(&k) = index.get(&sum) {
                        if k != a && k != b && removed.insert(k) {
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return removed;
        }
    }
}

fn prune_moves(moves: &[Move]) -> HashSet<usize> {
    let index: std::collections::HashMap<Move, usize> = moves
        .iter()
        .enumerate()
        .map(|(k, m)| (m.clone().canonical(), k))
        .collect();
    let mut removed = HashSet::new();
    loop {
        let mut changed = false;
        for a in 0..moves.len() {
            for b in a + 1..moves.len() {
                if removed.contains(&a) || removed.contains(&b) {
                    continue;
                }
                for w in [moves[b].clone(), moves[b].negate()] {
                    let z = &moves[a];
                    let cancellations = z
                        .entries()
                        .iter()
                        .filter(|&&(c, v)| v * w.get(c) < 0)
                        .count();
                    let single = z
                        .entries()
                        .iter()
                        .filter(|&&(c, v)| v * w.get(c) < 0)
                        .all(|&(c, v)| v * w.get(c) == -1);
                    if cancellations != 1 || !single {
                        continue;
                    }
                    let Some(sum) = z.add(&w) else { continue };
                    if let Some(&k) = index.get(&sum.canonical()) {
                        if k != a && k != b && removed.insert(k) {
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return removed;
        }
    }
}

/// Greedy conformal decomposition of a kernel vector by members of `b`:
/// repeatedly subtract any member lying conformally below the remainder.
/// Succeeds for every kernel vector iff `b` contains the Graver basis.
pub fn greedy_conformal_decomposition(v: &Move, b: &MoveSet) -> Option<Vec<Move>> {
    let mut rest = Some(v.clone());
    let mut parts = Vec::new();
    while let Some(r) = rest {
        let g = b.moves().iter().find_map(|g| {
            if g.conformally_below(&r) {
                Some(g.clone())
            } else {
                let ng = g.negate();
                ng.conformally_below(&r).then_some(ng)
            }
        })?;
        rest = r.add(&g.negate());
        parts.push(g);
    }
    Some(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{complete_independence, two_way_independence};

    fn basic_3x3(r: [usize; 2], c: [usize; 2]) -> Move {
        let cell = |i: usize, j: usize| i * 3 + j;
        Move::from_parts(
            &[cell(r[0], c[0]), cell(r[1], c[1])],
            &[cell(r[0], c[1]), cell(r[1], c[0])],
        )
        .unwrap()
    }

    #[test]
    fn primitive_examples_on_3x3() {
        let cfg = two_way_independence(3, 3).unwrap();
        assert!(is_primitive(&cfg, &basic_3x3([0, 1], [0, 1])).unwrap());
        // degree-3 loop
        let loop3 = Move::from_parts(&[0, 4, 8], &[1, 5, 6]).unwrap();
        assert!(is_primitive(&cfg, &loop3).unwrap());
        // a conformal sum of two basic moves on disjoint cells is not primitive
        let a = basic_3x3([0, 1], [0, 1]);
        let twice = Move::from_entries(a.entries().iter().map(|&(c, v)| (c, 2 * v))).unwrap();
        assert!(!is_primitive(&cfg, &twice).unwrap());
        assert!(matches!(
            is_primitive(&cfg, &Move::from_parts(&[0], &[]).unwrap()),
            Err(Error::NotAMove)
        ));
    }

    #[test]
    fn disjoint_sum_not_primitive() {
        let cfg = two_way_independence(4, 4).unwrap();
        let cell = |i: usize, j: usize| i * 4 + j;
        let z = Move::from_parts(
            &[cell(0, 0), cell(1, 1), cell(2, 2), cell(3, 3)],
            &[cell(0, 1), cell(1, 0), cell(2, 3), cell(3, 2)],
        )
        .unwrap();
        assert!(!is_primitive(&cfg, &z).unwrap());
    }

    #[test]
    fn graver_two_by_two_is_single_basic_move() {
        let cfg = two_way_independence(2, 2).unwrap();
        let g = graver_basis(&cfg, Budget::default()).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.moves()[0].entries(), &[(0, 1), (1, -1), (2, -1), (3, 1)]);
    }

    #[test]
    fn graver_three_by_three_has_fifteen_loops() {
        let cfg = two_way_independence(3, 3).unwrap();
        let g = graver_basis(&cfg, Budget::default()).unwrap();
        assert_eq!(degree_histogram(&g), BTreeMap::from([(2, 9), (3, 6)]));
        for z in g.moves() {
            assert!(is_primitive(&cfg, z).unwrap());
        }
    }

    #[test]
    fn square_free_222() {
        let cfg = complete_independence(&[2, 2, 2]).unwrap();
        let g = graver_basis(&cfg, Budget::default()).unwrap();
        let b0 = square_free_subset(&g);
        assert_eq!(degree_histogram(&b0), BTreeMap::from([(2, 12)]));
        assert!(b0.provenance().iter().all(|&p| p == Provenance::SquareFree));
        assert_eq!(square_free_subset(&b0), b0);
    }

    #[test]
    fn truncated_completion_matches_filter() {
        for dims in [[2, 2, 3], [2, 3, 3]] {
            let cfg = complete_independence(&dims).unwrap();
            let full = square_free_subset(&graver_basis(&cfg, Budget::default()).unwrap());
            let direct = square_free_graver(&cfg, Budget::default()).unwrap();
            assert_eq!(direct, full);
        }
    }

    #[test]
    fn square_free_drops_entry_two() {
        let s = MoveSet::tagged(
            3,
            "t",
            [
                Move::from_dense(&[2, -1, -1]).unwrap(),
                Move::from_dense(&[1, -1, 0]).unwrap(),
            ],
            Provenance::Graver,
        );
        assert_eq!(square_free_subset(&s).len(), 1);
        assert!(degree_histogram(&MoveSet::empty(3, "e")).is_empty());
    }

    #[test]
    fn pruning_3x3_leaves_basic_moves() {
        let cfg = two_way_independence(3, 3).unwrap();
        let b0 = square_free_subset(&graver_basis(&cfg, Budget::default()).unwrap());
        let pruned = prune_by_one_cancellation(&b0);
        assert_eq!(degree_histogram(&pruned), BTreeMap::from([(2, 9)]));
        assert!(pruned.is_subset_of(&b0));
        // the generic path agrees with the bitmask path
        let removed = prune_moves(b0.moves());
        assert_eq!(removed.len(), 6);
    }

    #[test]
    fn pruning_single_move_unchanged() {
        let cfg = two_way_independence(2, 2).unwrap();
        let b0 = square_free_subset(&graver_basis(&cfg, Budget::default()).unwrap());
        assert_eq!(prune_by_one_cancellation(&b0).moves(), b0.moves());
    }

    #[test]
    fn budget_exhaustion_is_loud() {
        let cfg = complete_independence(&[2, 2, 3]).unwrap();
        let err = graver_basis(
            &cfg,
            Budget {
                max_moves: 3,
                max_time: None,
            },
        )
        .unwrap_err();
        match err {
            Error::BudgetExhausted { partial, .. } => assert!(!partial.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }
}
