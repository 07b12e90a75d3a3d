//! Structured move families: loops, df-1 loops, symmetry orbits of the cube
//! moves, and the degree-2 moves of three-way complete independence.

use std::collections::BTreeSet;

use crate::cells::CellSpace;
use crate::error::{Error, Result};
use crate::moves::{Move, MoveSet, Provenance, Table};

/// A loop `+1` at `(i_k, j_k)` and `-1` at `(i_k, j_{k+1 mod r})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopSpec {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl LoopSpec {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        let distinct = |v: &[usize]| v.iter().collect::<BTreeSet<_>>().len() == v.len();
        if rows.len() != cols.len() || rows.len() < 2 || !distinct(&rows) || !distinct(&cols) {
            return Err(Error::InvalidDims(format!(
                "loop needs r >= 2 distinct rows and columns, got {rows:?} / {cols:?}"
            )));
        }
        Ok(LoopSpec { rows, cols })
    }

    pub fn degree(&self) -> usize {
        self.rows.len()
    }

    /// The move on `space`; fails if a loop cell is a structural zero.
    pub fn to_move(&self, space: &CellSpace) -> Result<Move> {
        let r = self.degree();
        let mut pos = Vec::with_capacity(r);
        let mut neg = Vec::with_capacity(r);
        for k in 0..r {
            pos.push(space.linear_index(&[self.rows[k], self.cols[k]])?);
            neg.push(space.linear_index(&[self.rows[k], self.cols[(k + 1) % r]])?);
        }
        Ok(Move::from_parts(&pos, &neg).expect("distinct cells"))
    }
}

fn two_way_space(i: usize, j: usize) -> Result<CellSpace> {
    if i < 2 || j < 2 {
        return Err(Error::InvalidDims(format!(
            "two-way table needs I, J >= 2, got {i}x{j}"
        )));
    }
    CellSpace::new(vec![i, j])
}

/// All `C(I,2)·C(J,2)` degree-2 loops.
pub fn basic_moves_two_way(i: usize, j: usize) -> Result<MoveSet> {
    let space = two_way_space(i, j)?;
    let mut moves = Vec::new();
    for rows in subsets(i, 2) {
        for cols in subsets(j, 2) {
            moves.push(LoopSpec::new(rows.clone(), cols)?.to_move(&space)?);
        }
    }
    Ok(MoveSet::tagged(
        space.cell_count(),
        format!("basic {i}x{j}"),
        moves,
        Provenance::Basic,
    ))
}

/// All distinct loops of degree `r` on an `I x J` table.
pub fn loops_degree_r(i: usize, j: usize, r: usize) -> Result<MoveSet> {
    let space = two_way_space(i, j)?;
    if r < 2 || r > i.min(j) {
        return Err(Error::InvalidDims(format!(
            "loop degree {r} outside 2..={}",
            i.min(j)
        )));
    }
    let mut moves = Vec::new();
    for rows in subsets(i, r) {
        for cols in subsets(j, r) {
            // fixing the row order, column orders enumerate every loop on the box
            for perm in permutations(r) {
                let cols: Vec<usize> = perm.iter().map(|&p| cols[p]).collect();
                moves.push(LoopSpec::new(rows.clone(), cols)?.to_move(&space)?);
            }
        }
    }
    Ok(MoveSet::tagged(
        space.cell_count(),
        format!("loops-{r} {i}x{j}"),
        moves,
        Provenance::Loop(r as u32),
    ))
}

/// Loops of degree `2..=min(I, J)` on the live cells of a two-way space whose
/// index box meets the live cells exactly twice in every row and column.
pub fn df1_loops(space: &CellSpace) -> Result<MoveSet> {
    let dims = space.dims();
    if dims.len() != 2 {
        return Err(Error::InvalidDims(format!(
            "df-1 loops need two axes, got {dims:?}"
        )));
    }
    if space.cell_count() == 0 {
        return Err(Error::InvalidDims("empty support set".into()));
    }
    let (ni, nj) = (dims[0], dims[1]);
    let live = |a: usize, b: usize| !space.is_structural_zero(&[a, b]);
    let mut moves = Vec::new();
    for r in 2..=ni.min(nj) {
        for rows in subsets(ni, r) {
            let mut cols = Vec::with_capacity(r);
            let mut per_row = vec![0usize; r];
            extend_columns(
                &rows,
                0,
                nj,
                r,
                &live,
                &mut cols,
                &mut per_row,
                &mut |cols| {
                    if let Some(m) = box_cycle(space, &rows, cols) {
                        moves.push(m);
                    }
                },
            );
        }
    }
    Ok(MoveSet::tagged(
        space.cell_count(),
        format!("df1 {ni}x{nj}"),
        moves,
        Provenance::Df1,
    ))
}

/// Depth-first choice of `r` columns, each meeting the rows exactly twice, with
/// no row meeting the chosen columns more than twice.
#[allow(clippy::too_many_arguments)]
fn extend_columns(
    rows: &[usize],
    from: usize,
    nj: usize,
    r: usize,
    live: &impl Fn(usize, usize) -> bool,
    cols: &mut Vec<usize>,
    per_row: &mut [usize],
    found: &mut impl FnMut(&[usize]),
) {
    if cols.len() == r {
        if per_row.iter().all(|&c| c == 2) {
            found(cols);
        }
        return;
    }
    for b in from..nj {
        if nj - b < r - cols.len() {
            break;
        }
        let hits: Vec<usize> = (0..rows.len()).filter(|&k| live(rows[k], b)).collect();
        if hits.len() != 2 || hits.iter().any(|&k| per_row[k] == 2) {
            continue;
        }
        for &k in &hits {
            per_row[k] += 1;
        }
        cols.push(b);
        extend_columns(rows, b + 1, nj, r, live, cols, per_row, found);
        cols.pop();
        for &k in &hits {
            per_row[k] -= 1;
        }
    }
}

/// The alternating-sign loop through the live cells of the box, if they form a
/// single cycle (two per line is already known).
fn box_cycle(space: &CellSpace, rows: &[usize], cols: &[usize]) -> Option<Move> {
    let r = rows.len();
    let live = |a: usize, b: usize| !space.is_structural_zero(&[a, b]);
    let mut spec_rows = Vec::with_capacity(r);
    let mut spec_cols = Vec::with_capacity(r);
    let row0 = rows[0];
    let mut col = *cols.iter().find(|&&b| live(row0, b))?;
    let mut row = row0;
    loop {
        spec_rows.push(row);
        spec_cols.push(col);
        let next_col = *cols.iter().find(|&&b| b != col && live(row, b))?;
        let next_row = *rows.iter().find(|&&a| a != row && live(a, next_col))?;
        if next_row == row0 {
            break;
        }
        if spec_rows.len() == r {
            return None;
        }
        row = next_row;
        col = next_col;
    }
    if spec_rows.len() != r {
        return None;
    }
    LoopSpec::new(spec_rows, spec_cols)
        .ok()?
        .to_move(space)
        .ok()
}

/// Move sets for the 3x3x3 line-sum configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NtfiLevel {
    Basic,
    BasicDeg6,
    BasicDeg6Deg9,
}

/// The 2x2x2 move with `+1` at `(0,0,0)`.
fn cube_rep(n: usize) -> Move {
    let c = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    Move::from_parts(
        &[c(0, 0, 0), c(0, 1, 1), c(1, 0, 1), c(1, 1, 0)],
        &[c(0, 0, 1), c(0, 1, 0), c(1, 0, 0), c(1, 1, 1)],
    )
    .expect("nonzero")
}

/// Two first-axis slices: an `n`-cycle loop and its negation.
fn slice_pair_rep(n: usize) -> Move {
    let c = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let mut entries = Vec::new();
    for j in 0..n {
        entries.push((c(0, j, j), 1));
        entries.push((c(0, j, (j + 1) % n), -1));
        entries.push((c(1, j, j), -1));
        entries.push((c(1, j, (j + 1) % n), 1));
    }
    Move::from_entries(entries).expect("nonzero")
}

/// Difference of the cyclic Latin squares `k = i + j` and `k = i + j + 1` (mod 3).
fn latin_difference_rep() -> Move {
    let c = |i: usize, j: usize, k: usize| (i * 3 + j) * 3 + k;
    let mut entries = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            entries.push((c(i, j, (i + j) % 3), 1));
            entries.push((c(i, j, (i + j + 1) % 3), -1));
        }
    }
    Move::from_entries(entries).expect("nonzero")
}

/// Image of `z` on an `n x n x n` cube under every per-axis level permutation and
/// axis permutation, deduplicated up to sign.
pub fn cube_orbit(z: &Move, n: usize) -> Vec<Move> {
    let perms = permutations(n);
    let axes = permutations(3);
    let coords: Vec<([usize; 3], i64)> = z
        .entries()
        .iter()
        .map(|&(c, v)| ([c / (n * n), c / n % n, c % n], v))
        .collect();
    let mut out = BTreeSet::new();
    for ax in &axes {
        for p0 in &perms {
            for p1 in &perms {
                for p2 in &perms {
                    let p = [p0, p1, p2];
                    let image = coords.iter().map(|&(idx, v)| {
                        let mut t = [0usize; 3];
                        for (a, slot) in t.iter_mut().enumerate() {
                            *slot = p[a][idx[ax[a]]];
                        }
                        ((t[0] * n + t[1]) * n + t[2], v)
                    });
                    out.insert(Move::from_entries(image).expect("nonzero").canonical());
                }
            }
        }
    }
    out.into_iter().collect()
}

fn ntfi_orbit_set(n: usize, parts: &[(Move, Provenance)], name: &str) -> MoveSet {
    let items = parts
        .iter()
        .flat_map(|(rep, tag)| cube_orbit(rep, n).into_iter().map(move |m| (m, *tag)));
    MoveSet::new(n * n * n, name.to_string(), items)
}

/// Full symmetry orbits of the 3x3x3 representatives up to `level`.
pub fn ntfi_333_moves(level: NtfiLevel) -> MoveSet {
    let mut parts = vec![(cube_rep(3), Provenance::Basic)];
    if level != NtfiLevel::Basic {
        parts.push((slice_pair_rep(3), Provenance::Deg6));
    }
    if level == NtfiLevel::BasicDeg6Deg9 {
        parts.push((latin_difference_rep(), Provenance::Deg9));
    }
    ntfi_orbit_set(3, &parts, "ntfi 3x3x3")
}

/// The `C(n,2)³` 2x2x2 moves of the `n x n x n` line-sum configuration.
pub fn ntfi_basic_moves(n: usize) -> MoveSet {
    ntfi_orbit_set(n, &[(cube_rep(n), Provenance::Basic)], "ntfi basic")
}

/// Orbit of the 4x4x4 degree-8 move (a 4-cycle slice pair).
pub fn degree8_moves_4x4() -> MoveSet {
    ntfi_orbit_set(
        4,
        &[(slice_pair_rep(4), Provenance::Deg8)],
        "ntfi 4x4x4 deg8",
    )
}

/// Degree-2 moves of three-way complete independence, by class: the set `D` of
/// axes on which the two positive cells differ (`|D| ≥ 2`), and the axis whose
/// levels are exchanged to give the negative cells (up to exchanging `D` minus
/// that axis instead).
pub fn degree2_threeway_patterns(dims: [usize; 3]) -> Result<MoveSet> {
    if dims.iter().any(|&d| d < 2) {
        return Err(Error::InvalidDims(format!(
            "every axis needs >= 2 levels, got {dims:?}"
        )));
    }
    let space = CellSpace::new(dims.to_vec())?;
    let cell = |t: [usize; 3]| (t[0] * dims[1] + t[1]) * dims[2] + t[2];
    let mut moves = Vec::new();
    for d in [vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2]] {
        let fixed: Vec<usize> = (0..3).filter(|a| !d.contains(a)).collect();
        // swapping one axis of D; for |D| = 2 either choice gives the same move
        let swaps: &[usize] = if d.len() == 2 { &d[..1] } else { &d[..] };
        for &swap in swaps {
            for p in all_cells(dims) {
                for q in all_cells(dims) {
                    let differs = |a: usize| p[a] != q[a];
                    if !d.iter().all(|&a| differs(a)) || fixed.iter().any(|&a| differs(a)) {
                        continue;
                    }
                    let mut p2 = p;
                    let mut q2 = q;
                    p2[swap] = q[swap];
                    q2[swap] = p[swap];
                    let m = Move::from_parts(&[cell(p), cell(q)], &[cell(p2), cell(q2)])
                        .expect("distinct cells");
                    moves.push(m);
                }
            }
        }
    }
    Ok(MoveSet::tagged(
        space.cell_count(),
        format!("deg2 {}x{}x{}", dims[0], dims[1], dims[2]),
        moves,
        Provenance::Deg2Pattern,
    ))
}

fn all_cells(dims: [usize; 3]) -> impl Iterator<Item = [usize; 3]> {
    (0..dims[0])
        .flat_map(move |i| (0..dims[1]).flat_map(move |j| (0..dims[2]).map(move |k| [i, j, k])))
}

/// Orthogonal-array form of a Latin square with symbols `0..n`:
/// `x(i, j, k) = 1` iff `square[i][j] = k`.
pub fn latin_table(square: &[Vec<usize>]) -> Table {
    let n = square.len();
    let mut values = vec![0i64; n * n * n];
    for (i, row) in square.iter().enumerate() {
        for (j, &k) in row.iter().enumerate() {
            values[(i * n + j) * n + k] = 1;
        }
    }
    Table::new(values)
}

/// Inverse of [`latin_table`]; `None` unless every `(i, j)` carries exactly one symbol.
pub fn symbols_of(x: &Table, n: usize) -> Option<Vec<Vec<usize>>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let ks: Vec<usize> = (0..n)
                        .filter(|&k| x.values[(i * n + j) * n + k] == 1)
                        .collect();
                    (ks.len() == 1).then(|| ks[0])
                })
                .collect()
        })
        .collect()
}

/// Increasing `k`-subsets of `0..n`.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            go(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("exists");
        p.swap(i - 1, j);
        p[i..].reverse();
        out.push(p.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::diagonal_zeros;
    use crate::config::{complete_independence, ntfi, ntfi_333, two_way_independence};
    use crate::graver::{degree_histogram, graver_basis, is_primitive, square_free_graver, Budget};

    #[test]
    fn basic_counts() {
        assert_eq!(basic_moves_two_way(2, 2).unwrap().len(), 1);
        let b = basic_moves_two_way(3, 3).unwrap();
        assert_eq!(b.len(), 9);
        assert!(b
            .moves()
            .iter()
            .all(|z| z.is_square_free() && z.degree() == 2));
        assert_eq!(basic_moves_two_way(3, 4).unwrap().len(), 18);
        assert!(basic_moves_two_way(1, 3).is_err());
    }

    #[test]
    fn loops_match_graver() {
        assert_eq!(loops_degree_r(3, 3, 3).unwrap().len(), 6);
        assert_eq!(
            loops_degree_r(3, 3, 2).unwrap().moves(),
            basic_moves_two_way(3, 3).unwrap().moves()
        );
        assert!(loops_degree_r(3, 3, 4).is_err());
        for (i, j) in [(3, 3), (3, 4)] {
            let cfg = two_way_independence(i, j).unwrap();
            let mut all = MoveSet::empty(i * j, "");
            for r in 2..=i.min(j) {
                let l = loops_degree_r(i, j, r).unwrap();
                assert!(l.moves().iter().all(|z| is_primitive(&cfg, z).unwrap()));
                all = all.union(&l);
            }
            let g = graver_basis(&cfg, Budget::default()).unwrap();
            assert_eq!(all.moves(), g.moves());
        }
    }

    #[test]
    fn df1_full_support_is_basic() {
        for n in [3, 4] {
            let space = CellSpace::new(vec![n, n]).unwrap();
            assert_eq!(
                df1_loops(&space).unwrap().moves(),
                basic_moves_two_way(n, n).unwrap().moves()
            );
        }
    }

    #[test]
    fn df1_diagonal_zeros_4x4() {
        let space = CellSpace::with_structural_zeros(vec![4, 4], diagonal_zeros(4)).unwrap();
        let d = df1_loops(&space).unwrap();
        let h: Vec<i64> = d
            .moves()
            .iter()
            .map(Move::degree)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        assert_eq!(h, vec![2, 3]);
        let cfg = crate::config::quasi_independence_with_zeros(4, 4, diagonal_zeros(4)).unwrap();
        assert!(d.moves().iter().all(|z| cfg.is_move(z)));
    }

    fn from_grid(space: &CellSpace, grid: &[[i64; 5]; 4]) -> Move {
        let mut entries = Vec::new();
        for (a, row) in grid.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                if v != 0 {
                    entries.push((space.linear_index(&[a, b]).unwrap(), v));
                }
            }
        }
        Move::from_entries(entries).unwrap().canonical()
    }

    #[test]
    fn displayed_df1_examples_are_members() {
        // bracketed cells of the displays are the structural zeros
        let cases: [(&[(usize, usize)], [[i64; 5]; 4]); 3] = [
            (&[], [[1, -1, 0, 0, 0], [-1, 1, 0, 0, 0], [0; 5], [0; 5]]),
            (
                &[(0, 2), (1, 1), (2, 0)],
                [[1, -1, 0, 0, 0], [-1, 0, 1, 0, 0], [0, 1, -1, 0, 0], [0; 5]],
            ),
            (
                &[
                    (0, 2),
                    (0, 3),
                    (1, 1),
                    (1, 3),
                    (2, 0),
                    (2, 2),
                    (3, 0),
                    (3, 1),
                ],
                [
                    [1, -1, 0, 0, 0],
                    [-1, 0, 1, 0, 0],
                    [0, 1, 0, -1, 0],
                    [0, 0, -1, 1, 0],
                ],
            ),
        ];
        for (zeros, grid) in cases {
            let zeros: BTreeSet<Vec<usize>> = zeros.iter().map(|&(a, b)| vec![a, b]).collect();
            let space = CellSpace::with_structural_zeros(vec![4, 5], zeros).unwrap();
            let z = from_grid(&space, &grid);
            assert!(df1_loops(&space).unwrap().contains(&z), "{z}");
        }
    }

    #[test]
    fn ntfi_orbit_sizes() {
        let cfg = ntfi_333();
        let basic = ntfi_333_moves(NtfiLevel::Basic);
        assert_eq!(basic.len(), 27);
        let with6 = ntfi_333_moves(NtfiLevel::BasicDeg6);
        assert_eq!(degree_histogram(&with6), [(4, 27), (6, 54)].into());
        let all = ntfi_333_moves(NtfiLevel::BasicDeg6Deg9);
        assert_eq!(degree_histogram(&all), [(4, 27), (6, 54), (9, 12)].into());
        assert!(all
            .moves()
            .iter()
            .all(|z| cfg.is_move(z) && z.is_square_free()));
    }

    #[test]
    fn ntfi_orbits_closed_under_generators() {
        let all = ntfi_333_moves(NtfiLevel::BasicDeg6Deg9);
        for z in all.moves() {
            assert_eq!(
                cube_orbit(z, 3).len(),
                all.iter().filter(|(m, _)| m.degree() == z.degree()).count()
            );
        }
    }

    #[test]
    fn deg6_slices_are_opposite_loops() {
        for z in ntfi_333_moves(NtfiLevel::BasicDeg6)
            .moves()
            .iter()
            .filter(|z| z.degree() == 6)
        {
            let dense = z.to_dense(27);
            let slices_along = |axis: usize| -> Vec<Vec<i64>> {
                (0..3)
                    .map(|l| {
                        (0..27)
                            .filter(|&c| [c / 9, c / 3 % 3, c % 3][axis] == l)
                            .map(|c| dense[c])
                            .collect()
                    })
                    .filter(|s: &Vec<i64>| s.iter().any(|&v| v != 0))
                    .collect()
            };
            let pair = (0..3).map(slices_along).find(|s| s.len() == 2).unwrap();
            assert_eq!(pair[0].iter().filter(|&&v| v != 0).count(), 6);
            assert!(pair[0].iter().zip(&pair[1]).all(|(a, b)| a == &-b));
        }
    }

    #[test]
    fn deg9_moves_are_latin_differences() {
        let squares: Vec<Table> = crate::fiber::enumerate_zero_one_fiber(
            &ntfi_333(),
            &crate::moves::FiberKey(vec![1; 27]),
            100,
        )
        .unwrap();
        assert_eq!(squares.len(), 12);
        let mut diffs = BTreeSet::new();
        for a in &squares {
            for b in &squares {
                let d: Vec<i64> = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
                if d.iter().filter(|&&v| v != 0).count() == 18 {
                    diffs.insert(Move::from_dense(&d).unwrap().canonical());
                }
            }
        }
        let deg9: BTreeSet<Move> = ntfi_333_moves(NtfiLevel::BasicDeg6Deg9)
            .moves()
            .iter()
            .filter(|z| z.degree() == 9)
            .cloned()
            .collect();
        assert_eq!(deg9, diffs);
    }

    #[test]
    fn degree8_family() {
        let d8 = degree8_moves_4x4();
        let cfg = ntfi([4, 4, 4]).unwrap();
        assert!(d8
            .moves()
            .iter()
            .all(|z| z.l1_norm() == 16 && cfg.is_move(z)));
        assert!(d8.contains(&slice_pair_rep(4)));
        assert_eq!(ntfi_basic_moves(4).len(), 216);
    }

    #[test]
    fn degree2_patterns_match_graver() {
        assert_eq!(degree2_threeway_patterns([2, 2, 2]).unwrap().len(), 12);
        assert_eq!(degree2_threeway_patterns([3, 3, 3]).unwrap().len(), 243);
        for dims in [[2, 2, 3], [2, 3, 3]] {
            let cfg = complete_independence(&dims).unwrap();
            let g2 = square_free_graver(&cfg, Budget::default())
                .unwrap()
                .filter(|z| z.degree() == 2);
            assert_eq!(degree2_threeway_patterns(dims).unwrap().moves(), g2.moves());
        }
    }

    #[test]
    fn latin_round_trip() {
        let l = vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]];
        let x = latin_table(&l);
        assert_eq!(symbols_of(&x, 3).unwrap(), l);
        assert!(symbols_of(&Table::zeros(27), 3).is_none());
    }

    #[test]
    fn helpers() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(3)[5], vec![2, 1, 0]);
    }
}
