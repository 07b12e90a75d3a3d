//! Zero-one fibers: enumeration, connectivity under a move set, distance
//! reduction and crossing patterns.
//!
//! Everything past enumeration works on bitmask tables, so cell counts are capped
//! at 128.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::moves::{FiberKey, Move, MoveMask, MoveSet, Table};

pub const DEFAULT_CAP: usize = 5_000_000;

/// All zero-one `x` with `A x = t`, in lexicographic order of the cell vector
/// (depth-first, cell 0 first, value 0 before 1).
pub fn enumerate_zero_one_fiber(
    cfg: &Configuration,
    t: &FiberKey,
    cap: usize,
) -> Result<Vec<Table>> {
    let a = cfg.matrix();
    if t.0.len() != a.rows() {
        return Err(Error::LengthMismatch {
            expected: a.rows(),
            got: t.0.len(),
        });
    }
    let n = cfg.cell_count();
    let (m, cols) = (a.rows(), sparse_columns(cfg));
    // lo/hi[c][r]: extreme contributions of cells c.. to row r
    let mut lo = vec![vec![0i64; m]; n + 1];
    let mut hi = vec![vec![0i64; m]; n + 1];
    for c in (0..n).rev() {
        lo[c] = lo[c + 1].clone();
        hi[c] = hi[c + 1].clone();
        for &(r, v) in &cols[c] {
            if v < 0 {
                lo[c][r] += v;
            } else {
                hi[c][r] += v;
            }
        }
    }
    let mut out = Vec::new();
    let mut residual = t.0.clone();
    let mut x = vec![0i64; n];
    let mut search = Search {
        cols: &cols,
        lo: &lo,
        hi: &hi,
        cap,
        out: &mut out,
    };
    search.dfs(0, &mut residual, &mut x)?;
    Ok(out)
}

struct Search<'a> {
    cols: &'a [Vec<(usize, i64)>],
    lo: &'a [Vec<i64>],
    hi: &'a [Vec<i64>],
    cap: usize,
    out: &'a mut Vec<Table>,
}

impl Search<'_> {
    fn feasible(&self, c: usize, residual: &[i64]) -> bool {
        residual
            .iter()
            .enumerate()
            .all(|(r, &v)| v >= self.lo[c][r] && v <= self.hi[c][r])
    }

    fn dfs(&mut self, c: usize, residual: &mut [i64], x: &mut [i64]) -> Result<()> {
        if !self.feasible(c, residual) {
            return Ok(());
        }
        if c == x.len() {
            if self.out.len() == self.cap {
                return Err(Error::CapExceeded { cap: self.cap });
            }
            self.out.push(Table::new(x.to_vec()));
            return Ok(());
        }
        self.dfs(c + 1, residual, x)?;
        for &(r, v) in &self.cols[c] {
            residual[r] -= v;
        }
        x[c] = 1;
        self.dfs(c + 1, residual, x)?;
        x[c] = 0;
        for &(r, v) in &self.cols[c] {
            residual[r] += v;
        }
        Ok(())
    }
}

fn sparse_columns(cfg: &Configuration) -> Vec<Vec<(usize, i64)>> {
    let a = cfg.matrix();
    (0..a.cols())
        .map(|c| {
            (0..a.rows())
                .filter_map(|r| {
                    let v = a.get(r, c);
                    (v != 0).then_some((r, v))
                })
                .collect()
        })
        .collect()
}

fn masks_of(tables: &[Table]) -> Result<Vec<u128>> {
    tables
        .iter()
        .map(|t| {
            if t.len() > 128 {
                Err(Error::TooManyCells(t.len()))
            } else {
                t.to_mask().ok_or(Error::NotZeroOne)
            }
        })
        .collect()
}

fn shared_key(cfg: &Configuration, tables: &[Table]) -> Result<()> {
    let mut keys = tables.iter().map(|t| cfg.sufficient_stat(t));
    if let Some(first) = keys.next() {
        let first = first?;
        for k in keys {
            if k? != first {
                return Err(Error::MixedKeys);
            }
        }
    }
    Ok(())
}

/// A fiber with an edge wherever a move of the set joins two members.
#[derive(Debug, Clone)]
pub struct FiberGraph {
    pub nodes: Vec<Table>,
    /// `(a, b, k)`: `nodes[b] - nodes[a] = ±moves[k]`, with `a < b`.
    pub edges: Vec<(usize, usize, usize)>,
    pub moves: Vec<Move>,
    /// Component id of each node, numbered by first appearance.
    pub component_of: Vec<usize>,
}

impl FiberGraph {
    pub fn component_count(&self) -> usize {
        self.component_of.iter().max().map_or(0, |&c| c + 1)
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comps = vec![Vec::new(); self.component_count()];
        for (node, &c) in self.component_of.iter().enumerate() {
            comps[c].push(node);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    pub fn edge_move(&self, edge: usize) -> &Move {
        &self.moves[self.edges[edge].2]
    }
}

pub fn build_fiber_graph(cfg: &Configuration, fiber: &[Table], b: &MoveSet) -> Result<FiberGraph> {
    shared_key(cfg, fiber)?;
    let masks = masks_of(fiber)?;
    let index: HashMap<u128, usize> = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let moves: Vec<(usize, MoveMask)> = b
        .moves()
        .iter()
        .enumerate()
        .filter_map(|(k, z)| z.masks().map(|m| (k, m)))
        .collect();
    let mut edges = Vec::new();
    let mut adj = vec![Vec::new(); fiber.len()];
    for (a, &x) in masks.iter().enumerate() {
        for &(k, z) in &moves {
            for z in [z, z.negate()] {
                if z.applies_to(x) {
                    if let Some(&b) = index.get(&(x ^ z.support())) {
                        if a < b {
                            edges.push((a, b, k));
                            adj[a].push(b);
                            adj[b].push(a);
                        }
                    }
                }
            }
        }
    }
    let component_of = bfs_components(&adj);
    Ok(FiberGraph {
        nodes: fiber.to_vec(),
        edges,
        moves: b.moves().to_vec(),
        component_of,
    })
}

fn bfs_components(adj: &[Vec<usize>]) -> Vec<usize> {
    let mut comp = vec![usize::MAX; adj.len()];
    let mut next = 0;
    for s in 0..adj.len() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Number of connected components of a fiber given as masks.
pub fn component_count(fiber: &[u128], moves: &[MoveMask]) -> usize {
    let members: HashSet<u128> = fiber.iter().copied().collect();
    let mut seen: HashSet<u128> = HashSet::with_capacity(fiber.len());
    let mut count = 0;
    let mut stack = Vec::new();
    for &s in fiber {
        if !seen.insert(s) {
            continue;
        }
        count += 1;
        stack.push(s);
        while let Some(x) = stack.pop() {
            for &z in moves {
                for z in [z, z.negate()] {
                    if z.applies_to(x) {
                        let y = x ^ z.support();
                        if members.contains(&y) && seen.insert(y) {
                            stack.push(y);
                        }
                    }
                }
            }
        }
    }
    count
}

/// Outcome of an exhaustive check, with the first failure in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict<T> {
    pub holds: bool,
    pub counterexample: Option<T>,
}

impl<T> Verdict<T> {
    fn pass() -> Self {
        Verdict {
            holds: true,
            counterexample: None,
        }
    }

    fn fail(c: T) -> Self {
        Verdict {
            holds: false,
            counterexample: Some(c),
        }
    }
}

/// Signed masks `±z` for the square-free members.
fn signed_masks(b: &MoveSet) -> Result<Vec<MoveMask>> {
    Ok(b.square_free_masks()?
        .into_iter()
        .flat_map(|m| [m, m.negate()])
        .collect())
}

/// Checks every unordered pair of distinct fiber members, in node order. Plain mode
/// asks for a reducing step from either side, strong mode from both.
pub fn check_distance_reducing(
    b: &MoveSet,
    fiber: &[Table],
    strong: bool,
) -> Result<Verdict<(Table, Table)>> {
    let masks = masks_of(fiber)?;
    let moves = signed_masks(b)?;
    Ok(match first_unreduced_pair(&masks, &moves, strong) {
        Some((i, j)) => Verdict::fail((fiber[i].clone(), fiber[j].clone())),
        None => Verdict::pass(),
    })
}

/// First pair `(i, j)`, `i < j`, without the required reducing steps. `moves`
/// must already contain both signs.
pub fn first_unreduced_pair(
    fiber: &[u128],
    moves: &[MoveMask],
    strong: bool,
) -> Option<(usize, usize)> {
    // moves applicable at each member, computed once
    let local: Vec<Vec<u128>> = fiber
        .iter()
        .map(|&x| {
            moves
                .iter()
                .filter(|z| z.applies_to(x))
                .map(|z| z.support())
                .collect()
        })
        .collect();
    let reduces = |i: usize, d: u128| {
        local[i]
            .iter()
            .any(|&s| 2 * (s & d).count_ones() > s.count_ones())
    };
    for i in 0..fiber.len() {
        for j in i + 1..fiber.len() {
            let d = fiber[i] ^ fiber[j];
            let ok = if strong {
                reduces(i, d) && reduces(j, d)
            } else {
                reduces(i, d) || reduces(j, d)
            };
            if !ok {
                return Some((i, j));
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    Strong,
    Weak,
    /// Pattern with `m` removed and `m` added cells.
    Generalized(usize),
}

/// Cells `i₁ … i₂ₘ` of a crossing pattern. With `from_y` false the inequalities
/// read `x(i₁..iₘ) > y`, `x(iₘ₊₁..i₂ₘ₋₁) < y` and the last is `≤` (or unconstrained
/// for the weak pattern); with `from_y` the roles of `x` and `y` swap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingWitness {
    pub cells: Vec<usize>,
    pub from_y: bool,
    /// `Σ_{j>m} e_{i_j} − Σ_{j≤m} e_{i_j}`.
    pub z: Move,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingReport {
    pub condition: Crossing,
    pub witness: Option<CrossingWitness>,
}

/// Search for `i₁ < i₂`, `i₃`, `i₄` distinct with
/// `x(i₁) > y(i₁)`, `x(i₂) > y(i₂)`, `x(i₃) < y(i₃)`, `x(i₄) ≤ y(i₄)` (or the
/// same with `x`, `y` swapped) and `e_{i₃} + e_{i₄} − e_{i₁} − e_{i₂}` a move.
pub fn check_strong_crossing(x: &Table, y: &Table, cfg: &Configuration) -> Result<CrossingReport> {
    crossing(x, y, cfg, Crossing::Strong)
}

/// As [`check_strong_crossing`] without the condition on `i₄`.
pub fn check_weak_crossing(x: &Table, y: &Table, cfg: &Configuration) -> Result<CrossingReport> {
    crossing(x, y, cfg, Crossing::Weak)
}

fn crossing(x: &Table, y: &Table, cfg: &Configuration, kind: Crossing) -> Result<CrossingReport> {
    if x == y {
        return Err(Error::EqualTables);
    }
    if cfg.sufficient_stat(x)? != cfg.sufficient_stat(y)? {
        return Err(Error::MixedKeys);
    }
    let n = x.len();
    let a = cfg.matrix();
    let col = |c: usize| a.column(c);
    let cols: Vec<Vec<i64>> = (0..n).map(col).collect();
    for (from_y, (p, q)) in [(false, (x, y)), (true, (y, x))] {
        let over: Vec<usize> = (0..n).filter(|&c| p.values[c] > q.values[c]).collect();
        let under: Vec<usize> = (0..n).filter(|&c| p.values[c] < q.values[c]).collect();
        for (k, &i1) in over.iter().enumerate() {
            for &i2 in &over[k + 1..] {
                for &i3 in &under {
                    for i4 in 0..n {
                        if i4 == i1 || i4 == i2 || i4 == i3 {
                            continue;
                        }
                        if kind == Crossing::Strong && p.values[i4] > q.values[i4] {
                            continue;
                        }
                        let is_move = (0..a.rows())
                            .all(|r| cols[i3][r] + cols[i4][r] == cols[i1][r] + cols[i2][r]);
                        if is_move {
                            let z = Move::from_parts(&[i3, i4], &[i1, i2])
                                .expect("distinct cells give a nonzero move");
                            return Ok(CrossingReport {
                                condition: kind,
                                witness: Some(CrossingWitness {
                                    cells: vec![i1, i2, i3, i4],
                                    from_y,
                                    z,
                                }),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(CrossingReport {
        condition: kind,
        witness: None,
    })
}

/// For every `z ∈ b0 ∖ b`, look for `±z' ∈ b` whose removed cells all lie in one
/// part of `z`, and whose added cells miss that part and, except possibly one,
/// lie in the other part. Fails with the first uncovered `z`.
pub fn check_generalized_crossing(b: &MoveSet, b0: &MoveSet) -> Result<Verdict<Move>> {
    if !b.is_subset_of(b0) {
        return Err(Error::NotSubset);
    }
    let cover = signed_masks(b)?;
    for z in b0.moves() {
        if b.contains(z) {
            continue;
        }
        let zm = z.masks().ok_or(Error::NotZeroOne)?;
        if generalized_witness(zm, &cover).is_none() {
            return Ok(Verdict::fail(z.clone()));
        }
    }
    Ok(Verdict::pass())
}

/// A signed member `z'` of `cover` matching pattern (i) against `z`, or pattern
/// (ii) (reported as `from_y`), with cells listed as removed then added, the
/// unconstrained added cell last.
pub fn generalized_witness(z: MoveMask, cover: &[MoveMask]) -> Option<CrossingWitness> {
    for (from_y, (big, small)) in [(false, (z.pos, z.neg)), (true, (z.neg, z.pos))] {
        for w in cover {
            if w.neg & !big == 0 && w.pos & big == 0 && (w.pos & !small).count_ones() <= 1 {
                let removed = bits(w.neg);
                let mut added: Vec<usize> = bits(w.pos & small);
                added.extend(bits(w.pos & !small));
                let z = Move::from_parts(&added, &removed)?;
                return Some(CrossingWitness {
                    cells: removed.into_iter().chain(added).collect(),
                    from_y,
                    z,
                });
            }
        }
    }
    None
}

pub(crate) fn bits(mut m: u128) -> Vec<usize> {
    let mut out = Vec::new();
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

/// Moves of `b0`, each conformal to `y − x`, summing to `y − x`; every prefix sum
/// added to `x` is zero-one.
pub fn conformal_decompose(
    cfg: &Configuration,
    x: &Table,
    y: &Table,
    b0: &MoveSet,
) -> Result<Vec<Move>> {
    if cfg.sufficient_stat(x)? != cfg.sufficient_stat(y)? {
        return Err(Error::MixedKeys);
    }
    let (xm, ym) = match (x.to_mask(), y.to_mask()) {
        (Some(a), Some(b)) => (a, b),
        _ if x.len() > 128 => return Err(Error::TooManyCells(x.len())),
        _ => return Err(Error::NotZeroOne),
    };
    let moves = signed_masks(b0)?;
    let target = MoveMask {
        pos: ym & !xm,
        neg: xm & !ym,
    };
    let mut path = Vec::new();
    let mut dead = HashSet::new();
    if decompose(target, &moves, &mut path, &mut dead) {
        Ok(path
            .into_iter()
            .map(|m: MoveMask| {
                Move::from_parts(&bits(m.pos), &bits(m.neg)).expect("nonzero member")
            })
            .collect())
    } else {
        Err(Error::NoDecomposition)
    }
}

fn decompose(
    rest: MoveMask,
    moves: &[MoveMask],
    path: &mut Vec<MoveMask>,
    dead: &mut HashSet<MoveMask>,
) -> bool {
    if rest.support() == 0 {
        return true;
    }
    if dead.contains(&rest) {
        return false;
    }
    for &z in moves {
        if z.pos & !rest.pos == 0 && z.neg & !rest.neg == 0 {
            path.push(z);
            let next = MoveMask {
                pos: rest.pos & !z.pos,
                neg: rest.neg & !z.neg,
            };
            if decompose(next, moves, path, dead) {
                return true;
            }
            path.pop();
        }
    }
    dead.insert(rest);
    false
}

/// Every zero-one table on the cells of `cfg`, grouped by sufficient statistic.
/// Keys are sorted; tables within a fiber follow [`enumerate_zero_one_fiber`] order.
pub fn sweep_zero_one_fibers(
    cfg: &Configuration,
    cap: usize,
) -> Result<Vec<(FiberKey, Vec<u128>)>> {
    let n = cfg.cell_count();
    if n >= 64 || (1usize << n) > cap {
        return Err(Error::CapExceeded { cap });
    }
    let cols = sparse_columns(cfg);
    let mut key = vec![0i64; cfg.matrix().rows()];
    let mut groups: HashMap<Vec<i64>, Vec<u128>> = HashMap::new();
    // Gray-code walk: one cell flips per step
    let mut mask: u128 = 0;
    for step in 0u64..(1u64 << n) {
        if step > 0 {
            let c = step.trailing_zeros() as usize;
            mask ^= 1 << c;
            let sign = if mask >> c & 1 == 1 { 1 } else { -1 };
            for &(r, v) in &cols[c] {
                key[r] += sign * v;
            }
        }
        match groups.get_mut(&key) {
            Some(g) => g.push(mask),
            None => {
                groups.insert(key.clone(), vec![mask]);
            }
        }
    }
    let mut out: Vec<(FiberKey, Vec<u128>)> = groups
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_unstable_by_key(|m| m.reverse_bits());
            (FiberKey(k), v)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Trie over signed supports, codes `cell << 1 | negative` in cell order.
struct MaskTrie {
    children: Vec<Vec<(u16, u32)>>,
    terminal: Vec<bool>,
}

impl MaskTrie {
    fn new(moves: &[MoveMask]) -> Self {
        let mut t = MaskTrie {
            children: vec![Vec::new()],
            terminal: vec![false],
        };
        for z in moves {
            let mut node = 0usize;
            for c in bits(z.support()) {
                let code = (c as u16) << 1 | u16::from(z.neg >> c & 1 == 1);
                node = match t.children[node].iter().find(|e| e.0 == code) {
                    Some(&(_, k)) => k as usize,
                    None => {
                        let k = t.terminal.len();
                        t.children.push(Vec::new());
                        t.terminal.push(false);
                        t.children[node].push((code, k as u32));
                        k
                    }
                };
            }
            t.terminal[node] = true;
        }
        t
    }

    /// Some stored `z` with `z.pos ⊆ pos` and `z.neg ⊆ neg`.
    fn covers(&self, pos: u128, neg: u128) -> bool {
        let mut stack = vec![0u32];
        while let Some(node) = stack.pop() {
            let node = node as usize;
            if self.terminal[node] {
                return true;
            }
            for &(code, k) in &self.children[node] {
                let side = if code & 1 == 1 { neg } else { pos };
                if side >> (code >> 1) & 1 == 1 {
                    stack.push(k);
                }
            }
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverReport {
    /// Covered prefixes at which the search stopped descending.
    pub closed: usize,
    pub uncovered: Option<Move>,
}

impl CoverReport {
    pub fn holds(&self) -> bool {
        self.uncovered.is_none()
    }
}

/// Checks that every nonzero kernel vector with entries in `{-1, 0, 1}` has a
/// square-free member of `b0`, up to sign, conformally below it. Vectors are
/// taken with a positive first entry, in lexicographic order, and the first
/// uncovered one is reported. A partial vector that already has a member below
/// it covers all its completions, so the search closes it there.
///
/// A pass implies strong distance reduction on every zero-one fiber: for
/// `x != y` in one fiber, `x - y` is such a vector, and a member below it steps
/// `x` toward `y` and `y` toward `x`.
pub fn check_square_free_cover(
    cfg: &Configuration,
    b0: &MoveSet,
    cap: usize,
) -> Result<CoverReport> {
    let n = cfg.cell_count();
    if n > 128 {
        return Err(Error::TooManyCells(n));
    }
    let masks: Vec<MoveMask> = b0
        .moves()
        .iter()
        .filter_map(Move::masks)
        .flat_map(|m| [m, m.negate()])
        .collect();
    let cols = sparse_columns(cfg);
    let m = cfg.matrix().rows();
    // slack[c * m + r]: most that cells c.. can still move row r
    let mut slack = vec![0i64; (n + 1) * m];
    for c in (0..n).rev() {
        for r in 0..m {
            slack[c * m + r] = slack[(c + 1) * m + r];
        }
        for &(r, v) in &cols[c] {
            slack[c * m + r] += v.abs();
        }
    }
    let mut search = CoverSearch {
        cols,
        slack,
        m,
        n,
        tries: (0..2 * n)
            .map(|code| {
                let last = |z: &&MoveMask| {
                    let c = 127 - z.support().leading_zeros() as usize;
                    2 * c + usize::from(z.neg >> c & 1 == 1) == code
                };
                MaskTrie::new(&masks.iter().filter(last).copied().collect::<Vec<_>>())
            })
            .collect(),
        resid: vec![0; m],
        cap,
        closed: 0,
        uncovered: None,
    };
    search.visit(0, 0, 0)?;
    Ok(CoverReport {
        closed: search.closed,
        uncovered: search
            .uncovered
            .map(|(p, q)| Move::from_parts(&bits(p), &bits(q)).expect("nonzero")),
    })
}

struct CoverSearch {
    cols: Vec<Vec<(usize, i64)>>,
    slack: Vec<i64>,
    m: usize,
    n: usize,
    /// Members grouped by their last signed cell `2c + negative`.
    tries: Vec<MaskTrie>,
    resid: Vec<i64>,
    cap: usize,
    closed: usize,
    uncovered: Option<(u128, u128)>,
}

impl CoverSearch {
    /// Returns `true` once the search should stop.
    fn visit(&mut self, c: usize, pos: u128, neg: u128) -> Result<bool> {
        if c == self.n {
            // each nonzero prefix was checked on the way down; a member below it
            // would have to end at its last nonzero cell
            if pos != 0 {
                self.uncovered = Some((pos, neg));
                return Ok(true);
            }
            return Ok(false);
        }
        let choices: &[i64] = if pos == 0 { &[0, 1] } else { &[-1, 0, 1] };
        for &v in choices {
            let next = (c + 1) * self.m;
            let mut feasible = true;
            for &(r, a) in &self.cols[c] {
                self.resid[r] += v * a;
                feasible &= self.resid[r].abs() <= self.slack[next + r];
            }
            let (p, q) = match v {
                1 => (pos | 1 << c, neg),
                -1 => (pos, neg | 1 << c),
                _ => (pos, neg),
            };
            let stop = if !feasible {
                false
            } else if v != 0 && self.tries[2 * c + usize::from(v < 0)].covers(p, q) {
                self.closed += 1;
                if self.closed > self.cap {
                    return Err(Error::CapExceeded { cap: self.cap });
                }
                false
            } else {
                self.visit(c + 1, p, q)?
            };
            for &(r, a) in &self.cols[c] {
                self.resid[r] -= v * a;
            }
            if stop {
                return Ok(true);
            }
        }
        Ok(false)
    }
}
