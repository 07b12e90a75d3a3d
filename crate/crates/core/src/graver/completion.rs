//! Graver basis by staged completion (project-and-lift).
//!
//! The kernel lattice `L` is put in Hermite normal form. When every pivot is 1 the
//! projection of `L` onto the pivot coordinates is all of `Zᵏ`, whose Graver basis is
//! the unit vectors, so the basis rows themselves form the starting set. The
//! remaining coordinates are then added back one at a time. At each lift the old
//! basis projects to a Graver basis of the smaller lattice, so every new primitive
//! vector is a sum of old elements that is conformal on the already-active
//! coordinates and cancels on the new one. Candidates `f - g` are generated in
//! increasing order of their active norm; a candidate is kept iff no current
//! element lies conformally below it.
//!
//! Pivots other than 1 fall back to plain pairwise completion with normal-form
//! reduction on the pivot coordinates before lifting.

use std::collections::{HashSet, VecDeque};
use std::time::{Duration, Instant};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::linalg::kernel_lattice_basis;
use crate::moves::{Move, MoveSet, Provenance};

/// Resource caps for [`graver_basis`]. Exceeding either yields
/// [`Error::BudgetExhausted`] carrying the elements found so far.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub max_moves: usize,
    pub max_time: Option<Duration>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_moves: 5_000_000,
            max_time: None,
        }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget {
            max_moves: usize::MAX,
            max_time: None,
        }
    }
}

struct Clock {
    budget: Budget,
    start: Instant,
}

impl Clock {
    fn check(&self, count: usize) -> std::result::Result<(), String> {
        if count > self.budget.max_moves {
            return Err(format!("more than {} moves", self.budget.max_moves));
        }
        if let Some(t) = self.budget.max_time {
            if self.start.elapsed() > t {
                return Err(format!("wall time over {t:?}"));
            }
        }
        Ok(())
    }
}

/// Dense vectors in one arena, `n` entries each.
struct Pool {
    n: usize,
    data: Vec<i32>,
}

impl Pool {
    fn len(&self) -> usize {
        self.data.len() / self.n
    }

    fn get(&self, k: usize) -> &[i32] {
        &self.data[k * self.n..(k + 1) * self.n]
    }

    fn push(&mut self, v: &[i32]) -> usize {
        self.data.extend_from_slice(v);
        self.len() - 1
    }
}

fn sign_masks(v: &[i32], active: u128) -> (u128, u128) {
    let mut pos = 0u128;
    let mut neg = 0u128;
    for (c, &x) in v.iter().enumerate() {
        if active >> c & 1 == 1 {
            if x > 0 {
                pos |= 1 << c;
            } else if x < 0 {
                neg |= 1 << c;
            }
        }
    }
    (pos, neg)
}

fn active_norm(v: &[i32], active: u128) -> u32 {
    v.iter()
        .enumerate()
        .filter(|&(c, _)| active >> c & 1 == 1)
        .map(|(_, x)| x.unsigned_abs())
        .sum()
}

/// Trie over signed supports: an element is stored at the node reached by its
/// sorted `(coordinate, sign)` codes. A query only descends along codes present in
/// the query's own signed support, so it visits exactly the sign-compatible elements.
struct SupportTree {
    nodes: Vec<TreeNode>,
}

#[derive(Default)]
struct TreeNode {
    children: Vec<(u16, u32)>,
    /// element index * 2 + (1 if stored negated)
    items: Vec<u32>,
}

impl SupportTree {
    fn new() -> Self {
        SupportTree {
            nodes: vec![TreeNode::default()],
        }
    }

    fn insert(&mut self, v: &[i32], active: u128, item: u32, negated: bool) {
        let mut node = 0usize;
        for (c, &x) in v.iter().enumerate() {
            if x == 0 || active >> c & 1 == 0 {
                continue;
            }
            let code = (c as u16) << 1 | u16::from((x < 0) != negated);
            node = match self.nodes[node].children.iter().find(|&&(k, _)| k == code) {
                Some(&(_, child)) => child as usize,
                None => {
                    let child = self.nodes.len();
                    self.nodes.push(TreeNode::default());
                    self.nodes[node].children.push((code, child as u32));
                    child
                }
            };
        }
        self.nodes[node].items.push(item << 1 | u32::from(negated));
    }

    /// Some stored `h` with `h ⊑ s` on the active coordinates.
    fn find_below(&self, pool: &Pool, s: &[i32], spos: u128, sneg: u128, active: u128) -> bool {
        let mut stack = vec![0u32];
        while let Some(node) = stack.pop() {
            let node = &self.nodes[node as usize];
            for &item in &node.items {
                let h = pool.get((item >> 1) as usize);
                let sign = if item & 1 == 1 { -1 } else { 1 };
                let fits = h.iter().zip(s).enumerate().all(|(c, (&hc, &sc))| {
                    active >> c & 1 == 0 || (sign * hc).unsigned_abs() <= sc.unsigned_abs()
                });
                if fits {
                    return true;
                }
            }
            for &(code, child) in &node.children {
                let c = code >> 1;
                let mask = if code & 1 == 1 { sneg } else { spos };
                if mask >> c & 1 == 1 {
                    stack.push(child);
                }
            }
        }
        false
    }
}

/// Graver basis of `ker A ∩ Zⁿ`, one canonical representative per `±` pair.
pub fn graver_basis(cfg: &Configuration, budget: Budget) -> Result<MoveSet> {
    complete(cfg, budget, false)
}

/// The Graver elements with all entries in `{-1, 0, 1}`, computed directly.
///
/// Same lifting as [`graver_basis`], truncated: anything conformally below a
/// square-free vector is square-free on the same coordinates, so candidates with a
/// larger entry on an already-lifted coordinate can never be needed.
pub fn square_free_graver(cfg: &Configuration, budget: Budget) -> Result<MoveSet> {
    complete(cfg, budget, true)
}

fn complete(cfg: &Configuration, budget: Budget, square_free: bool) -> Result<MoveSet> {
    let n = cfg.cell_count();
    if n > 128 {
        return Err(Error::TooManyCells(n));
    }
    let source = cfg.name().to_string();
    let basis = kernel_lattice_basis(cfg.matrix())?;
    if basis.is_empty() {
        return Ok(MoveSet::empty(n, source));
    }
    let clock = Clock {
        budget,
        start: Instant::now(),
    };
    let mut pool = Pool {
        n,
        data: Vec::new(),
    };
    let mut pivots: Vec<usize> = Vec::new();
    let mut unit = true;
    for row in &basis {
        let c = row.iter().position(|&x| x != 0).expect("nonzero basis row");
        pivots.push(c);
        unit &= row[c] == 1;
        let v: Vec<i32> = row
            .iter()
            .map(|&x| i32::try_from(x).map_err(|_| Error::Overflow("kernel basis entry")))
            .collect::<Result<_>>()?;
        pool.push(&v);
    }
    let mut active: u128 = pivots.iter().fold(0, |m, &c| m | 1 << c);
    let mut elems: Vec<usize> = (0..pool.len()).collect();
    if !unit {
        elems = plain_completion(&mut pool, elems, active, &clock)
            .map_err(|reason| partial(&pool, &[], n, &source, reason))?;
        if square_free {
            elems.retain(|&k| bounded(pool.get(k), active));
        }
    }
    for j in 0..n {
        if active >> j & 1 == 1 {
            continue;
        }
        elems = lift(&mut pool, elems, active, j, square_free, &clock)
            .map_err(|(reason, found)| partial(&pool, &found, n, &source, reason))?;
        active |= 1 << j;
        if square_free {
            elems.retain(|&k| pool.get(k)[j].abs() <= 1);
        }
    }
    let out = to_move_set(&pool, &elems, n, source);
    Ok(if square_free {
        out.retag(Provenance::SquareFree)
    } else {
        out
    })
}

fn bounded(v: &[i32], active: u128) -> bool {
    v.iter()
        .enumerate()
        .all(|(c, &x)| active >> c & 1 == 0 || x.abs() <= 1)
}

fn to_move_set(pool: &Pool, elems: &[usize], n: usize, source: String) -> MoveSet {
    MoveSet::tagged(
        n,
        source,
        elems.iter().filter_map(|&k| {
            Move::from_dense(&pool.get(k).iter().map(|&x| x as i64).collect::<Vec<_>>())
        }),
        Provenance::Graver,
    )
}

fn partial(pool: &Pool, elems: &[usize], n: usize, source: &str, reason: String) -> Error {
    Error::BudgetExhausted {
        reason,
        partial: Box::new(to_move_set(pool, elems, n, source.to_string())),
    }
}

/// One lifting step: input is the Graver basis w.r.t. `active`; output is the
/// Graver basis w.r.t. `active ∪ {j}`.
fn lift(
    pool: &mut Pool,
    elems: Vec<usize>,
    active: u128,
    j: usize,
    square_free: bool,
    clock: &Clock,
) -> std::result::Result<Vec<usize>, (String, Vec<usize>)> {
    let n = pool.n;
    let full = active | 1 << j;
    // sign-normalize so every element has a nonnegative j-coordinate
    let mut current: Vec<usize> = Vec::with_capacity(elems.len());
    let mut scratch = vec![0i32; n];
    for k in elems {
        let v = pool.get(k);
        if v[j] < 0 {
            for (s, &x) in scratch.iter_mut().zip(v) {
                *s = -x;
            }
            current.push(pool.push(&scratch.clone()));
        } else {
            current.push(k);
        }
    }
    let mut tree = SupportTree::new();
    for &k in &current {
        tree.insert(pool.get(k), full, k as u32, false);
        tree.insert(pool.get(k), full, k as u32, true);
    }
    // elements with positive j-coordinate, bucketed by active norm
    struct Item {
        k: usize,
        pos: u128,
        neg: u128,
    }
    let mut buckets: Vec<Vec<Item>> = Vec::new();
    let add_to_bucket = |buckets: &mut Vec<Vec<Item>>, pool: &Pool, k: usize| {
        let v = pool.get(k);
        if v[j] > 0 {
            let norm = active_norm(v, active) as usize;
            let (pos, neg) = sign_masks(v, active);
            if buckets.len() <= norm {
                buckets.resize_with(norm + 1, Vec::new);
            }
            buckets[norm].push(Item { k, pos, neg });
        }
    };
    for &k in &current {
        add_to_bucket(&mut buckets, pool, k);
    }
    let mut level = 2usize;
    let mut cand = vec![0i32; n];
    while level <= 2 * (buckets.len().saturating_sub(1)) {
        let mut found: Vec<Vec<i32>> = Vec::new();
        let mut seen: HashSet<Vec<i32>> = HashSet::new();
        for a in 1..=level / 2 {
            let b = level - a;
            if a >= buckets.len() || b >= buckets.len() {
                continue;
            }
            let (left, right) = (&buckets[a], &buckets[b]);
            for (ia, f) in left.iter().enumerate() {
                let start = if a == b { ia + 1 } else { 0 };
                for g in &right[start..] {
                    // f - g must be conformal on the active coordinates
                    if f.pos & g.pos != 0 || f.neg & g.neg != 0 {
                        continue;
                    }
                    // an entry of 2 on a lifted coordinate
                    if square_free && (f.pos & g.neg | f.neg & g.pos) != 0 {
                        continue;
                    }
                    let (fv, gv) = (pool.get(f.k), pool.get(g.k));
                    let mut overflow = false;
                    for ((c, &x), &y) in cand.iter_mut().zip(fv).zip(gv) {
                        match x.checked_sub(y) {
                            Some(d) => *c = d,
                            None => overflow = true,
                        }
                    }
                    if overflow {
                        return Err(("entry overflow".into(), current));
                    }
                    let (spos, sneg) = sign_masks(&cand, full);
                    if tree.find_below(pool, &cand, spos, sneg, full) {
                        continue;
                    }
                    if cand[j] < 0 {
                        cand.iter_mut().for_each(|x| *x = -*x);
                    }
                    if seen.insert(cand.clone()) {
                        found.push(cand.clone());
                    }
                }
            }
        }
        found.sort();
        for v in found {
            let k = pool.push(&v);
            tree.insert(pool.get(k), full, k as u32, false);
            tree.insert(pool.get(k), full, k as u32, true);
            current.push(k);
            add_to_bucket(&mut buckets, pool, k);
        }
        if let Err(reason) = clock.check(current.len()) {
            return Err((reason, current));
        }
        level += 1;
    }
    Ok(current)
}

/// Pairwise completion with normal-form reduction, then removal of reducible
/// elements. Used only when the pivot projection is not all of `Zᵏ`.
fn plain_completion(
    pool: &mut Pool,
    start: Vec<usize>,
    active: u128,
    clock: &Clock,
) -> std::result::Result<Vec<usize>, String> {
    let mut elems: Vec<usize> = Vec::new();
    let mut queue: VecDeque<Vec<i32>> = start.iter().map(|&k| pool.get(k).to_vec()).collect();
    let mut tree = SupportTree::new();
    while let Some(mut s) = queue.pop_front() {
        loop {
            let (spos, sneg) = sign_masks(&s, active);
            if spos | sneg == 0 {
                break;
            }
            let Some(h) = find_reducer(&tree, pool, &s, spos, sneg, active) else {
                break;
            };
            for (x, y) in s.iter_mut().zip(&h) {
                *x = x.checked_sub(*y).ok_or("entry overflow")?;
            }
        }
        let (spos, sneg) = sign_masks(&s, active);
        if spos | sneg == 0 {
            continue;
        }
        for &e in &elems {
            let (epos, eneg) = sign_masks(pool.get(e), active);
            for sign in [1i32, -1] {
                let (gpos, gneg) = if sign == 1 {
                    (epos, eneg)
                } else {
                    (eneg, epos)
                };
                // a conformal sum reduces to zero by either summand
                if spos & gneg == 0 && sneg & gpos == 0 {
                    continue;
                }
                let sum = s
                    .iter()
                    .zip(pool.get(e))
                    .map(|(&a, &b)| a.checked_add(sign * b).ok_or("entry overflow"))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                queue.push_back(sum);
            }
        }
        let k = pool.push(&s);
        tree.insert(pool.get(k), active, k as u32, false);
        tree.insert(pool.get(k), active, k as u32, true);
        elems.push(k);
        clock.check(elems.len())?;
    }
    let below = |h: &[i32], v: &[i32], sign: i32| {
        h.iter().zip(v).enumerate().all(|(c, (&a, &b))| {
            let a = sign * a;
            active >> c & 1 == 0 || a == 0 || (a.signum() == b.signum() && a.abs() <= b.abs())
        })
    };
    Ok(elems
        .iter()
        .copied()
        .filter(|&k| {
            let v = pool.get(k);
            !elems
                .iter()
                .any(|&h| h != k && (below(pool.get(h), v, 1) || below(pool.get(h), v, -1)))
        })
        .collect())
}

fn find_reducer(
    tree: &SupportTree,
    pool: &Pool,
    s: &[i32],
    spos: u128,
    sneg: u128,
    active: u128,
) -> Option<Vec<i32>> {
    let mut stack = vec![0u32];
    while let Some(node) = stack.pop() {
        let node = &tree.nodes[node as usize];
        for &item in &node.items {
            let h = pool.get((item >> 1) as usize);
            let sign = if item & 1 == 1 { -1 } else { 1 };
            let fits = h.iter().zip(s).enumerate().all(|(c, (&hc, &sc))| {
                active >> c & 1 == 0 || (sign * hc).unsigned_abs() <= sc.unsigned_abs()
            });
            if fits {
                return Some(h.iter().map(|&x| sign * x).collect());
            }
        }
        for &(code, child) in &node.children {
            let c = code >> 1;
            let mask = if code & 1 == 1 { sneg } else { spos };
            if mask >> c & 1 == 1 {
                stack.push(child);
            }
        }
    }
    None
}
