//! Tables, moves, and canonical move sets.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};

/// A frequency vector over the live cells of a [`crate::CellSpace`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Table {
    pub values: Vec<i64>,
}

impl Table {
    pub fn new(values: Vec<i64>) -> Self {
        Table { values }
    }

    pub fn zeros(n: usize) -> Self {
        Table { values: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero_one(&self) -> bool {
        self.values.iter().all(|&v| v == 0 || v == 1)
    }

    /// Bit `i` set iff cell `i` holds a one. `None` unless zero-one with at most 128 cells.
    pub fn to_mask(&self) -> Option<u128> {
        if self.values.len() > 128 || !self.is_zero_one() {
            return None;
        }
        Some(
            self.values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v == 1)
                .fold(0u128, |m, (i, _)| m | (1u128 << i)),
        )
    }

    pub fn from_mask(mask: u128, n: usize) -> Self {
        Table {
            values: (0..n).map(|i| ((mask >> i) & 1) as i64).collect(),
        }
    }

    pub fn l1_distance(&self, other: &Table) -> i64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// `self + sign * z`, or `None` on overflow.
    pub fn apply(&self, z: &Move, sign: i64) -> Option<Table> {
        let mut values = self.values.clone();
        for &(c, v) in z.entries() {
            values[c] = values[c].checked_add(sign * v)?;
        }
        Some(Table { values })
    }
}

/// Value of the sufficient statistic `t = A x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiberKey(pub Vec<i64>);

/// A nonzero integer vector stored sparsely by cell rank.
///
/// Constructors keep entries sorted by cell and drop zeros. Use [`Move::canonical`]
/// to pick the representative of `{z, -z}` whose first entry is positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    entries: Vec<(usize, i64)>,
}

impl Move {
    /// `None` for the zero vector.
    pub fn from_dense(dense: &[i64]) -> Option<Move> {
        let entries: Vec<_> = dense
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, &v)| (i, v))
            .collect();
        (!entries.is_empty()).then_some(Move { entries })
    }

    /// Builds from `(cell, value)` pairs; values on repeated cells are summed.
    pub fn from_entries(pairs: impl IntoIterator<Item = (usize, i64)>) -> Option<Move> {
        let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
        for (c, v) in pairs {
            *acc.entry(c).or_insert(0) += v;
        }
        let entries: Vec<_> = acc.into_iter().filter(|&(_, v)| v != 0).collect();
        (!entries.is_empty()).then_some(Move { entries })
    }

    /// `+1` on `pos`, `-1` on `neg`.
    pub fn from_parts(pos: &[usize], neg: &[usize]) -> Option<Move> {
        Move::from_entries(
            pos.iter()
                .map(|&c| (c, 1))
                .chain(neg.iter().map(|&c| (c, -1))),
        )
    }

    pub fn entries(&self) -> &[(usize, i64)] {
        &self.entries
    }

    pub fn get(&self, cell: usize) -> i64 {
        self.entries
            .binary_search_by_key(&cell, |&(c, _)| c)
            .map(|k| self.entries[k].1)
            .unwrap_or(0)
    }

    pub fn to_dense(&self, n: usize) -> Vec<i64> {
        let mut v = vec![0; n];
        for &(c, x) in &self.entries {
            v[c] = x;
        }
        v
    }

    pub fn negate(&self) -> Move {
        Move {
            entries: self.entries.iter().map(|&(c, v)| (c, -v)).collect(),
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.entries[0].1 > 0
    }

    pub fn canonical(self) -> Move {
        if self.is_canonical() {
            self
        } else {
            self.negate()
        }
    }

    /// `z+` as `(cell, value)` pairs.
    pub fn positive_part(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.entries.iter().copied().filter(|&(_, v)| v > 0)
    }

    /// `z-` as `(cell, value)` pairs with positive values.
    pub fn negative_part(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.entries
            .iter()
            .filter(|&&(_, v)| v < 0)
            .map(|&(c, v)| (c, -v))
    }

    pub fn degree(&self) -> i64 {
        self.positive_part().map(|(_, v)| v).sum()
    }

    pub fn l1_norm(&self) -> i64 {
        self.entries.iter().map(|&(_, v)| v.abs()).sum()
    }

    pub fn is_square_free(&self) -> bool {
        self.entries.iter().all(|&(_, v)| v.abs() == 1)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(c, _)| c)
    }

    /// Support bitmasks `(z+, z-)` for a square-free move on at most 128 cells.
    pub fn masks(&self) -> Option<MoveMask> {
        if !self.is_square_free() || self.entries.last().is_some_and(|&(c, _)| c >= 128) {
            return None;
        }
        let mut m = MoveMask { pos: 0, neg: 0 };
        for &(c, v) in &self.entries {
            if v > 0 {
                m.pos |= 1 << c;
            } else {
                m.neg |= 1 << c;
            }
        }
        Some(m)
    }

    /// No cell where the two moves have opposite signs.
    pub fn is_conformal_with(&self, other: &Move) -> bool {
        self.entries.iter().all(|&(c, v)| v * other.get(c) >= 0)
    }

    /// `self ⊑ other`: same sign pattern and no larger magnitude on every cell.
    pub fn conformally_below(&self, other: &Move) -> bool {
        self.entries.iter().all(|&(c, v)| {
            let w = other.get(c);
            v * w > 0 && v.abs() <= w.abs()
        })
    }

    pub fn add(&self, other: &Move) -> Option<Move> {
        Move::from_entries(self.entries.iter().chain(&other.entries).copied())
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(c, v)| format!("{c}:{v:+}"))
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// Positive and negative supports of a square-free move as bitmasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MoveMask {
    pub pos: u128,
    pub neg: u128,
}

impl MoveMask {
    pub fn negate(self) -> MoveMask {
        MoveMask {
            pos: self.neg,
            neg: self.pos,
        }
    }

    pub fn support(self) -> u128 {
        self.pos | self.neg
    }

    /// `x + z` stays zero-one.
    #[inline]
    pub fn applies_to(self, x: u128) -> bool {
        x & self.pos == 0 && x & self.neg == self.neg
    }

    /// `x - z` stays zero-one.
    #[inline]
    pub fn applies_negated_to(self, x: u128) -> bool {
        x & self.neg == 0 && x & self.pos == self.pos
    }
}

/// Where a move in a [`MoveSet`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    Graver,
    SquareFree,
    Basic,
    Loop(u32),
    Df1,
    Deg2Pattern,
    Deg6,
    Deg8,
    Deg9,
    PrunedSurvivor,
    File,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Graver => f.write_str("graver"),
            Provenance::SquareFree => f.write_str("square-free"),
            Provenance::Basic => f.write_str("basic"),
            Provenance::Loop(r) => write!(f, "loop-{r}"),
            Provenance::Df1 => f.write_str("df1"),
            Provenance::Deg2Pattern => f.write_str("deg2-pattern"),
            Provenance::Deg6 => f.write_str("deg6"),
            Provenance::Deg8 => f.write_str("deg8"),
            Provenance::Deg9 => f.write_str("deg9"),
            Provenance::PrunedSurvivor => f.write_str("pruned-survivor"),
            Provenance::File => f.write_str("file"),
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "graver" => Provenance::Graver,
            "square-free" => Provenance::SquareFree,
            "basic" => Provenance::Basic,
            "df1" => Provenance::Df1,
            "deg2-pattern" => Provenance::Deg2Pattern,
            "deg6" => Provenance::Deg6,
            "deg8" => Provenance::Deg8,
            "deg9" => Provenance::Deg9,
            "pruned-survivor" => Provenance::PrunedSurvivor,
            "file" => Provenance::File,
            other => match other.strip_prefix("loop-").map(str::parse) {
                Some(Ok(r)) => Provenance::Loop(r),
                _ => return Err(Error::Parse(format!("unknown provenance tag {other:?}"))),
            },
        })
    }
}

/// Canonical sort key: degree, then L1 norm, then entries.
fn canonical_order(a: &Move, b: &Move) -> std::cmp::Ordering {
    (a.degree(), a.l1_norm(), a.entries()).cmp(&(b.degree(), b.l1_norm(), b.entries()))
}

/// A deduplicated, canonically ordered set of canonical moves with provenance tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveSet {
    cell_count: usize,
    source: String,
    moves: Vec<Move>,
    provenance: Vec<Provenance>,
}

impl MoveSet {
    /// Canonicalizes signs, drops duplicates (first tag wins) and sorts.
    pub fn new(
        cell_count: usize,
        source: impl Into<String>,
        items: impl IntoIterator<Item = (Move, Provenance)>,
    ) -> MoveSet {
        let mut seen = HashSet::new();
        let mut pairs: Vec<(Move, Provenance)> = Vec::new();
        for (m, p) in items {
            let m = m.canonical();
            if seen.insert(m.clone()) {
                pairs.push((m, p));
            }
        }
        pairs.sort_by(|a, b| canonical_order(&a.0, &b.0));
        let (moves, provenance) = pairs.into_iter().unzip();
        MoveSet {
            cell_count,
            source: source.into(),
            moves,
            provenance,
        }
    }

    pub fn empty(cell_count: usize, source: impl Into<String>) -> MoveSet {
        MoveSet::new(cell_count, source, std::iter::empty())
    }

    pub fn tagged(
        cell_count: usize,
        source: impl Into<String>,
        moves: impl IntoIterator<Item = Move>,
        tag: Provenance,
    ) -> MoveSet {
        MoveSet::new(cell_count, source, moves.into_iter().map(|m| (m, tag)))
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Move, Provenance)> {
        self.moves.iter().zip(self.provenance.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// Membership up to sign.
    pub fn contains(&self, z: &Move) -> bool {
        let c = z.clone().canonical();
        self.moves
            .binary_search_by(|m| canonical_order(m, &c))
            .is_ok()
    }

    pub fn union(&self, other: &MoveSet) -> MoveSet {
        MoveSet::new(
            self.cell_count,
            self.source.clone(),
            self.iter().chain(other.iter()).map(|(m, p)| (m.clone(), p)),
        )
    }

    pub fn filter(&self, mut keep: impl FnMut(&Move) -> bool) -> MoveSet {
        MoveSet {
            cell_count: self.cell_count,
            source: self.source.clone(),
            moves: self.moves.iter().filter(|m| keep(m)).cloned().collect(),
            provenance: self
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(_, p)| p)
                .collect(),
        }
    }

    pub fn retag(&self, tag: Provenance) -> MoveSet {
        MoveSet {
            provenance: vec![tag; self.moves.len()],
            ..self.clone()
        }
    }

    /// Is every member of `self` in `other` (up to sign)?
    pub fn is_subset_of(&self, other: &MoveSet) -> bool {
        self.moves.iter().all(|m| other.contains(m))
    }

    /// `(+z, -z)` masks of the square-free members; others can never act on zero-one tables.
    pub fn square_free_masks(&self) -> Result<Vec<MoveMask>> {
        if self.cell_count > 128 {
            return Err(Error::TooManyCells(self.cell_count));
        }
        Ok(self.moves.iter().filter_map(Move::masks).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parts_and_degree() {
        let z = Move::from_dense(&[2, -1, 0, -1, 0]).unwrap();
        assert_eq!(z.degree(), 2);
        assert_eq!(z.l1_norm(), 4);
        assert!(!z.is_square_free());
        assert_eq!(z.positive_part().collect::<Vec<_>>(), vec![(0, 2)]);
        assert_eq!(z.negative_part().collect::<Vec<_>>(), vec![(1, 1), (3, 1)]);
    }

    #[test]
    fn canonical_sign_first_entry_positive() {
        let z = Move::from_dense(&[0, -1, 1]).unwrap().canonical();
        assert_eq!(z.entries(), &[(1, 1), (2, -1)]);
        assert_eq!(Move::from_dense(&[0, 0]), None);
    }

    #[test]
    fn move_set_dedups_up_to_sign() {
        let a = Move::from_parts(&[0, 3], &[1, 2]).unwrap();
        let b = a.negate();
        let s = MoveSet::tagged(4, "t", [a.clone(), b], Provenance::Basic);
        assert_eq!(s.len(), 1);
        assert!(s.contains(&a.negate()));
    }

    #[test]
    fn mask_application() {
        let z = Move::from_parts(&[0, 3], &[1, 2]).unwrap().masks().unwrap();
        let x = 0b0110u128;
        assert!(z.applies_to(x));
        assert!(!z.applies_negated_to(x));
        assert!(z.applies_negated_to(0b1001));
    }

    #[test]
    fn provenance_tags_round_trip() {
        for p in [
            Provenance::Graver,
            Provenance::Loop(3),
            Provenance::PrunedSurvivor,
            Provenance::Deg8,
        ] {
            assert_eq!(p.to_string().parse::<Provenance>().unwrap(), p);
        }
    }
}
