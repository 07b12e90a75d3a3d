//! Exact integer and rational linear algebra at desk scale.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Dense row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::LengthMismatch {
                expected: cols,
                got: bad.len(),
            });
        }
        Ok(IntMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[i64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<i64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// Exact `A x` with overflow detection.
    pub fn mul_vec(&self, x: &[i64]) -> Result<Vec<i64>> {
        if x.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        (0..self.rows)
            .map(|r| {
                self.row(r).iter().zip(x).try_fold(0i64, |acc, (&a, &v)| {
                    a.checked_mul(v)
                        .and_then(|p| acc.checked_add(p))
                        .ok_or(Error::Overflow("matrix-vector product"))
                })
            })
            .collect()
    }

    /// `A z` for a sparse vector.
    pub fn mul_sparse(&self, z: &[(usize, i64)]) -> Result<Vec<i64>> {
        let mut out = vec![0i64; self.rows];
        for &(c, v) in z {
            for (r, o) in out.iter_mut().enumerate() {
                let p = self
                    .get(r, c)
                    .checked_mul(v)
                    .ok_or(Error::Overflow("matrix-vector product"))?;
                *o = o
                    .checked_add(p)
                    .ok_or(Error::Overflow("matrix-vector product"))?;
            }
        }
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        let rows: Vec<Vec<BigRational>> = self
            .to_rows()
            .into_iter()
            .map(|r| r.into_iter().map(rat).collect())
            .collect();
        rref(rows, self.cols).1.len()
    }
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Reduced row echelon form over Q, pivoting only in the first `pivot_cols` columns.
fn rref(mut m: Vec<Vec<BigRational>>, pivot_cols: usize) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    (m, pivots)
}

/// Some rational `w` with `wᵀ A = (1,…,1)`, verified exactly; `None` if none exists.
pub fn homogeneity_witness(a: &IntMatrix) -> Option<Vec<BigRational>> {
    // Solve Aᵀ w = 1 via the augmented system [Aᵀ | 1].
    let (m, n) = (a.rows(), a.cols());
    let aug: Vec<Vec<BigRational>> = (0..n)
        .map(|c| {
            (0..m)
                .map(|r| rat(a.get(r, c)))
                .chain(std::iter::once(BigRational::one()))
                .collect()
        })
        .collect();
    let (red, pivots) = rref(aug, m);
    if red.iter().skip(pivots.len()).any(|row| !row[m].is_zero()) {
        return None;
    }
    let mut w = vec![BigRational::zero(); m];
    for (row, &c) in red.iter().zip(&pivots) {
        w[c] = row[m].clone();
    }
    verify_witness(a, &w).then_some(w)
}

pub fn verify_witness(a: &IntMatrix, w: &[BigRational]) -> bool {
    w.len() == a.rows()
        && (0..a.cols()).all(|c| {
            let s: BigRational = (0..a.rows()).map(|r| &w[r] * rat(a.get(r, c))).sum();
            s.is_one()
        })
}

/// Row echelon form over Z by unimodular row operations, pivoting on the first
/// `pivot_cols` columns. Pivots are made positive and entries above each pivot
/// reduced into `[0, pivot)`. Returns the rows and the pivot columns; rows past
/// the pivot count are zero on the pivot columns.
pub fn integer_echelon(
    mut m: Vec<Vec<i128>>,
    pivot_cols: usize,
) -> Result<(Vec<Vec<i128>>, Vec<usize>)> {
    let of = || Error::Overflow("integer echelon");
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == m.len() {
            break;
        }
        loop {
            // smallest nonzero magnitude in column c below r becomes the pivot
            let Some(p) = (r..m.len())
                .filter(|&i| m[i][c] != 0)
                .min_by_key(|&i| m[i][c].unsigned_abs())
            else {
                break;
            };
            m.swap(r, p);
            let mut done = true;
            for i in r + 1..m.len() {
                if m[i][c] != 0 {
                    let q = m[i][c].div_euclid(m[r][c]);
                    let (head, tail) = m.split_at_mut(i);
                    for (v, pv) in tail[0].iter_mut().zip(&head[r]) {
                        *v = v
                            .checked_sub(q.checked_mul(*pv).ok_or_else(of)?)
                            .ok_or_else(of)?;
                    }
                    if m[i][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m[r][c] == 0 {
            continue;
        }
        if m[r][c] < 0 {
            for v in m[r].iter_mut() {
                *v = -*v;
            }
        }
        for i in 0..r {
            let q = m[i][c].div_euclid(m[r][c]);
            if q != 0 {
                let (head, tail) = m.split_at_mut(r);
                for (v, pv) in head[i].iter_mut().zip(&tail[0]) {
                    *v = v
                        .checked_sub(q.checked_mul(*pv).ok_or_else(of)?)
                        .ok_or_else(of)?;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    Ok((m, pivots))
}

/// A basis of the integer lattice `{z ∈ Zⁿ : A z = 0}`, in Hermite normal form.
pub fn kernel_lattice_basis(a: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    let (m, n) = (a.rows(), a.cols());
    // rows of [Aᵀ | I]; unimodular row ops keep the right block a basis of Zⁿ
    let aug: Vec<Vec<i128>> = (0..n)
        .map(|c| {
            (0..m)
                .map(|r| a.get(r, c) as i128)
                .chain((0..n).map(|k| (k == c) as i128))
                .collect()
        })
        .collect();
    let (ech, pivots) = integer_echelon(aug, m)?;
    let kernel: Vec<Vec<i128>> = ech[pivots.len()..]
        .iter()
        .map(|row| row[m..].to_vec())
        .collect();
    let (hnf, piv) = integer_echelon(kernel, n)?;
    hnf.into_iter()
        .take(piv.len())
        .map(|row| {
            row.into_iter()
                .map(|v| i64::try_from(v).map_err(|_| Error::Overflow("kernel basis")))
                .collect()
        })
        .collect()
}

/// Greatest common divisor of the entries, as a positive value (0 for the zero vector).
pub fn content(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| gcd(g, x.abs()))
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
