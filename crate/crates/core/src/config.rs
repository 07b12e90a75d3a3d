//! Configurations `A` with `t = A x` for every model family used here.

use std::collections::BTreeSet;

use num_rational::BigRational;

use crate::cells::CellSpace;
use crate::error::{Error, Result};
use crate::linalg::{self, IntMatrix};
use crate::moves::{FiberKey, Move, Table};

#[derive(Debug, Clone)]
pub struct Configuration {
    name: String,
    cell_space: CellSpace,
    matrix: IntMatrix,
    row_labels: Vec<String>,
    homogeneity_witness: Option<Vec<BigRational>>,
}

impl Configuration {
    /// Wraps an explicit matrix. The witness is computed, not trusted.
    pub fn from_parts(
        name: impl Into<String>,
        cell_space: CellSpace,
        matrix: IntMatrix,
        row_labels: Vec<String>,
    ) -> Result<Self> {
        if matrix.cols() != cell_space.cell_count() {
            return Err(Error::LengthMismatch {
                expected: cell_space.cell_count(),
                got: matrix.cols(),
            });
        }
        if row_labels.len() != matrix.rows() {
            return Err(Error::LengthMismatch {
                expected: matrix.rows(),
                got: row_labels.len(),
            });
        }
        let homogeneity_witness = linalg::homogeneity_witness(&matrix);
        Ok(Configuration {
            name: name.into(),
            cell_space,
            matrix,
            row_labels,
            homogeneity_witness,
        })
    }

    /// A configuration read from a bare matrix: one axis, one cell per column.
    pub fn from_matrix(name: impl Into<String>, matrix: IntMatrix) -> Result<Self> {
        let space = CellSpace::new(vec![matrix.cols().max(1)])?;
        let labels = (0..matrix.rows()).map(|r| format!("row{r}")).collect();
        Self::from_parts(name, space, matrix, labels)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cell_space(&self) -> &CellSpace {
        &self.cell_space
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn cell_count(&self) -> usize {
        self.matrix.cols()
    }

    pub fn homogeneity_witness(&self) -> Option<&[BigRational]> {
        self.homogeneity_witness.as_deref()
    }

    pub fn sufficient_stat(&self, x: &Table) -> Result<FiberKey> {
        self.matrix.mul_vec(&x.values).map(FiberKey)
    }

    pub fn is_move(&self, z: &Move) -> bool {
        z.entries()
            .last()
            .is_some_and(|&(c, _)| c < self.cell_count())
            && self
                .matrix
                .mul_sparse(z.entries())
                .is_ok_and(|v| v.iter().all(|&x| x == 0))
    }

    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }

    /// `(A 0; E E)` over the cell space doubled along a new leading axis.
    pub fn lawrence_lift(&self) -> Result<Configuration> {
        let n = self.cell_count();
        let m = self.matrix.rows();
        let mut dims = vec![2];
        dims.extend_from_slice(self.cell_space.dims());
        let zeros: BTreeSet<Vec<usize>> = self
            .cell_space
            .structural_zeros()
            .iter()
            .flat_map(|z| {
                (0..2).map(move |b| std::iter::once(b).chain(z.iter().copied()).collect())
            })
            .collect();
        let space = CellSpace::with_structural_zeros(dims, zeros)?;
        let mut a = IntMatrix::zeros(m + n, 2 * n);
        for r in 0..m {
            for c in 0..n {
                a.set(r, c, self.matrix.get(r, c));
            }
        }
        for c in 0..n {
            a.set(m + c, c, 1);
            a.set(m + c, n + c, 1);
        }
        let mut labels = self.row_labels.clone();
        labels.extend((0..n).map(|c| format!("unit[{c}]")));
        Configuration::from_parts(format!("lawrence({})", self.name), space, a, labels)
    }
}

fn fmt_marginal(axes: &[usize], levels: &[usize]) -> String {
    let parts: Vec<String> = axes
        .iter()
        .zip(levels)
        .map(|(a, l)| format!("i{}={}", a + 1, l))
        .collect();
    format!("x({})", parts.join(","))
}

/// One row per marginal cell of each axis subset in `margins`.
fn marginal_rows(space: &CellSpace, margins: &[Vec<usize>]) -> (IntMatrix, Vec<String>) {
    let dims = space.dims();
    let cells: Vec<Vec<usize>> = space.cells().collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for axes in margins {
        let sizes: Vec<usize> = axes.iter().map(|&a| dims[a]).collect();
        let count: usize = sizes.iter().product();
        let base = rows.len();
        rows.extend((0..count).map(|_| vec![0i64; cells.len()]));
        for (k, levels) in product_levels(&sizes).enumerate() {
            labels.push(fmt_marginal(axes, &levels));
            debug_assert_eq!(labels.len(), base + k + 1);
        }
        for (c, idx) in cells.iter().enumerate() {
            let r = axes.iter().fold(0, |acc, &a| acc * dims[a] + idx[a]);
            rows[base + r][c] = 1;
        }
    }
    (IntMatrix::from_rows(&rows).expect("rectangular"), labels)
}

fn product_levels(sizes: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = sizes.iter().product();
    (0..total).map(move |mut k| {
        let mut v = vec![0; sizes.len()];
        for (slot, &s) in v.iter_mut().zip(sizes).rev() {
            *slot = k % s;
            k /= s;
        }
        v
    })
}

fn require_min_dims(dims: &[usize], min_axes: usize) -> Result<()> {
    if dims.len() < min_axes {
        return Err(Error::InvalidDims(format!(
            "need at least {min_axes} axes, got {dims:?}"
        )));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidDims(format!(
            "every axis needs >= 2 levels, got {d}"
        )));
    }
    Ok(())
}

/// Row sums and column sums of an `I x J` table.
pub fn two_way_independence(i: usize, j: usize) -> Result<Configuration> {
    require_min_dims(&[i, j], 2)?;
    let space = CellSpace::new(vec![i, j])?;
    let (a, labels) = marginal_rows(&space, &[vec![0], vec![1]]);
    Configuration::from_parts(format!("two-way-indep {i}x{j}"), space, a, labels)
}

/// All one-dimensional marginals.
pub fn complete_independence(dims: &[usize]) -> Result<Configuration> {
    if dims.is_empty() {
        return Err(Error::InvalidDims("empty dims".into()));
    }
    require_min_dims(dims, 1)?;
    let space = CellSpace::new(dims.to_vec())?;
    let margins: Vec<Vec<usize>> = (0..dims.len()).map(|d| vec![d]).collect();
    let (a, labels) = marginal_rows(&space, &margins);
    Configuration::from_parts(
        format!("complete-indep {}", join_dims(dims)),
        space,
        a,
        labels,
    )
}

/// Row and column sums restricted to the cells in `support`; all other cells
/// are structural zeros and carry no column.
pub fn quasi_independence(
    i: usize,
    j: usize,
    support: &BTreeSet<(usize, usize)>,
) -> Result<Configuration> {
    require_min_dims(&[i, j], 2)?;
    if support.is_empty() {
        return Err(Error::InvalidDims("empty support set".into()));
    }
    if let Some(&(a, b)) = support.iter().find(|&&(a, b)| a >= i || b >= j) {
        return Err(Error::IndexOutOfRange {
            axis: usize::from(a < i),
            value: if a >= i { a } else { b },
            bound: if a >= i { i } else { j },
        });
    }
    let zeros: BTreeSet<Vec<usize>> = (0..i)
        .flat_map(|a| (0..j).map(move |b| (a, b)))
        .filter(|c| !support.contains(c))
        .map(|(a, b)| vec![a, b])
        .collect();
    quasi_independence_with_zeros(i, j, zeros)
}

pub fn quasi_independence_with_zeros(
    i: usize,
    j: usize,
    zeros: BTreeSet<Vec<usize>>,
) -> Result<Configuration> {
    require_min_dims(&[i, j], 2)?;
    let space = CellSpace::with_structural_zeros(vec![i, j], zeros)?;
    if space.cell_count() == 0 {
        return Err(Error::InvalidDims("empty support set".into()));
    }
    let (a, labels) = marginal_rows(&space, &[vec![0], vec![1]]);
    Configuration::from_parts(format!("quasi-indep {i}x{j}"), space, a, labels)
}

/// No-three-factor interaction: all two-dimensional marginals (line sums).
pub fn ntfi(dims: [usize; 3]) -> Result<Configuration> {
    require_min_dims(&dims, 3)?;
    let space = CellSpace::new(dims.to_vec())?;
    let (a, labels) = marginal_rows(&space, &[vec![0, 1], vec![0, 2], vec![1, 2]]);
    Configuration::from_parts(format!("ntfi {}", join_dims(&dims)), space, a, labels)
}

pub fn ntfi_333() -> Configuration {
    ntfi([3, 3, 3]).expect("fixed dims are valid")
}

/// `V`-facet Rasch model on `I_1 x … x I_V x I_{V+1}`, grade axis last with levels
/// `0..I_{V+1}`. Rows are the grade-weighted sums over each facet level, then
/// either one count per grade level or, with `constant_item_param`, the grand total.
pub fn many_facet_rasch(dims: &[usize], constant_item_param: bool) -> Result<Configuration> {
    if dims.len() < 3 {
        return Err(Error::InvalidDims(format!(
            "many-facet Rasch needs >= 2 facets plus a grade axis, got {dims:?}"
        )));
    }
    require_min_dims(dims, 3)?;
    let v = dims.len() - 1;
    let space = CellSpace::new(dims.to_vec())?;
    let cells: Vec<Vec<usize>> = space.cells().collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for facet in 0..v {
        for level in 0..dims[facet] {
            rows.push(
                cells
                    .iter()
                    .map(|idx| {
                        if idx[facet] == level {
                            idx[v] as i64
                        } else {
                            0
                        }
                    })
                    .collect::<Vec<_>>(),
            );
            labels.push(format!("sum grade*x(i{}={})", facet + 1, level));
        }
    }
    if constant_item_param {
        rows.push(vec![1; cells.len()]);
        labels.push("x+".into());
    } else {
        for g in 0..dims[v] {
            rows.push(cells.iter().map(|idx| i64::from(idx[v] == g)).collect());
            labels.push(format!("x(i{}={})", v + 1, g));
        }
    }
    let a = IntMatrix::from_rows(&rows)?;
    Configuration::from_parts(
        if constant_item_param {
            format!("many-facet-rasch-total {}", join_dims(dims))
        } else {
            format!("many-facet-rasch {}", join_dims(dims))
        },
        space,
        a,
        labels,
    )
}

pub fn lawrence_lift(cfg: &Configuration) -> Result<Configuration> {
    cfg.lawrence_lift()
}

fn join_dims(dims: &[usize]) -> String {
    dims.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("x")
}
