//! Seeded random walks on zero-one fibers, Monte Carlo exact tests and random
//! Latin squares.
//!
//! The generator is ChaCha8 (`rand_chacha`) seeded with `seed_from_u64`, so runs
//! are reproducible across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ntfi, Configuration};
use crate::error::{Error, Result};
use crate::fiber::enumerate_zero_one_fiber;
use crate::movegen::{degree8_moves_4x4, latin_table, ntfi_333_moves, ntfi_basic_moves, NtfiLevel};
use crate::moves::{MoveMask, MoveSet, Table};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Lazy Metropolis walk: each step draws a member uniformly and a sign, and moves
/// iff the result stays zero-one. Yields the state after every step.
pub struct RandomWalk {
    n: usize,
    state: u128,
    /// `None` for members with an entry of magnitude 2 or more, which never apply
    moves: Vec<Option<MoveMask>>,
    rng: ChaCha8Rng,
    proposed: u64,
    accepted: u64,
}

impl RandomWalk {
    pub fn new(cfg: &Configuration, x0: &Table, b: &MoveSet, seed: u64) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::EmptyMoveSet);
        }
        let n = cfg.cell_count();
        if n > 128 {
            return Err(Error::TooManyCells(n));
        }
        if x0.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: x0.len(),
            });
        }
        let state = x0.to_mask().ok_or(Error::NotZeroOne)?;
        if b.moves().iter().any(|z| !cfg.is_move(z)) {
            return Err(Error::NotAMove);
        }
        Ok(RandomWalk {
            n,
            state,
            moves: b.moves().iter().map(|z| z.masks()).collect(),
            rng: rng_from_seed(seed),
            proposed: 0,
            accepted: 0,
        })
    }

    pub fn state(&self) -> u128 {
        self.state
    }

    pub fn table(&self) -> Table {
        Table::from_mask(self.state, self.n)
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    pub fn step(&mut self) -> u128 {
        let k = self.rng.gen_range(0..self.moves.len());
        let plus = self.rng.gen::<bool>();
        self.proposed += 1;
        if let Some(z) = self.moves[k] {
            let z = if plus { z } else { z.negate() };
            if z.applies_to(self.state) {
                self.state ^= z.support();
                self.accepted += 1;
            }
        }
        self.state
    }
}

impl Iterator for RandomWalk {
    type Item = u128;

    fn next(&mut self) -> Option<u128> {
        Some(self.step())
    }
}

/// States `x0, x1, …, x_steps` of a walk.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<Table>,
    pub acceptance_rate: f64,
}

pub fn random_walk(
    cfg: &Configuration,
    x0: &Table,
    b: &MoveSet,
    steps: usize,
    seed: u64,
) -> Result<Trajectory> {
    let mut walk = RandomWalk::new(cfg, x0, b, seed)?;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x0.clone());
    for _ in 0..steps {
        walk.step();
        states.push(walk.table());
    }
    Ok(Trajectory {
        states,
        acceptance_rate: walk.acceptance_rate(),
    })
}

/// Test statistics; larger values are more extreme.
#[derive(Debug, Clone, PartialEq)]
pub enum Statistic {
    /// Pearson chi-square against the fitted table with the observed margins.
    ChiSquareIpf,
    /// `Σ w_c x_c`.
    Linear(Vec<f64>),
}

/// A statistic bound to one fiber (the fitted table is computed once).
pub struct Evaluator {
    kind: Statistic,
    fitted: Vec<f64>,
}

impl Evaluator {
    pub fn new(cfg: &Configuration, x_obs: &Table, statistic: &Statistic) -> Result<Self> {
        let fitted = match statistic {
            Statistic::ChiSquareIpf => ipf(cfg, x_obs)?,
            Statistic::Linear(w) => {
                if w.len() != cfg.cell_count() {
                    return Err(Error::LengthMismatch {
                        expected: cfg.cell_count(),
                        got: w.len(),
                    });
                }
                Vec::new()
            }
        };
        Ok(Evaluator {
            kind: statistic.clone(),
            fitted,
        })
    }

    pub fn fitted(&self) -> &[f64] {
        &self.fitted
    }

    pub fn eval_mask(&self, x: u128) -> f64 {
        match &self.kind {
            Statistic::ChiSquareIpf => self
                .fitted
                .iter()
                .enumerate()
                .filter(|(_, &m)| m > 1e-12)
                .map(|(c, &m)| {
                    let d = (x >> c & 1) as f64 - m;
                    d * d / m
                })
                .sum(),
            Statistic::Linear(w) => w
                .iter()
                .enumerate()
                .filter(|&(c, _)| x >> c & 1 == 1)
                .map(|(_, &v)| v)
                .sum(),
        }
    }

    /// `s ≥ observed` up to rounding.
    pub fn at_least(s: f64, observed: f64) -> bool {
        s >= observed - 1e-9 * observed.abs().max(1.0)
    }
}

pub const IPF_MAX_SWEEPS: usize = 100_000;
const IPF_TOL: f64 = 1e-10;

/// Maximum-likelihood fitted table with `A m = A x`, by cyclic scaling of one row
/// of `A` at a time. For 0/1 marginal rows this is classical iterative
/// proportional fitting; weighted rows are matched exactly by a 1-D Newton solve.
pub fn ipf(cfg: &Configuration, x: &Table) -> Result<Vec<f64>> {
    let a = cfg.matrix();
    let t = cfg.sufficient_stat(x)?.0;
    let n = cfg.cell_count();
    if (0..a.rows()).any(|r| a.row(r).iter().any(|&v| v < 0)) {
        return Err(Error::InvalidDims(
            "scaling needs a nonnegative configuration".into(),
        ));
    }
    let rows: Vec<Vec<(usize, f64)>> = (0..a.rows())
        .map(|r| {
            a.row(r)
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(|(c, &v)| (c, v as f64))
                .collect()
        })
        .collect();
    let mut m = vec![1.0f64; n];
    for sweep in 0..IPF_MAX_SWEEPS {
        let before = m.clone();
        for (r, row) in rows.iter().enumerate() {
            scale_row(&mut m, row, t[r] as f64);
        }
        // relative change, absolute once an entry has decayed below 1e-8
        let change = m
            .iter()
            .zip(&before)
            .map(|(a, b)| (a - b).abs() / b.abs().max(1e-8))
            .fold(0.0, f64::max);
        if change < IPF_TOL && sweep > 0 {
            return Ok(m);
        }
    }
    Err(Error::IpfNoConvergence(IPF_MAX_SWEEPS))
}

/// Multiply `m_c` by `f^{a_c}` on the row so that `Σ a_c m_c = target`.
fn scale_row(m: &mut [f64], row: &[(usize, f64)], target: f64) {
    if row.is_empty() {
        return;
    }
    if target <= 0.0 {
        for &(c, _) in row {
            m[c] = 0.0;
        }
        return;
    }
    let current: f64 = row.iter().map(|&(c, a)| a * m[c]).sum();
    if current <= 0.0 {
        return;
    }
    if row.iter().all(|&(_, a)| a == row[0].1) {
        let f = target / current;
        for &(c, _) in row {
            m[c] *= f;
        }
        return;
    }
    // solve g(s) = Σ a m e^{a s} = target for s = ln f
    let mut s = 0.0f64;
    for _ in 0..100 {
        let (g, dg) = row.iter().fold((0.0, 0.0), |(g, dg), &(c, a)| {
            let v = a * m[c] * (a * s).exp();
            (g + v, dg + a * v)
        });
        let step = (g - target) / dg;
        s -= step.clamp(-5.0, 5.0);
        if step.abs() < 1e-15 {
            break;
        }
    }
    for &(c, a) in row {
        m[c] *= (a * s).exp();
    }
}

/// Walk lengths; `burn_in` defaults to ten times the cell count.
#[derive(Debug, Clone, Copy)]
pub struct WalkOptions {
    /// Number of recorded samples.
    pub steps: usize,
    pub burn_in: Option<usize>,
    pub thinning: usize,
    pub seed: u64,
}

impl WalkOptions {
    pub fn new(steps: usize, seed: u64) -> Self {
        WalkOptions {
            steps,
            burn_in: None,
            thinning: 1,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SampleRun {
    pub seed: u64,
    pub steps: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub observed: f64,
    pub trajectory_stats: Vec<f64>,
    pub acceptance_rate: f64,
    /// `(1 + #{s ≥ observed}) / (1 + samples)`.
    pub p_value: f64,
}

impl SampleRun {
    /// Binomial standard error of the p-value estimate.
    pub fn standard_error(&self) -> f64 {
        let p = self.p_value;
        (p * (1.0 - p) / (self.trajectory_stats.len().max(1)) as f64).sqrt()
    }
}

pub fn exact_test(
    cfg: &Configuration,
    x_obs: &Table,
    b: &MoveSet,
    statistic: &Statistic,
    opts: WalkOptions,
) -> Result<SampleRun> {
    let mut walk = RandomWalk::new(cfg, x_obs, b, opts.seed)?;
    let eval = Evaluator::new(cfg, x_obs, statistic)?;
    let observed = eval.eval_mask(walk.state());
    let burn_in = opts.burn_in.unwrap_or(10 * cfg.cell_count());
    let thinning = opts.thinning.max(1);
    for _ in 0..burn_in {
        walk.step();
    }
    let mut stats = Vec::with_capacity(opts.steps);
    for _ in 0..opts.steps {
        for _ in 0..thinning {
            walk.step();
        }
        stats.push(eval.eval_mask(walk.state()));
    }
    let hits = stats
        .iter()
        .filter(|&&s| Evaluator::at_least(s, observed))
        .count();
    Ok(SampleRun {
        seed: opts.seed,
        steps: opts.steps,
        burn_in,
        thinning,
        observed,
        p_value: (1 + hits) as f64 / (1 + stats.len()) as f64,
        trajectory_stats: stats,
        acceptance_rate: walk.acceptance_rate(),
    })
}

/// Exact conditional p-value under the uniform law on the enumerated fiber.
pub fn exact_p_value(
    cfg: &Configuration,
    x_obs: &Table,
    statistic: &Statistic,
    cap: usize,
) -> Result<f64> {
    let key = cfg.sufficient_stat(x_obs)?;
    let fiber = enumerate_zero_one_fiber(cfg, &key, cap)?;
    let eval = Evaluator::new(cfg, x_obs, statistic)?;
    let x = x_obs.to_mask().ok_or(Error::NotZeroOne)?;
    let observed = eval.eval_mask(x);
    let hits = fiber
        .iter()
        .filter(|t| {
            let m = t.to_mask().expect("fiber tables are zero-one");
            Evaluator::at_least(eval.eval_mask(m), observed)
        })
        .count();
    Ok(hits as f64 / fiber.len() as f64)
}

#[derive(Debug, Clone)]
pub struct LatinSample {
    pub table: Table,
    pub symbols: Vec<Vec<usize>>,
}

/// The moves used to walk on `n x n` Latin squares: the degree-6 orbit for
/// `n = 3`, basic plus degree-8 orbits for `n = 4`.
pub fn latin_moves(n: usize) -> Result<MoveSet> {
    match n {
        3 => Ok(ntfi_333_moves(NtfiLevel::BasicDeg6).filter(|z| z.degree() == 6)),
        4 => Ok(ntfi_basic_moves(4).union(&degree8_moves_4x4())),
        _ => Err(Error::InvalidDims(format!(
            "Latin squares supported for n = 3, 4; got {n}"
        ))),
    }
}

/// Walk from the cyclic square for `steps` steps and return the final square.
pub fn sample_latin_square(n: usize, steps: usize, seed: u64) -> Result<LatinSample> {
    let moves = latin_moves(n)?;
    let cfg = ntfi([n, n, n])?;
    let cyclic: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).map(|j| (i + j) % n).collect())
        .collect();
    let mut walk = RandomWalk::new(&cfg, &latin_table(&cyclic), &moves, seed)?;
    for _ in 0..steps {
        walk.step();
    }
    let table = walk.table();
    let symbols = crate::movegen::symbols_of(&table, n).expect("walk preserves line sums");
    Ok(LatinSample { table, symbols })
}
