use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{ArgGroup, Args, ValueEnum};

use zeroone::config::ntfi;
use zeroone::fiber::{
    build_fiber_graph, check_generalized_crossing, check_strong_crossing, check_weak_crossing,
    enumerate_zero_one_fiber, first_unreduced_pair, sweep_zero_one_fibers, CrossingReport,
    DEFAULT_CAP,
};
use zeroone::graver::{
    degree_histogram, graver_basis, prune_by_one_cancellation, square_free_graver,
};
use zeroone::movegen::{latin_table, symbols_of};
use zeroone::sampler::{
    exact_p_value, exact_test, latin_moves, random_walk, RandomWalk, Statistic, WalkOptions,
};
use zeroone::{io, Configuration, Error, FiberKey, Table};

use crate::model::{read_table_for, resolve_moves, BudgetArgs, ModelArgs};

fn row(t: &Table) -> String {
    t.values
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn cell(cfg: &Configuration, c: usize) -> String {
    match cfg.cell_space().multi_index(c) {
        Ok(idx) => format!(
            "({})",
            idx.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        ),
        Err(_) => c.to_string(),
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Debug, Args)]
pub struct GraverArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Keep only moves with entries in {-1, 0, 1}.
    #[arg(long)]
    square_free: bool,
    /// Prune the square-free basis by one-cancellation (implies --square-free).
    #[arg(long)]
    prune: bool,
    /// Move-set file; tags go to `<out>.prov`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
}

pub fn graver(a: &GraverArgs) -> anyhow::Result<bool> {
    let cfg = a.model.build()?;
    let budget = a.budget.budget();
    let result = if a.square_free || a.prune {
        square_free_graver(&cfg, budget)
    } else {
        graver_basis(&cfg, budget)
    };
    let b = match result {
        Ok(b) => b,
        Err(Error::BudgetExhausted { reason, partial }) => {
            if let Some(out) = &a.out {
                let p = with_suffix(out, ".partial");
                io::write_move_set(&p, &partial)?;
                eprintln!(
                    "incomplete: {} moves written to {}",
                    partial.len(),
                    p.display()
                );
            }
            return Err(Error::BudgetExhausted { reason, partial }.into());
        }
        Err(e) => return Err(e.into()),
    };
    let b = if a.prune {
        prune_by_one_cancellation(&b)
    } else {
        b
    };
    if let Some(out) = &a.out {
        io::write_move_set(out, &b)?;
    }
    print!("{}", io::format_histogram(&degree_histogram(&b)));
    Ok(true)
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct FiberArgs {
    /// Sufficient statistic as a one-row matrix file.
    #[arg(long = "t")]
    t: Option<PathBuf>,
    /// Table file whose fiber is used.
    #[arg(long)]
    from_table: Option<PathBuf>,
}

fn read_key(path: &Path, cfg: &Configuration) -> anyhow::Result<FiberKey> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rows = io::parse_matrix(&text)?;
    if rows.len() != 1 || rows[0].len() != cfg.matrix().rows() {
        bail!(
            "{} must hold one row of {} entries",
            path.display(),
            cfg.matrix().rows()
        );
    }
    Ok(FiberKey(rows.remove(0)))
}

fn key_of(
    t: &Option<PathBuf>,
    from_table: &Option<PathBuf>,
    cfg: &Configuration,
) -> anyhow::Result<FiberKey> {
    match (t, from_table) {
        (Some(p), _) => read_key(p, cfg),
        (None, Some(p)) => Ok(cfg.sufficient_stat(&read_table_for(p, cfg)?)?),
        (None, None) => bail!("one of --t or --from-table is required"),
    }
}

#[derive(Debug, Args)]
pub struct ConnectArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Move-set file or `+`-joined families (graver, square-free, pruned, basic,
    /// loops-R, df1, deg2, deg6, deg8, deg9).
    #[arg(long)]
    moves: String,
    #[command(flatten)]
    fiber: FiberArgs,
    /// Largest fiber to enumerate.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Fiber dump, one table per row; component ids go to `<out>.components`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
}

pub fn connect(a: &ConnectArgs) -> anyhow::Result<bool> {
    let cfg = a.model.build()?;
    let b = resolve_moves(&a.moves, &cfg, &a.model, a.budget.budget())?;
    let key = key_of(&a.fiber.t, &a.fiber.from_table, &cfg)?;
    let fiber = enumerate_zero_one_fiber(&cfg, &key, a.cap)?;
    let component_of = if fiber.is_empty() {
        Vec::new()
    } else {
        build_fiber_graph(&cfg, &fiber, &b)?.component_of
    };
    let count = component_of.iter().max().map_or(0, |&c| c + 1);
    let mut out = format!("fiber size {}\ncomponents {count}\n", fiber.len());
    for c in 0..count {
        let members: Vec<usize> = (0..fiber.len()).filter(|&i| component_of[i] == c).collect();
        let _ = writeln!(
            out,
            "component {c} size {} representative {}",
            members.len(),
            row(&fiber[members[0]])
        );
    }
    print!("{out}");
    if let Some(path) = &a.out {
        write(path, &io::format_tables(&fiber, cfg.cell_count()))?;
        let ids: String = component_of.iter().map(|c| format!("{c}\n")).collect();
        write(&with_suffix(path, ".components"), &ids)?;
    }
    Ok(count <= 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Condition {
    Strong,
    Weak,
    Generalized,
    DistanceReducing,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").args(["t", "from_table", "pair", "sweep"]).multiple(false)))]
pub struct CheckArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum)]
    condition: Condition,
    /// Move set for distance-reducing and generalized.
    #[arg(long)]
    moves: Option<String>,
    /// Sufficient statistic as a one-row matrix file.
    #[arg(long = "t")]
    t: Option<PathBuf>,
    /// Table file whose fiber is checked.
    #[arg(long)]
    from_table: Option<PathBuf>,
    /// Check a single pair of tables.
    #[arg(long, num_args = 2, value_names = ["X", "Y"])]
    pair: Vec<PathBuf>,
    /// Every fiber of every zero-one table.
    #[arg(long)]
    sweep: bool,
    /// Distance reduction from one side of each pair suffices.
    #[arg(long)]
    either_side: bool,
    /// Largest fiber, or number of tables for a sweep.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    #[command(flatten)]
    budget: BudgetArgs,
}

fn masks(tables: &[Table]) -> anyhow::Result<Vec<u128>> {
    tables
        .iter()
        .map(|t| t.to_mask().ok_or_else(|| Error::NotZeroOne.into()))
        .collect()
}

fn fibers_for(a: &CheckArgs, cfg: &Configuration) -> anyhow::Result<Vec<Vec<u128>>> {
    if a.sweep {
        return Ok(sweep_zero_one_fibers(cfg, a.cap)?
            .into_iter()
            .map(|(_, f)| f)
            .collect());
    }
    if let [x, y] = a.pair.as_slice() {
        let (x, y) = (read_table_for(x, cfg)?, read_table_for(y, cfg)?);
        if cfg.sufficient_stat(&x)? != cfg.sufficient_stat(&y)? {
            return Err(Error::MixedKeys.into());
        }
        return Ok(vec![masks(&[x, y])?]);
    }
    let key = key_of(&a.t, &a.from_table, cfg)
        .context("one of --t, --from-table, --pair or --sweep is required")?;
    Ok(vec![masks(&enumerate_zero_one_fiber(cfg, &key, a.cap)?)?])
}

fn describe(cfg: &Configuration, r: &CrossingReport) -> String {
    match &r.witness {
        Some(w) => {
            let (gone, added) = w.cells.split_at(w.cells.len() / 2);
            let side = if w.from_y { "y" } else { "x" };
            let list = |cs: &[usize]| {
                cs.iter()
                    .map(|&c| cell(cfg, c))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            format!(
                "{:?} crossing: from {side}, remove {} add {}",
                r.condition,
                list(gone),
                list(added)
            )
        }
        None => format!("no {:?} crossing pattern", r.condition),
    }
}

pub fn check(a: &CheckArgs) -> anyhow::Result<bool> {
    let cfg = a.model.build()?;
    let budget = a.budget.budget();
    let n = cfg.cell_count();
    if a.condition == Condition::Generalized {
        let spec = a.moves.as_deref().context("--moves is required")?;
        let b = resolve_moves(spec, &cfg, &a.model, budget)?;
        let b0 = square_free_graver(&cfg, budget)?;
        let v = check_generalized_crossing(&b, &b0)?;
        match v.counterexample {
            None => println!(
                "pass: {} square-free moves, every one outside the set crossed",
                b0.len()
            ),
            Some(z) => println!("fail: no crossing pattern for {z}"),
        }
        return Ok(v.holds);
    }
    let fibers = fibers_for(a, &cfg)?;
    let single_pair = !a.pair.is_empty();
    let mut pairs = 0usize;
    match a.condition {
        Condition::Strong | Condition::Weak => {
            let run = |x: &Table, y: &Table| {
                if a.condition == Condition::Strong {
                    check_strong_crossing(x, y, &cfg)
                } else {
                    check_weak_crossing(x, y, &cfg)
                }
            };
            for f in &fibers {
                let tables: Vec<Table> = f.iter().map(|&m| Table::from_mask(m, n)).collect();
                for i in 0..tables.len() {
                    for j in i + 1..tables.len() {
                        pairs += 1;
                        let r = run(&tables[i], &tables[j])?;
                        if single_pair {
                            println!("{}", describe(&cfg, &r));
                        }
                        if r.witness.is_none() {
                            if !single_pair {
                                println!(
                                    "fail: no {:?} crossing pattern\nx {}\ny {}",
                                    a.condition,
                                    row(&tables[i]),
                                    row(&tables[j])
                                );
                            }
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Condition::DistanceReducing => {
            let spec = a.moves.as_deref().context("--moves is required")?;
            let b = resolve_moves(spec, &cfg, &a.model, budget)?;
            let signed: Vec<_> = b
                .moves()
                .iter()
                .filter_map(|z| z.masks())
                .flat_map(|m| [m, m.negate()])
                .collect();
            for f in &fibers {
                pairs += f.len() * f.len().saturating_sub(1) / 2;
                if let Some((i, j)) = first_unreduced_pair(f, &signed, !a.either_side) {
                    println!(
                        "fail: no reducing move\nx {}\ny {}",
                        row(&Table::from_mask(f[i], n)),
                        row(&Table::from_mask(f[j], n))
                    );
                    return Ok(false);
                }
            }
        }
        Condition::Generalized => unreachable!("handled above"),
    }
    println!("pass: {} fiber(s), {pairs} pair(s)", fibers.len());
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatKind {
    /// Pearson chi-square against the fitted table.
    ChiSquare,
    /// Weighted cell sum, weights from --weights.
    Linear,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    moves: String,
    /// Starting (observed) table file.
    #[arg(long)]
    start: PathBuf,
    /// Recorded samples with --stat, walk length without.
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    #[arg(long)]
    seed: u64,
    /// Run an exact test with this statistic instead of a plain walk.
    #[arg(long, value_enum)]
    stat: Option<StatKind>,
    /// Cell weights for --stat linear, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    weights: Vec<f64>,
    /// Defaults to ten times the cell count.
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long, default_value_t = 1)]
    thinning: usize,
    /// Compare with the p-value from full enumeration; fails beyond 3 standard errors.
    #[arg(long, requires = "stat")]
    verify_exact: bool,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Walk states (one table per row) or, with --stat, sampled statistics.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
}

pub fn sample(a: &SampleArgs) -> anyhow::Result<bool> {
    let cfg = a.model.build()?;
    let b = resolve_moves(&a.moves, &cfg, &a.model, a.budget.budget())?;
    let x0 = read_table_for(&a.start, &cfg)?;
    let Some(kind) = a.stat else {
        let tr = random_walk(&cfg, &x0, &b, a.steps, a.seed)?;
        println!("seed {}", a.seed);
        println!("steps {}", a.steps);
        println!("acceptance {:.6}", tr.acceptance_rate);
        println!("final {}", row(tr.states.last().expect("walk has a start")));
        if let Some(p) = &a.out {
            write(p, &io::format_tables(&tr.states, cfg.cell_count()))?;
        }
        return Ok(true);
    };
    let statistic = match kind {
        StatKind::ChiSquare => Statistic::ChiSquareIpf,
        StatKind::Linear => {
            if a.weights.len() != cfg.cell_count() {
                bail!(
                    "--stat linear needs {} weights, got {}",
                    cfg.cell_count(),
                    a.weights.len()
                );
            }
            Statistic::Linear(a.weights.clone())
        }
    };
    let opts = WalkOptions {
        steps: a.steps,
        burn_in: a.burn_in,
        thinning: a.thinning,
        seed: a.seed,
    };
    let run = exact_test(&cfg, &x0, &b, &statistic, opts)?;
    let se = run.standard_error();
    println!("seed {}", run.seed);
    println!("steps {}", run.steps);
    println!("burn-in {}", run.burn_in);
    println!("thinning {}", run.thinning);
    println!("acceptance {:.6}", run.acceptance_rate);
    println!("observed {:.6}", run.observed);
    println!("p-value {:.6}", run.p_value);
    println!("standard-error {:.6}", se);
    if let Some(p) = &a.out {
        let text: String = run
            .trajectory_stats
            .iter()
            .map(|s| format!("{s:.12}\n"))
            .collect();
        write(p, &text)?;
    }
    if a.verify_exact {
        let exact = exact_p_value(&cfg, &x0, &statistic, a.cap)?;
        let ok = (run.p_value - exact).abs() <= 3.0 * se;
        println!("exact-p-value {exact:.6}");
        println!("within-3-se {ok}");
        return Ok(ok);
    }
    Ok(true)
}

#[derive(Debug, Args)]
pub struct LatinArgs {
    /// Order of the square (3 or 4).
    n: usize,
    /// Walk steps between printed squares.
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
}

pub fn latin(a: &LatinArgs) -> anyhow::Result<bool> {
    let n = a.n;
    let moves = latin_moves(n)?;
    let cfg = ntfi([n, n, n])?;
    let cyclic: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).map(|j| (i + j) % n).collect())
        .collect();
    let mut walk = RandomWalk::new(&cfg, &latin_table(&cyclic), &moves, a.seed)?;
    let mut out = String::new();
    for k in 0..a.count {
        for _ in 0..a.steps {
            walk.step();
        }
        let square = symbols_of(&walk.table(), n).expect("walk keeps line sums");
        if k > 0 {
            out.push('\n');
        }
        for r in square {
            let cells: Vec<String> = r.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
    }
    print!("{out}");
    Ok(true)
}
