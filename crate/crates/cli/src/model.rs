use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};

use zeroone::config::{
    complete_independence, many_facet_rasch, ntfi, quasi_independence_with_zeros,
    two_way_independence,
};
use zeroone::graver::{graver_basis, prune_by_one_cancellation, square_free_graver};
use zeroone::movegen::{
    basic_moves_two_way, degree2_threeway_patterns, degree8_moves_4x4, df1_loops, loops_degree_r,
    ntfi_333_moves, ntfi_basic_moves, NtfiLevel,
};
use zeroone::{io, Budget, Configuration, MoveSet, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    TwoWayIndep,
    CompleteIndep,
    QuasiIndep,
    Ntfi,
    /// Grade axis last; one count per grade level.
    ManyFacetRasch,
    /// Grade axis last; grand total instead of grade counts.
    ManyFacetRaschTotal,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Built-in configuration family.
    #[arg(long, required_unless_present = "matrix", conflicts_with = "matrix")]
    pub model: Option<ModelKind>,
    /// Levels per axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<usize>,
    /// Structural-zero mask file for quasi-indep.
    #[arg(long)]
    pub zeros: Option<PathBuf>,
    /// Configuration matrix in 4ti2 format instead of a built-in family.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Use the Lawrence lifting of the configuration.
    #[arg(long)]
    pub lawrence: bool,
}

fn two(dims: &[usize]) -> anyhow::Result<(usize, usize)> {
    match dims {
        &[i, j] => Ok((i, j)),
        _ => bail!("this model takes two dims, got {dims:?}"),
    }
}

fn three(dims: &[usize]) -> anyhow::Result<[usize; 3]> {
    match dims {
        &[i, j, k] => Ok([i, j, k]),
        _ => bail!("this model takes three dims, got {dims:?}"),
    }
}

impl ModelArgs {
    pub fn build(&self) -> anyhow::Result<Configuration> {
        let base = match (self.model, &self.matrix) {
            (_, Some(path)) => {
                let a =
                    io::read_matrix(path).with_context(|| format!("reading {}", path.display()))?;
                Configuration::from_matrix(path.display().to_string(), a)?
            }
            (Some(kind), None) => self.build_family(kind)?,
            (None, None) => bail!("one of --model or --matrix is required"),
        };
        Ok(if self.lawrence {
            base.lawrence_lift()?
        } else {
            base
        })
    }

    fn build_family(&self, kind: ModelKind) -> anyhow::Result<Configuration> {
        let d = &self.dims;
        if self.zeros.is_some() && kind != ModelKind::QuasiIndep {
            bail!("--zeros only applies to quasi-indep");
        }
        Ok(match kind {
            ModelKind::TwoWayIndep => {
                let (i, j) = two(d)?;
                two_way_independence(i, j)?
            }
            ModelKind::CompleteIndep => complete_independence(d)?,
            ModelKind::QuasiIndep => {
                let (i, j) = two(d)?;
                let zeros = match &self.zeros {
                    Some(p) => io::parse_structural_zeros(
                        &std::fs::read_to_string(p)
                            .with_context(|| format!("reading {}", p.display()))?,
                    )?,
                    None => Default::default(),
                };
                quasi_independence_with_zeros(i, j, zeros)?
            }
            ModelKind::Ntfi => ntfi(three(d)?)?,
            ModelKind::ManyFacetRasch => many_facet_rasch(d, false)?,
            ModelKind::ManyFacetRaschTotal => many_facet_rasch(d, true)?,
        })
    }

    /// The generated families below assume the built-in cell layout.
    fn plain_family(&self) -> Option<ModelKind> {
        if self.lawrence {
            None
        } else {
            self.model
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BudgetArgs {
    /// Stop the Graver computation after this many elements.
    #[arg(long)]
    pub max_moves: Option<usize>,
    /// Stop the Graver computation after this many seconds.
    #[arg(long)]
    pub max_seconds: Option<u64>,
}

impl BudgetArgs {
    pub fn budget(&self) -> Budget {
        let mut b = Budget::default();
        if let Some(m) = self.max_moves {
            b.max_moves = m;
        }
        b.max_time = self.max_seconds.map(std::time::Duration::from_secs);
        b
    }
}

/// A move-set file, or `+`-joined families: graver, square-free, pruned, basic,
/// loops-R, df1, deg2, deg6, deg8, deg9.
pub fn resolve_moves(
    spec: &str,
    cfg: &Configuration,
    model: &ModelArgs,
    budget: Budget,
) -> anyhow::Result<MoveSet> {
    let path = Path::new(spec);
    let b = if path.is_file() {
        io::read_move_set(path).with_context(|| format!("reading {spec}"))?
    } else {
        let mut out = MoveSet::empty(cfg.cell_count(), spec);
        for part in spec.split('+') {
            out = out.union(&family(part, cfg, model, budget)?);
        }
        out
    };
    if b.cell_count() != cfg.cell_count() {
        bail!(
            "move set has {} cells, configuration has {}",
            b.cell_count(),
            cfg.cell_count()
        );
    }
    if let Some(z) = b.moves().iter().find(|z| !cfg.is_move(z)) {
        bail!("{z} is not a move of {}", cfg.name());
    }
    Ok(b)
}

fn family(
    name: &str,
    cfg: &Configuration,
    model: &ModelArgs,
    budget: Budget,
) -> anyhow::Result<MoveSet> {
    let kind = model.plain_family();
    let d = &model.dims;
    let cube = |n: usize| kind == Some(ModelKind::Ntfi) && d.iter().all(|&k| k == n);
    let ntfi_333 =
        |deg: i64| ntfi_333_moves(NtfiLevel::BasicDeg6Deg9).filter(|z| z.degree() == deg);
    Ok(match name {
        "graver" => graver_basis(cfg, budget)?,
        "square-free" => square_free_graver(cfg, budget)?,
        "pruned" => prune_by_one_cancellation(&square_free_graver(cfg, budget)?),
        "basic" if kind == Some(ModelKind::TwoWayIndep) => {
            let (i, j) = two(d)?;
            basic_moves_two_way(i, j)?
        }
        "basic"
            if kind == Some(ModelKind::Ntfi) && d.len() == 3 && d[0] == d[1] && d[1] == d[2] =>
        {
            ntfi_basic_moves(d[0])
        }
        "df1" if matches!(kind, Some(ModelKind::TwoWayIndep | ModelKind::QuasiIndep)) => {
            df1_loops(cfg.cell_space())?
        }
        "deg2" if kind == Some(ModelKind::CompleteIndep) => degree2_threeway_patterns(three(d)?)?,
        "deg6" if cube(3) => ntfi_333(6),
        "deg9" if cube(3) => ntfi_333(9),
        "deg8" if cube(4) => degree8_moves_4x4(),
        other => match other.strip_prefix("loops-").map(str::parse::<usize>) {
            Some(Ok(r)) if kind == Some(ModelKind::TwoWayIndep) => {
                let (i, j) = two(d)?;
                loops_degree_r(i, j, r)?
            }
            _ => bail!("move family {other:?} is not a file and does not apply to this model"),
        },
    })
}

pub fn read_table_for(path: &Path, cfg: &Configuration) -> anyhow::Result<Table> {
    let t = io::read_table(path).with_context(|| format!("reading {}", path.display()))?;
    if t.len() != cfg.cell_count() {
        bail!(
            "table in {} has {} cells, configuration has {}",
            path.display(),
            t.len(),
            cfg.cell_count()
        );
    }
    Ok(t)
}
