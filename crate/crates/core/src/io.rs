//! Text formats. Matrices follow the 4ti2 convention: a header line `nrows ncols`
//! and then the entries row by row, whitespace separated. Tables are one-row
//! matrices, move sets have one dense move per row, and a move set's provenance
//! tags live in a sidecar file (`<path>.prov`, one tag per line).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::IntMatrix;
use crate::moves::{Move, MoveSet, Provenance, Table};

pub fn format_matrix(rows: &[Vec<i64>], ncols: usize) -> String {
    let mut s = format!("{} {}\n", rows.len(), ncols);
    for row in rows {
        let line: Vec<String> = row.iter().map(ToString::to_string).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

pub fn parse_matrix(text: &str) -> Result<Vec<Vec<i64>>> {
    let mut tokens = text.split_whitespace();
    let mut dim = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {what} in header")))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad {what}: {e}")))
    };
    let (nrows, ncols) = (dim("row count")?, dim("column count")?);
    let values: Vec<i64> = tokens
        .map(|t| {
            t.parse()
                .map_err(|e| Error::Parse(format!("bad entry {t:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    if values.len() != nrows * ncols {
        return Err(Error::Parse(format!(
            "header says {nrows}x{ncols} but found {} entries",
            values.len()
        )));
    }
    if ncols == 0 {
        return Ok(vec![Vec::new(); nrows]);
    }
    Ok(values.chunks(ncols).map(<[i64]>::to_vec).collect())
}

pub fn read_matrix(path: &Path) -> Result<IntMatrix> {
    let rows = parse_matrix(&fs::read_to_string(path)?)?;
    IntMatrix::from_rows(&rows)
}

pub fn write_matrix(path: &Path, a: &IntMatrix) -> Result<()> {
    fs::write(path, format_matrix(&a.to_rows(), a.cols()))?;
    Ok(())
}

pub fn format_tables(tables: &[Table], ncols: usize) -> String {
    let rows: Vec<Vec<i64>> = tables.iter().map(|t| t.values.clone()).collect();
    format_matrix(&rows, ncols)
}

pub fn parse_tables(text: &str) -> Result<Vec<Table>> {
    Ok(parse_matrix(text)?.into_iter().map(Table::new).collect())
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut tables = parse_tables(&fs::read_to_string(path)?)?;
    if tables.len() != 1 {
        return Err(Error::Parse(format!(
            "expected one table row, found {}",
            tables.len()
        )));
    }
    Ok(tables.remove(0))
}

pub fn write_table(path: &Path, t: &Table) -> Result<()> {
    fs::write(path, format_tables(std::slice::from_ref(t), t.len()))?;
    Ok(())
}

pub fn provenance_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".prov");
    PathBuf::from(s)
}

pub fn format_move_set(b: &MoveSet) -> String {
    let rows: Vec<Vec<i64>> = b
        .moves()
        .iter()
        .map(|z| z.to_dense(b.cell_count()))
        .collect();
    format_matrix(&rows, b.cell_count())
}

pub fn format_provenance(b: &MoveSet) -> String {
    b.provenance().iter().fold(String::new(), |mut s, p| {
        let _ = writeln!(s, "{p}");
        s
    })
}

/// Dense rows to `path`, tags to the sidecar.
pub fn write_move_set(path: &Path, b: &MoveSet) -> Result<()> {
    fs::write(path, format_move_set(b))?;
    fs::write(provenance_path(path), format_provenance(b))?;
    Ok(())
}

/// Rows become moves (zero rows are skipped); tags come from the sidecar when it
/// exists, otherwise every move is tagged `file`.
pub fn parse_move_set(text: &str, tags: Option<&str>, source: &str) -> Result<MoveSet> {
    let rows = parse_matrix(text)?;
    let ncols = text
        .split_whitespace()
        .nth(1)
        .and_then(|t| t.parse().ok())
        .unwrap_or(0);
    let tags: Vec<Provenance> = match tags {
        Some(t) => t
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().parse())
            .collect::<Result<_>>()?,
        None => vec![Provenance::File; rows.len()],
    };
    if tags.len() != rows.len() {
        return Err(Error::Parse(format!(
            "{} provenance tags for {} moves",
            tags.len(),
            rows.len()
        )));
    }
    let items = rows
        .iter()
        .zip(tags)
        .filter_map(|(r, p)| Move::from_dense(r).map(|m| (m, p)));
    Ok(MoveSet::new(ncols, source, items))
}

pub fn read_move_set(path: &Path) -> Result<MoveSet> {
    let text = fs::read_to_string(path)?;
    let side = provenance_path(path);
    let tags = if side.exists() {
        Some(fs::read_to_string(side)?)
    } else {
        None
    };
    parse_move_set(&text, tags.as_deref(), &path.display().to_string())
}

/// One 0-based multi-index per line, comma separated; blank lines and `#`
/// comments are ignored.
pub fn parse_structural_zeros(text: &str) -> Result<BTreeSet<Vec<usize>>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(',')
                .map(|v| {
                    v.trim()
                        .parse()
                        .map_err(|e| Error::Parse(format!("bad index {v:?}: {e}")))
                })
                .collect()
        })
        .collect()
}

pub fn format_structural_zeros(zeros: &BTreeSet<Vec<usize>>) -> String {
    zeros.iter().fold(String::new(), |mut s, z| {
        let parts: Vec<String> = z.iter().map(ToString::to_string).collect();
        let _ = writeln!(s, "{}", parts.join(","));
        s
    })
}

/// `degree count` per line.
pub fn format_histogram(h: &BTreeMap<i64, usize>) -> String {
    h.iter().fold(String::new(), |mut s, (d, c)| {
        let _ = writeln!(s, "{d} {c}");
        s
    })
}
