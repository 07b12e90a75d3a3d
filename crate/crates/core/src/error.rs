use thiserror::Error;

use crate::moves::MoveSet;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index component {axis} = {value} out of range 0..{bound}")]
    IndexOutOfRange {
        axis: usize,
        value: usize,
        bound: usize,
    },
    #[error("index has {got} components, cell space has {expected} axes")]
    IndexArity { expected: usize, got: usize },
    #[error("cell {0:?} is a structural zero")]
    StructuralZero(Vec<usize>),
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("vector is not a move of the configuration")]
    NotAMove,
    #[error("table is not zero-one")]
    NotZeroOne,
    #[error("empty move set")]
    EmptyMoveSet,
    #[error("fiber exceeds cap of {cap} tables")]
    CapExceeded { cap: usize },
    #[error("tables do not share a sufficient statistic")]
    MixedKeys,
    #[error("the two tables are equal")]
    EqualTables,
    #[error("{0} cells exceeds the zero-one bitmask limit of 128")]
    TooManyCells(usize),
    #[error("move set is not a subset of the reference set")]
    NotSubset,
    #[error("no conformal decomposition within the move set")]
    NoDecomposition,
    #[error("iterative proportional fitting did not converge in {0} sweeps")]
    IpfNoConvergence(usize),
    #[error("Graver budget exhausted ({reason}); {} moves computed so far", partial.len())]
    BudgetExhausted {
        reason: String,
        partial: Box<MoveSet>,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
