//! Markov bases, Graver bases and exact tests for zero-one contingency tables.

pub mod cells;
pub mod config;
pub mod error;
pub mod fiber;
pub mod graver;
pub mod io;
pub mod linalg;
pub mod movegen;
pub mod moves;
pub mod sampler;

pub use cells::CellSpace;
pub use config::Configuration;
pub use error::{Error, Result};
pub use graver::{graver_basis, Budget};
pub use moves::{FiberKey, Move, MoveMask, MoveSet, Provenance, Table};
