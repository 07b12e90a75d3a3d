//! Criterion benchmarks for `zeroone`; see `benches/core.rs`.
