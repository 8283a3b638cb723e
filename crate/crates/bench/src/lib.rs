//! Criterion benchmarks for the `tpdyn` crate live under `benches/`.
