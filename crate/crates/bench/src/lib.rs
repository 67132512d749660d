//! Criterion benchmarks for the teammaxmin solvers live in `benches/`.
