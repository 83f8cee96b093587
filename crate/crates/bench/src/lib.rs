//! Criterion benchmarks for the `chemolab` kernels live in `benches/`.
