//! Criterion benchmarks for the eprlab kernels live in `benches/`.
