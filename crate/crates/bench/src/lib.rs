//! Criterion benchmarks for the `specabc` kernels; see `benches/kernels.rs`.
