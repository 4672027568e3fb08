//! Criterion benchmarks for `stokes-core`; see `benches/kernels.rs`.
