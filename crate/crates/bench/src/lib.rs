//! Benchmarks for the ma2certify kernels live in `benches/`.
