//! Benchmarks for the modbath kernels live in `benches/`.
