//! Criterion benchmarks for the generator, grid algorithms and prompt
//! rendering live under `benches/`.
