//! Benchmarks for the slicing protocols live under `benches/`.
