//! Criterion benchmarks for the analysis pipeline live in `benches/`.
