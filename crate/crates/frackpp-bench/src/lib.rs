//! Criterion benchmarks for the fractional KPP laboratory live in `benches/`.
