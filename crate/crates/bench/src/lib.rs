//! Criterion benchmarks for qcoin-core; see `benches/`.
