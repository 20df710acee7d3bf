//! Benchmark-only crate; see `benches/quantize.rs`.
