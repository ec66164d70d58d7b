//! Benchmark-only crate; see `benches/poskit.rs`.
