//! Benchmark harness crate; see `benches/parametrizations.rs`.
