//! Benchmark-only crate; see `benches/pipeline.rs`. Nothing is exported.
