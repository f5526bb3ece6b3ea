//! Benchmarks for the implosion pipeline; see `benches/pipeline.rs`.
