//! Criterion benchmarks for the simulation and detection hot paths;
//! see `benches/engine.rs`.
