//! Simulation engine and analysis toolkit for generalised Langton's ants.
//!
//! The crate simulates ants driven by a rule word over `{L, R}` on an
//! unbounded sparse grid, detects emergent periodic "highway" behaviour from
//! the trace, verifies candidate highways exactly against the recurrence
//! definition, constructs the known highway families of the `L^(2k)R`,
//! `L^(2k+1)R` and `LLRLRL` ants, and runs seeded Monte-Carlo censuses of
//! highway frequencies over random initial perturbations.

pub mod antpat;
pub mod constructions;
pub mod engine;
pub mod geom;
pub mod highway;
pub mod montecarlo;
pub mod pattern;
pub mod picture;
pub mod render;
pub mod rule;

pub use engine::{step, unstep, Configuration, EngineConfig, EngineError, Simulator};
pub use geom::{Cell, Direction};
pub use highway::{detect, extract_candidate, verify_highway, DetectionReport, Highway};
pub use pattern::{apply_pattern_steps, Pattern};
pub use picture::Picture;
pub use rule::{Letter, RuleWord};
