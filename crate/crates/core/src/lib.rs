//! Computable zero-full dichotomy laws for shrinking-target sets in
//! β-dynamical systems.
//!
//! The toolkit enumerates β-expansion cylinders exactly, evaluates the
//! critical series that govern zero/full Hausdorff measure of weighted and
//! multiplicative shrinking-target sets, executes the covering and
//! mass-distribution constructions behind those dichotomies, and verifies
//! every numerically checkable ingredient at desk scale.
//!
//! Module map:
//! - [`beta_core`] — digits, admissibility, cylinder intervals, full-cylinder
//!   enumeration and counting for arbitrary real β > 1.
//! - [`hitset_geometry`] — the geometry of one target block: anchor points,
//!   inner/outer ball sandwiches, weighted product regions, multiplicative
//!   pullbacks.
//! - [`dimension_functions`] — the power-log dimension-function family and
//!   its growth partial order, decided symbolically.
//! - [`series_classifier`] — the per-level optimal scale `s_n`, symbolic
//!   series convergence, and the dichotomy verdicts.
//! - [`covering_engine`] — per-scale cover counts, a brute-force near-optimal
//!   cover oracle, and the hyperboloid-neighborhood cover.
//! - [`divergence_lab`] — the divergence-side construction: frames, the
//!   auxiliary rate tuple, separated hyperrectangle families, and the mass
//!   distribution with its ball bounds.
//! - [`measure_lab`] — exact one-dimensional union measures, Monte-Carlo
//!   estimates, second-moment lower bounds, and content bounds.

pub mod beta_core;
pub mod covering_engine;
pub mod dimension_functions;
pub mod divergence_lab;
pub mod error;
pub mod hitset_geometry;
pub mod measure_lab;
pub mod prec;
pub mod series_classifier;

pub use error::{Error, Result};
