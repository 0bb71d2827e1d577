//! Numerical laboratory for the space D[0,1] of càdlàg functions on the
//! unit interval.
//!
//! The crate provides, in order of dependency:
//!
//! - [`cadlag`]: finite-knot piecewise-linear càdlàg functions with explicit
//!   left limits, time changes applied to them, and the randomly indexed
//!   composition `z(t) = x_{mu(t)}(t)`.
//! - [`skorokhod`]: the metric on D[0,1] that combines the value deviation
//!   `sup |x(t) - y(lambda(t))|` with the log-slope penalty of the time
//!   change. The infimum over time changes is reported as a certified
//!   bracket `[lower, upper]` with an explicit witness.
//! - [`processes`]: seeded, reproducible samplers for increment sequences,
//!   partial-sum families, random-walk polygons, Wiener reference paths and
//!   Poisson/constant index processes.
//! - [`limits`]: empirical CDFs, Kolmogorov-Smirnov distances, closed-form
//!   limit laws, convergence sweeps over the scale parameter, a
//!   deterministic composition checker and an exact rational evaluation of
//!   a convergence-rate bound for randomly indexed sequences.
//! - [`counterexample`]: a two-parity family of functions converging to a
//!   discontinuous limit for which no common reparameterization works, in
//!   both a continuous-ramp and a step variant.
//!
//! Replicate-level fan-out is parallel by default (rayon); building with
//! `--no-default-features` falls back to sequential execution with
//! identical results.

pub mod cadlag;
pub mod counterexample;
pub mod exec;
pub mod limits;
pub mod processes;
pub mod skorokhod;
mod special;

pub use cadlag::{
    compose_time_change, index_compose, jump_sizes, sup_norm_dist, CadlagError, CadlagFn,
    IndexProcess, IndexedFamily, Knot,
};
pub use exec::ExecMode;
pub use skorokhod::{
    distance, distance_given, distance_oracle, jump_lower_bound, slope_metric, DistanceOpts,
    DistanceResult, OracleError, TimeChange, TimeChangeError,
};
