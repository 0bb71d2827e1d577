//! The metric on D[0,1] combining value deviation with a log-slope
//! time-change penalty.
//!
//! For a time change `lambda` the two ingredients are
//!
//! ```text
//! value(f, g, lambda) = sup_t |f(t) - g(lambda(t))|
//! slope(lambda)       = sup_{s != t} |ln (lambda(t)-lambda(s))/(t-s)|
//! ```
//!
//! and the distance is the infimum over time changes of the max of the
//! two. Every chord slope of a piecewise-linear `lambda` is a convex
//! combination of its segment slopes, so the slope penalty is exactly the
//! max of `|ln slope|` over segments.
//!
//! The infimum is not available in closed form for arbitrary inputs, so
//! [`distance`] reports a certified bracket `[lower, upper]`: `upper` is
//! the exactly evaluated metric of an explicit witness, `lower` an
//! analytic certificate ([`jump_lower_bound`]). [`distance_oracle`] is an
//! independent search route used to cross-check the optimizer.

mod optimize;
mod oracle;

pub use optimize::{distance, DistanceOpts};
pub use oracle::{distance_oracle, OracleError};

use crate::cadlag::{compose_time_change, sup_norm_dist, CadlagFn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimeChangeError {
    #[error("time-change knots must be strictly increasing in both coordinates (knot {index})")]
    NonMonotone { index: usize },
    #[error("time change must map 0 to 0 and 1 to 1")]
    EndpointsNotPinned,
    #[error("non-finite time-change knot at index {index}")]
    NonFinite { index: usize },
}

/// Strictly increasing piecewise-linear homeomorphism of `[0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTimeChange")]
pub struct TimeChange {
    knots: Vec<TcKnot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcKnot {
    pub t: f64,
    pub y: f64,
}

#[derive(Deserialize)]
struct RawTimeChange {
    knots: Vec<TcKnot>,
}

impl TryFrom<RawTimeChange> for TimeChange {
    type Error = TimeChangeError;

    fn try_from(raw: RawTimeChange) -> Result<Self, Self::Error> {
        TimeChange::new(raw.knots.into_iter().map(|k| (k.t, k.y)).collect())
    }
}

impl TimeChange {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, TimeChangeError> {
        if points.len() < 2 {
            return Err(TimeChangeError::EndpointsNotPinned);
        }
        for (i, &(t, y)) in points.iter().enumerate() {
            if !(t.is_finite() && y.is_finite()) {
                return Err(TimeChangeError::NonFinite { index: i });
            }
        }
        let first = points[0];
        let last = points[points.len() - 1];
        if first != (0.0, 0.0) || last != (1.0, 1.0) {
            return Err(TimeChangeError::EndpointsNotPinned);
        }
        for i in 1..points.len() {
            if points[i].0 <= points[i - 1].0 || points[i].1 <= points[i - 1].1 {
                return Err(TimeChangeError::NonMonotone { index: i });
            }
        }
        Ok(Self {
            knots: points.into_iter().map(|(t, y)| TcKnot { t, y }).collect(),
        })
    }

    pub fn identity() -> Self {
        Self {
            knots: vec![TcKnot { t: 0.0, y: 0.0 }, TcKnot { t: 1.0, y: 1.0 }],
        }
    }

    pub fn knots(&self) -> &[TcKnot] {
        &self.knots
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.iter().map(|k| k.t)
    }

    /// Value at `t` (clamped to the domain).
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let i = self.knots.partition_point(|k| k.t <= t).clamp(1, self.knots.len() - 1) - 1;
        let a = self.knots[i];
        let b = self.knots[i + 1];
        if t == a.t {
            return a.y;
        }
        if t == b.t {
            return b.y;
        }
        a.y + (b.y - a.y) * ((t - a.t) / (b.t - a.t))
    }

    /// Unique `t` with `eval(t) = y` (clamped to the range).
    pub fn preimage(&self, y: f64) -> f64 {
        let y = y.clamp(0.0, 1.0);
        let i = self.knots.partition_point(|k| k.y <= y).clamp(1, self.knots.len() - 1) - 1;
        let a = self.knots[i];
        let b = self.knots[i + 1];
        if y == a.y {
            return a.t;
        }
        if y == b.y {
            return b.t;
        }
        a.t + (b.t - a.t) * ((y - a.y) / (b.y - a.y))
    }

    /// The inverse map; knot coordinates swap exactly.
    pub fn inverse(&self) -> Self {
        Self {
            knots: self.knots.iter().map(|k| TcKnot { t: k.y, y: k.t }).collect(),
        }
    }

    /// `self` after `inner`: `t -> self(inner(t))`.
    pub fn compose(&self, inner: &TimeChange) -> Self {
        let mut times: Vec<f64> = inner.times().collect();
        for k in &self.knots {
            times.push(inner.preimage(k.t));
        }
        times.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        let knots = times
            .into_iter()
            .map(|t| TcKnot {
                t,
                y: self.eval(inner.eval(t)),
            })
            .collect();
        Self { knots }
    }

    fn segments(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.knots
            .windows(2)
            .map(|w| (w[1].t - w[0].t, w[1].y - w[0].y))
    }
}

/// Exact log-slope penalty `max_i |ln slope_i|`.
///
/// Computed as `ln(max(dt,dy)/min(dt,dy))` per segment so that a time
/// change and its inverse give bit-identical penalties.
pub fn slope_metric(lambda: &TimeChange) -> f64 {
    lambda
        .segments()
        .map(|(dt, dy)| {
            let (hi, lo) = if dy >= dt { (dy, dt) } else { (dt, dy) };
            (hi / lo).ln()
        })
        .fold(0.0, f64::max)
}

/// Classic diagnostic deviation `max_t |lambda(t) - t|` (attained at a
/// knot since the difference is piecewise linear).
pub fn time_deviation(lambda: &TimeChange) -> f64 {
    lambda
        .knots()
        .iter()
        .map(|k| (k.y - k.t).abs())
        .fold(0.0, f64::max)
}

/// Both halves of the metric for a fixed time change:
/// `(sup_t |f(t) - g(lambda(t))|, slope_metric(lambda))`.
pub fn distance_given(f: &CadlagFn, g: &CadlagFn, lambda: &TimeChange) -> (f64, f64) {
    let g_lam = compose_time_change(g, lambda);
    (sup_norm_dist(f, &g_lam), slope_metric(lambda))
}

/// Analytic certificate: when one function is continuous and the other
/// jumps by `J`, every time change leaves a deviation of at least `J/2`
/// on one side of the jump. Returns 0 when both jump or both are
/// continuous.
pub fn jump_lower_bound(f: &CadlagFn, g: &CadlagFn) -> f64 {
    match (f.is_continuous(), g.is_continuous()) {
        (true, false) => g.max_abs_jump() / 2.0,
        (false, true) => f.max_abs_jump() / 2.0,
        _ => 0.0,
    }
}

/// Certified bracket for a distance query plus the realizing witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceResult {
    /// Exactly evaluated metric of `witness` (achievable value).
    pub upper: f64,
    /// Certified lower bound.
    pub lower: f64,
    pub value_part: f64,
    pub slope_part: f64,
    pub witness: TimeChange,
    /// Set when the candidate enumeration was truncated by the budget.
    pub budget_exhausted: bool,
}

impl DistanceResult {
    pub(crate) fn from_witness(f: &CadlagFn, g: &CadlagFn, witness: TimeChange) -> Self {
        let (value_part, slope_part) = distance_given(f, g, &witness);
        let upper = value_part.max(slope_part);
        let lower = jump_lower_bound(f, g).min(upper);
        Self {
            upper,
            lower,
            value_part,
            slope_part,
            witness,
            budget_exhausted: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cadlag::Knot;

    #[test]
    fn identity_has_zero_penalty() {
        assert_eq!(slope_metric(&TimeChange::identity()), 0.0);
    }

    #[test]
    fn example_reparam_slopes() {
        // two-segment map through (1/2, 1/4): slopes 1/2 and 3/2
        let lam = TimeChange::new(vec![(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)]).unwrap();
        assert!((slope_metric(&lam) - 2.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn single_interior_knot_closed_form() {
        let lam = TimeChange::new(vec![(0.0, 0.0), (0.5, 0.6), (1.0, 1.0)]).unwrap();
        assert!((slope_metric(&lam) - 1.25f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn slope_metric_invariant_under_inversion() {
        let lam = TimeChange::new(vec![(0.0, 0.0), (0.3, 0.45), (0.8, 0.6), (1.0, 1.0)]).unwrap();
        assert_eq!(slope_metric(&lam), slope_metric(&lam.inverse()));
    }

    #[test]
    fn time_change_rejects_bad_inputs() {
        assert!(TimeChange::new(vec![(0.0, 0.0), (0.5, 0.5)]).is_err());
        assert!(TimeChange::new(vec![(0.0, 0.0), (0.6, 0.5), (0.5, 0.7), (1.0, 1.0)]).is_err());
        assert!(TimeChange::new(vec![(0.0, 0.0), (0.5, 0.5), (1.0, 0.9)]).is_err());
    }

    #[test]
    fn distance_given_identity_is_sup_norm() {
        let f = CadlagFn::unit_step(0.5).unwrap();
        let g = CadlagFn::unit_step(0.6).unwrap();
        let (v, s) = distance_given(&f, &g, &TimeChange::identity());
        assert_eq!(s, 0.0);
        assert_eq!(v, sup_norm_dist(&f, &g));
        let (v0, s0) = distance_given(&f, &f, &TimeChange::identity());
        assert_eq!((v0, s0), (0.0, 0.0));
    }

    #[test]
    fn distance_given_jump_alignment() {
        let f = CadlagFn::unit_step(0.5).unwrap();
        let g = CadlagFn::unit_step(0.6).unwrap();
        let lam = TimeChange::new(vec![(0.0, 0.0), (0.5, 0.6), (1.0, 1.0)]).unwrap();
        let (v, s) = distance_given(&f, &g, &lam);
        assert_eq!(v, 0.0);
        assert!((s - 1.25f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn distance_given_example_members() {
        // ramp member vs the step limit under the member's own reparam
        let ramp = CadlagFn::new(vec![
            Knot::flat(0.0, 0.0),
            Knot::flat(0.25, 0.0),
            Knot::flat(0.5, 1.0),
            Knot::flat(1.0, 1.0),
        ])
        .unwrap();
        let x = CadlagFn::unit_step(0.5).unwrap();
        let lam = TimeChange::new(vec![(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)]).unwrap();
        let (v, _s) = distance_given(&ramp, &x, &lam);
        assert_eq!(v, 1.0);
    }

    #[test]
    fn half_jump_certificate() {
        let cont = CadlagFn::from_polygon(&[(0.0, 0.0), (0.5, 1.0), (1.0, 1.0)]).unwrap();
        let step = CadlagFn::unit_step(0.5).unwrap();
        assert_eq!(jump_lower_bound(&cont, &step), 0.5);
        assert_eq!(jump_lower_bound(&step, &cont), 0.5);
        assert_eq!(jump_lower_bound(&cont, &cont), 0.0);
        assert_eq!(jump_lower_bound(&step, &step), 0.0);
    }

    #[test]
    fn compose_and_inverse_round_trip() {
        let lam = TimeChange::new(vec![(0.0, 0.0), (0.4, 0.3), (1.0, 1.0)]).unwrap();
        let id = lam.compose(&lam.inverse());
        for t in [0.0, 0.1, 0.33, 0.7, 1.0] {
            assert!((id.eval(t) - t).abs() < 1e-12);
        }
    }
}
