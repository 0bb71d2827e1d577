//! Piecewise-linear càdlàg functions on `[0,1]`.
//!
//! A [`CadlagFn`] is a right-continuous function with finitely many
//! breakpoints, linear between them, and an explicit left limit stored at
//! every breakpoint. Polygons, step functions and integer index paths are
//! all instances of the same representation, so evaluation, left limits,
//! sup-norm distances and compositions are exact (no quadrature, no
//! sampling error).
//!
//! The segment between knots `i` and `i+1` is the straight line from
//! `(t_i, v_i)` to `(t_{i+1}, l_{i+1})`; the jump at knot `i` is
//! `v_i - l_i`. All values are immutable after construction.

use crate::skorokhod::TimeChange;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

/// Relative tolerance accepted when validating knot data.
pub const CONSTRUCTION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CadlagError {
    #[error("knot times must be strictly increasing (violated at knot {index})")]
    NonMonotoneKnots { index: usize },
    #[error("domain must be exactly [0,1], got [{first}, {last}]")]
    DomainNotUnit { first: f64, last: f64 },
    #[error("left limit at knot {index} inconsistent: l={l}, expected {expected}")]
    InconsistentLeftLimit { index: usize, l: f64, expected: f64 },
    #[error("non-finite knot data at knot {index}")]
    NonFiniteKnot { index: usize },
    #[error("evaluation point {t} outside the domain")]
    OutOfDomain { t: f64 },
    #[error("index {index} not covered by the family")]
    IndexOutOfFamily { index: u32 },
    #[error("invalid index path: {0}")]
    InvalidIndexPath(String),
}

/// One breakpoint: time, value (right-continuous) and left limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub t: f64,
    pub v: f64,
    pub l: f64,
}

impl Knot {
    pub fn new(t: f64, v: f64, l: f64) -> Self {
        Self { t, v, l }
    }

    /// Continuous knot (no jump).
    pub fn flat(t: f64, v: f64) -> Self {
        Self { t, v, l: v }
    }
}

/// Right-continuous piecewise-linear function on `[0,1]` with left limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCadlag")]
pub struct CadlagFn {
    knots: Vec<Knot>,
}

#[derive(Deserialize)]
struct RawCadlag {
    knots: Vec<Knot>,
}

impl TryFrom<RawCadlag> for CadlagFn {
    type Error = CadlagError;

    fn try_from(raw: RawCadlag) -> Result<Self, Self::Error> {
        CadlagFn::new(raw.knots)
    }
}

/// Validated construction; adjacent exactly-collinear segments are merged
/// so equality testing works on a canonical form.
pub fn make_cadlag(knots: Vec<Knot>) -> Result<CadlagFn, CadlagError> {
    CadlagFn::new(knots)
}

impl CadlagFn {
    /// Validates and canonicalizes the knot list.
    pub fn new(knots: Vec<Knot>) -> Result<Self, CadlagError> {
        validate_knots(&knots)?;
        let f = Self { knots };
        Ok(f.canonical())
    }

    /// Construction for internal builders whose knots are valid and should
    /// be kept exactly as given (no collinear merging).
    pub(crate) fn from_knots_unchecked(knots: Vec<Knot>) -> Self {
        debug_assert!(validate_knots(&knots).is_ok());
        Self { knots }
    }

    /// Canonical form: interior knots that carry no jump and no slope
    /// change are removed.
    pub fn canonical(&self) -> Self {
        let k = &self.knots;
        if k.len() <= 2 {
            return self.clone();
        }
        let mut out: Vec<Knot> = Vec::with_capacity(k.len());
        out.push(k[0]);
        for i in 1..k.len() - 1 {
            let prev = *out.last().unwrap();
            let cur = k[i];
            let next = k[i + 1];
            if cur.v == cur.l && collinear(prev.t, prev.v, cur.t, cur.v, next.t, next.l) {
                continue;
            }
            out.push(cur);
        }
        out.push(*k.last().unwrap());
        Self { knots: out }
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn constant(v: f64) -> Self {
        Self::from_knots_unchecked(vec![Knot::flat(0.0, v), Knot::flat(1.0, v)])
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Step from `before` to `after` at time `t0` in `(0, 1]`.
    pub fn step(t0: f64, before: f64, after: f64) -> Result<Self, CadlagError> {
        if !(t0 > 0.0 && t0 <= 1.0) {
            return Err(CadlagError::OutOfDomain { t: t0 });
        }
        let knots = if t0 == 1.0 {
            vec![Knot::flat(0.0, before), Knot::new(1.0, after, before)]
        } else {
            vec![
                Knot::flat(0.0, before),
                Knot::new(t0, after, before),
                Knot::flat(1.0, after),
            ]
        };
        Ok(Self::from_knots_unchecked(knots))
    }

    /// Unit step: 0 before `t0`, 1 from `t0` on.
    pub fn unit_step(t0: f64) -> Result<Self, CadlagError> {
        Self::step(t0, 0.0, 1.0)
    }

    /// Continuous polygon through the given `(t, v)` points.
    pub fn from_polygon(points: &[(f64, f64)]) -> Result<Self, CadlagError> {
        let knots = points.iter().map(|&(t, v)| Knot::flat(t, v)).collect();
        Self::new(knots)
    }

    /// Right-continuous value at `t`.
    pub fn eval(&self, t: f64) -> Result<f64, CadlagError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(CadlagError::OutOfDomain { t });
        }
        Ok(self.value_at(t))
    }

    /// Left limit at `t` in `(0, 1]`.
    pub fn left_limit(&self, t: f64) -> Result<f64, CadlagError> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(CadlagError::OutOfDomain { t });
        }
        Ok(self.left_at(t))
    }

    pub(crate) fn value_at(&self, t: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&t));
        let i = self.segment_index(t);
        let a = self.knots[i];
        if t == a.t {
            return a.v;
        }
        let b = self.knots[i + 1];
        if t == b.t {
            return b.v;
        }
        lerp(a.t, a.v, b.t, b.l, t)
    }

    pub(crate) fn left_at(&self, t: f64) -> f64 {
        debug_assert!(t > 0.0 && t <= 1.0);
        match self.knots.binary_search_by(|k| k.t.partial_cmp(&t).unwrap()) {
            Ok(i) => self.knots[i].l,
            Err(i) => {
                // strictly inside segment (i-1, i): continuous there
                let a = self.knots[i - 1];
                let b = self.knots[i];
                lerp(a.t, a.v, b.t, b.l, t)
            }
        }
    }

    /// Index of the segment whose closed-left interval contains `t`.
    fn segment_index(&self, t: f64) -> usize {
        let n = self.knots.len();
        let i = self.knots.partition_point(|k| k.t <= t);
        i.clamp(1, n - 1) - 1
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.iter().map(|k| k.t)
    }

    /// All jump locations with signed sizes `v - l`.
    pub fn jump_sizes(&self) -> Vec<(f64, f64)> {
        self.knots
            .iter()
            .filter(|k| k.v != k.l)
            .map(|k| (k.t, k.v - k.l))
            .collect()
    }

    pub fn is_continuous(&self) -> bool {
        self.knots.iter().all(|k| k.v == k.l)
    }

    /// True when every segment is flat (piecewise-constant function).
    pub fn is_step(&self) -> bool {
        self.knots.windows(2).all(|w| w[1].l == w[0].v)
    }

    pub fn max_abs_jump(&self) -> f64 {
        self.knots
            .iter()
            .map(|k| (k.v - k.l).abs())
            .fold(0.0, f64::max)
    }

    /// Value at the right endpoint.
    pub fn terminal(&self) -> f64 {
        self.knots.last().unwrap().v
    }

    /// Exact supremum over `[0,1]` (attained at a knot value or left limit).
    pub fn sup(&self) -> f64 {
        self.knots
            .iter()
            .map(|k| k.v.max(k.l))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exact integral over `[0,1]`; jumps carry no mass.
    pub fn integral(&self) -> f64 {
        self.knots
            .windows(2)
            .map(|w| (w[1].t - w[0].t) * (w[0].v + w[1].l) * 0.5)
            .sum()
    }

    /// Pointwise shift by a constant.
    pub fn shifted(&self, dv: f64) -> Self {
        let knots = self
            .knots
            .iter()
            .map(|k| Knot::new(k.t, k.v + dv, k.l + dv))
            .collect();
        Self::from_knots_unchecked(knots)
    }
}

fn validate_knots(knots: &[Knot]) -> Result<(), CadlagError> {
    if knots.len() < 2 {
        return Err(CadlagError::DomainNotUnit {
            first: knots.first().map_or(f64::NAN, |k| k.t),
            last: knots.last().map_or(f64::NAN, |k| k.t),
        });
    }
    for (i, k) in knots.iter().enumerate() {
        if !(k.t.is_finite() && k.v.is_finite() && k.l.is_finite()) {
            return Err(CadlagError::NonFiniteKnot { index: i });
        }
    }
    let first = knots[0].t;
    let last = knots[knots.len() - 1].t;
    if first != 0.0 || last != 1.0 {
        return Err(CadlagError::DomainNotUnit { first, last });
    }
    for i in 1..knots.len() {
        if knots[i].t <= knots[i - 1].t {
            return Err(CadlagError::NonMonotoneKnots { index: i });
        }
    }
    // No left limit exists below t=0; the stored one must equal the value.
    let k0 = knots[0];
    let scale = k0.v.abs().max(1.0);
    if (k0.l - k0.v).abs() > CONSTRUCTION_TOL * scale {
        return Err(CadlagError::InconsistentLeftLimit {
            index: 0,
            l: k0.l,
            expected: k0.v,
        });
    }
    Ok(())
}

fn collinear(t0: f64, v0: f64, t1: f64, v1: f64, t2: f64, v2: f64) -> bool {
    let lhs = (v1 - v0) * (t2 - t1);
    let rhs = (v2 - v1) * (t1 - t0);
    let scale = lhs.abs().max(rhs.abs()).max(1e-300);
    (lhs - rhs).abs() <= 1e-12 * scale
}

fn lerp(t0: f64, v0: f64, t1: f64, v1: f64, t: f64) -> f64 {
    v0 + (v1 - v0) * ((t - t0) / (t1 - t0))
}

/// Exact `sup_{[0,1]} |f - g|`, evaluated on the merged breakpoint set
/// including left limits. The difference is linear between merged knots,
/// so the supremum is attained at a knot value or a left limit.
pub fn sup_norm_dist(f: &CadlagFn, g: &CadlagFn) -> f64 {
    let mut times: Vec<f64> = f.times().chain(g.times()).collect();
    times.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup();
    let mut d: f64 = 0.0;
    for &t in &times {
        d = d.max((f.value_at(t) - g.value_at(t)).abs());
        if t > 0.0 {
            d = d.max((f.left_at(t) - g.left_at(t)).abs());
        }
    }
    d
}

/// `f` composed with a time change: returns `t -> f(lambda(t))`.
///
/// Breakpoints are the time change's own knots merged with the preimages
/// of `f`'s breakpoints; jumps of `f` reappear at their preimages with the
/// same value/left-limit pair. The result is canonical.
pub fn compose_time_change(f: &CadlagFn, lambda: &TimeChange) -> CadlagFn {
    let mut times: Vec<f64> = lambda.times().collect();
    for k in f.knots() {
        let u = lambda.preimage(k.t);
        times.push(u);
    }
    times.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup();
    // Guard against preimage rounding drifting outside [0,1].
    times.retain(|&u| (0.0..=1.0).contains(&u));
    if times[0] != 0.0 {
        times.insert(0, 0.0);
    }
    if *times.last().unwrap() != 1.0 {
        times.push(1.0);
    }

    let mut knots = Vec::with_capacity(times.len());
    for (i, &u) in times.iter().enumerate() {
        let y = lambda.eval(u);
        let v = f.value_at(y);
        let l = if i == 0 { v } else { f.left_at(y) };
        knots.push(Knot::new(u, v, l));
    }
    CadlagFn::from_knots_unchecked(knots).canonical()
}

/// Integer-valued non-decreasing step path used to index a family,
/// together with the scale hints `c` (lower threshold of the limit) and
/// `f_n` (normalization).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexProcess {
    path: CadlagFn,
    c: f64,
    f_n: f64,
}

impl IndexProcess {
    /// Validates that the path is piecewise constant, non-decreasing and
    /// takes integer values at least 1.
    pub fn new(path: CadlagFn, c: f64, f_n: f64) -> Result<Self, CadlagError> {
        if !(c > 0.0) || !(f_n > 0.0) {
            return Err(CadlagError::InvalidIndexPath(format!(
                "hints must be positive: c={c}, f_n={f_n}"
            )));
        }
        let ks = path.knots();
        for w in ks.windows(2) {
            if w[1].l != w[0].v {
                return Err(CadlagError::InvalidIndexPath(format!(
                    "segment starting at t={} is not constant",
                    w[0].t
                )));
            }
        }
        let mut prev = f64::NEG_INFINITY;
        for k in ks {
            for val in [k.l, k.v] {
                if val < 1.0 || (val - val.round()).abs() > 1e-9 {
                    return Err(CadlagError::InvalidIndexPath(format!(
                        "value {val} at t={} is not a positive integer",
                        k.t
                    )));
                }
                if val < prev {
                    return Err(CadlagError::InvalidIndexPath(format!(
                        "path decreases at t={}",
                        k.t
                    )));
                }
                prev = val;
            }
        }
        Ok(Self { path, c, f_n })
    }

    /// Constant-in-t index (a plain random variable used as a process).
    pub fn constant(k: u32) -> Self {
        let path = CadlagFn::constant(k as f64);
        Self {
            path,
            c: 1.0,
            f_n: 1.0,
        }
    }

    pub fn with_hints(mut self, c: f64, f_n: f64) -> Self {
        self.c = c;
        self.f_n = f_n;
        self
    }

    pub fn path(&self) -> &CadlagFn {
        &self.path
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn f_n(&self) -> f64 {
        self.f_n
    }

    pub fn value_at(&self, t: f64) -> u32 {
        self.path.value_at(t).round() as u32
    }

    /// Maximal constancy intervals as `(start, end, index)`; the last
    /// interval is closed at 1.
    pub fn segments(&self) -> Vec<(f64, f64, u32)> {
        let ks = self.path.knots();
        let mut out: Vec<(f64, f64, u32)> = Vec::new();
        for (i, k) in ks.iter().enumerate() {
            let val = k.v.round() as u32;
            let end = if i + 1 < ks.len() { ks[i + 1].t } else { 1.0 };
            match out.last_mut() {
                Some(last) if last.2 == val => last.1 = end,
                _ => {
                    if k.t < end || i + 1 == ks.len() {
                        out.push((k.t, end, val));
                    }
                }
            }
        }
        // The terminal knot may introduce a zero-length segment; fold it
        // into a proper final entry when its value differs (jump at t=1).
        if let Some(&last_knot) = ks.last() {
            let val = last_knot.v.round() as u32;
            if out.last().map(|s| s.2) != Some(val) {
                out.push((1.0, 1.0, val));
            }
        }
        out
    }
}

/// A deterministic mapping from positive integer indices to càdlàg
/// functions, with an optional designated limit member.
#[derive(Clone)]
pub struct IndexedFamily {
    gen: Arc<dyn Fn(u32) -> Option<CadlagFn> + Send + Sync>,
    limit: Option<CadlagFn>,
}

impl std::fmt::Debug for IndexedFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IndexedFamily")
            .field("limit", &self.limit)
            .finish_non_exhaustive()
    }
}

impl IndexedFamily {
    pub fn from_fn<F>(gen: F) -> Self
    where
        F: Fn(u32) -> Option<CadlagFn> + Send + Sync + 'static,
    {
        Self {
            gen: Arc::new(gen),
            limit: None,
        }
    }

    pub fn with_limit(mut self, limit: CadlagFn) -> Self {
        self.limit = Some(limit);
        self
    }

    pub fn member(&self, k: u32) -> Result<CadlagFn, CadlagError> {
        (self.gen)(k).ok_or(CadlagError::IndexOutOfFamily { index: k })
    }

    pub fn limit(&self) -> Option<&CadlagFn> {
        self.limit.as_ref()
    }
}

/// Randomly indexed composition `z(t) = x_{mu(t)}(t)`.
///
/// Breakpoints are the union of `mu`'s jump times and, on each constancy
/// interval with value `k`, the interior knots of `x_k`. At a jump time
/// `s` of `mu` the value uses the new index (right continuity) while the
/// left limit comes from the previous index's member.
pub fn index_compose(family: &IndexedFamily, mu: &IndexProcess) -> Result<CadlagFn, CadlagError> {
    let segments = mu.segments();
    let mut knots: Vec<Knot> = Vec::new();
    let mut prev_member: Option<CadlagFn> = None;
    for (j, &(start, end, k)) in segments.iter().enumerate() {
        let xk = family.member(k)?;
        if start == 1.0 && j > 0 {
            // jump exactly at the right endpoint
            let l = prev_member.as_ref().unwrap().left_at(1.0);
            knots.push(Knot::new(1.0, xk.value_at(1.0), l));
            prev_member = Some(xk);
            continue;
        }
        let v = xk.value_at(start);
        let l = match (&prev_member, j) {
            (Some(prev), _) => prev.left_at(start),
            (None, _) => v,
        };
        knots.push(Knot::new(start, v, l));
        let last_seg = j + 1 == segments.len() || end == 1.0 && segments[j + 1].0 == 1.0;
        for kn in xk.knots() {
            if kn.t > start && kn.t < end {
                knots.push(*kn);
            }
        }
        if last_seg && end == 1.0 {
            let has_jump_at_one = j + 1 < segments.len();
            if !has_jump_at_one && knots.last().map(|k| k.t) != Some(1.0) {
                knots.push(Knot::new(1.0, xk.value_at(1.0), xk.left_at(1.0)));
            }
        }
        prev_member = Some(xk);
    }
    debug_assert!(knots.last().map(|k| k.t) == Some(1.0));
    Ok(CadlagFn::from_knots_unchecked(knots))
}

/// Alias mirroring the free-function set: jump locations with sizes.
pub fn jump_sizes(f: &CadlagFn) -> Vec<(f64, f64)> {
    f.jump_sizes()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_even_n1() -> CadlagFn {
        // 0 on [0, 1/4], then linear up to 1 at 1/2, then 1.
        CadlagFn::new(vec![
            Knot::flat(0.0, 0.0),
            Knot::flat(0.25, 0.0),
            Knot::flat(0.5, 1.0),
            Knot::flat(1.0, 1.0),
        ])
        .unwrap()
    }

    fn limit_step() -> CadlagFn {
        CadlagFn::unit_step(0.5).unwrap()
    }

    #[test]
    fn make_cadlag_zero_function() {
        let f = CadlagFn::new(vec![Knot::flat(0.0, 0.0), Knot::flat(1.0, 0.0)]).unwrap();
        assert_eq!(f.knots().len(), 2);
        assert_eq!(f.eval(0.3).unwrap(), 0.0);
    }

    #[test]
    fn make_cadlag_unit_step() {
        let f = CadlagFn::new(vec![
            Knot::flat(0.0, 0.0),
            Knot::new(0.5, 1.0, 0.0),
            Knot::flat(1.0, 1.0),
        ])
        .unwrap();
        assert_eq!(f, limit_step());
    }

    #[test]
    fn make_cadlag_rejects_missing_right_endpoint() {
        let err = CadlagFn::new(vec![Knot::flat(0.0, 0.0), Knot::flat(0.5, 1.0)]).unwrap_err();
        assert!(matches!(err, CadlagError::DomainNotUnit { .. }));
    }

    #[test]
    fn make_cadlag_rejects_non_monotone() {
        let err = CadlagFn::new(vec![
            Knot::flat(0.0, 0.0),
            Knot::flat(0.5, 1.0),
            Knot::flat(0.5, 2.0),
            Knot::flat(1.0, 1.0),
        ])
        .unwrap_err();
        assert!(matches!(err, CadlagError::NonMonotoneKnots { index: 2 }));
    }

    #[test]
    fn make_cadlag_rejects_bad_initial_left_limit() {
        let err = CadlagFn::new(vec![Knot::new(0.0, 0.0, 1.0), Knot::flat(1.0, 0.0)]).unwrap_err();
        assert!(matches!(err, CadlagError::InconsistentLeftLimit { index: 0, .. }));
    }

    #[test]
    fn eval_step_limit() {
        let x = limit_step();
        assert_eq!(x.eval(0.25).unwrap(), 0.0);
        assert_eq!(x.eval(0.5).unwrap(), 1.0);
        assert_eq!(x.eval(1.0).unwrap(), 1.0);
    }

    #[test]
    fn eval_is_right_continuous_at_knots() {
        let f = ramp_even_n1();
        for k in f.knots() {
            assert_eq!(f.eval(k.t).unwrap(), k.v);
        }
    }

    #[test]
    fn eval_inside_ramp_segment() {
        // ramp 4t - 1 on (1/4, 1/2]
        let f = ramp_even_n1();
        assert!((f.eval(0.375).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_out_of_domain() {
        let f = limit_step();
        assert!(matches!(f.eval(1.5), Err(CadlagError::OutOfDomain { .. })));
        assert!(matches!(f.eval(-0.1), Err(CadlagError::OutOfDomain { .. })));
    }

    #[test]
    fn left_limit_at_jump_and_continuity_points() {
        let x = limit_step();
        assert_eq!(x.left_limit(0.5).unwrap(), 0.0);
        let f = ramp_even_n1();
        assert_eq!(f.left_limit(0.3).unwrap(), f.eval(0.3).unwrap());
        let s = CadlagFn::unit_step(0.6).unwrap();
        assert_eq!(s.left_limit(0.6).unwrap(), 0.0);
        assert!(matches!(
            s.left_limit(0.0),
            Err(CadlagError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn sup_norm_identity_and_offset() {
        let f = ramp_even_n1();
        assert_eq!(sup_norm_dist(&f, &f), 0.0);
        let g = f.shifted(0.3);
        assert!((sup_norm_dist(&f, &g) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn sup_norm_ramp_vs_step_is_one() {
        // Deviation 1 just above 1/4 where the step's preimage is 0 but the
        // limit is... evaluated exactly on merged knots including left limits.
        let d = sup_norm_dist(&ramp_even_n1(), &limit_step());
        assert_eq!(d, 1.0);
    }

    #[test]
    fn compose_with_identity_is_canonical_f() {
        let f = ramp_even_n1();
        let id = TimeChange::identity();
        assert_eq!(compose_time_change(&f, &id), f.canonical());
    }

    #[test]
    fn compose_moves_step_to_preimage() {
        let s = CadlagFn::unit_step(0.6).unwrap();
        let lam = TimeChange::new(vec![(0.0, 0.0), (0.5, 0.6), (1.0, 1.0)]).unwrap();
        let composed = compose_time_change(&s, &lam);
        assert_eq!(composed, CadlagFn::unit_step(0.5).unwrap());
    }

    #[test]
    fn compose_example_ramp_with_example_time_change() {
        // lambda(0.5) = 1/4 lands at the foot of the ramp.
        let f = ramp_even_n1();
        let lam = TimeChange::new(vec![(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)]).unwrap();
        let composed = compose_time_change(&f, &lam);
        assert_eq!(composed.eval(0.5).unwrap(), 0.0);
    }

    #[test]
    fn jump_sizes_reports_signed_jumps() {
        assert!(ramp_even_n1().jump_sizes().is_empty());
        assert_eq!(limit_step().jump_sizes(), vec![(0.5, 1.0)]);
        let two = CadlagFn::new(vec![
            Knot::flat(0.0, 0.0),
            Knot::new(0.3, 0.4, 0.0),
            Knot::new(0.7, 0.2, 0.4),
            Knot::flat(1.0, 0.2),
        ])
        .unwrap();
        let jumps = two.jump_sizes();
        assert_eq!(jumps.len(), 2);
        assert!((jumps[0].1 - 0.4).abs() < 1e-15);
        assert!((jumps[1].1 + 0.2).abs() < 1e-15);
    }

    #[test]
    fn index_process_validation() {
        let ok = CadlagFn::new(vec![
            Knot::flat(0.0, 2.0),
            Knot::new(0.5, 5.0, 2.0),
            Knot::flat(1.0, 5.0),
        ])
        .unwrap();
        assert!(IndexProcess::new(ok, 0.5, 10.0).is_ok());

        let ramp = ramp_even_n1().shifted(1.0);
        assert!(IndexProcess::new(ramp, 0.5, 10.0).is_err());

        let zero_valued = CadlagFn::constant(0.0);
        assert!(IndexProcess::new(zero_valued, 0.5, 1.0).is_err());
    }

    #[test]
    fn index_compose_constant_index_is_exact_member() {
        let family = IndexedFamily::from_fn(|k| Some(CadlagFn::constant(k as f64)));
        let z = index_compose(&family, &IndexProcess::constant(3)).unwrap();
        assert_eq!(z, CadlagFn::constant(3.0));
    }

    #[test]
    fn index_compose_step_index() {
        let family = IndexedFamily::from_fn(|k| Some(CadlagFn::constant(k as f64)));
        let path = CadlagFn::new(vec![
            Knot::flat(0.0, 2.0),
            Knot::new(0.5, 5.0, 2.0),
            Knot::flat(1.0, 5.0),
        ])
        .unwrap();
        let mu = IndexProcess::new(path, 1.0, 1.0).unwrap();
        let z = index_compose(&family, &mu).unwrap();
        assert_eq!(z, CadlagFn::step(0.5, 2.0, 5.0).unwrap());
    }

    #[test]
    fn index_compose_member_knots_inside_interval() {
        // members: k-step polygons; index jumps at 0.5
        let family = IndexedFamily::from_fn(|k| {
            let pts: Vec<(f64, f64)> = (0..=k)
                .map(|i| (i as f64 / k as f64, (i as f64) / (k as f64)))
                .collect();
            Some(CadlagFn::from_polygon(&pts).unwrap())
        });
        let path = CadlagFn::new(vec![
            Knot::flat(0.0, 2.0),
            Knot::new(0.5, 4.0, 2.0),
            Knot::flat(1.0, 4.0),
        ])
        .unwrap();
        let mu = IndexProcess::new(path, 1.0, 1.0).unwrap();
        let z = index_compose(&family, &mu).unwrap();
        // both members are the identity function here, so z(t) = t
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            assert!((z.eval(t).unwrap() - t).abs() < 1e-15);
        }
    }

    #[test]
    fn index_compose_rejects_missing_member() {
        let family = IndexedFamily::from_fn(|k| {
            if k <= 2 {
                Some(CadlagFn::constant(k as f64))
            } else {
                None
            }
        });
        let err = index_compose(&family, &IndexProcess::constant(9)).unwrap_err();
        assert_eq!(err, CadlagError::IndexOutOfFamily { index: 9 });
    }

    #[test]
    fn serde_round_trip_applies_validation() {
        let f = ramp_even_n1();
        let json = serde_json::to_string(&f).unwrap();
        let back: CadlagFn = serde_json::from_str(&json).unwrap();
        assert_eq!(f, back);

        let bad = r#"{"knots":[{"t":0.0,"v":0.0,"l":0.0},{"t":0.5,"v":1.0,"l":1.0}]}"#;
        assert!(serde_json::from_str::<CadlagFn>(bad).is_err());
    }
}
