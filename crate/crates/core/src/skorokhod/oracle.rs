//! Independent search route for the metric bracket.
//!
//! The oracle binary-searches the metric level `eps` and decides, for each
//! level, whether some time change keeps both the value deviation and the
//! log-slope penalty below it. Feasibility is decided by dynamic
//! programming over monotone alignments: the reference function is cut
//! into constancy strips, the candidate function induces per-strip
//! admissible bands `{y : |g(y) - a| <= eps}`, and reachable y-intervals
//! are propagated strip by strip under the slope cone
//! `y' - y in [e^-eps dt, e^+eps dt]`. Interval endpoints stay exact, so
//! alignments that must hit a jump exactly are representable.
//!
//! Piecewise-constant inputs are handled exactly. A non-constant
//! reference side is step-sampled on its knots merged with the uniform
//! `m`-grid before propagation; the returned `upper` is still sound
//! because the witness is re-evaluated exactly at the end.
//!
//! Witness tie-breaking is deterministic: among equal-level alignments
//! the backtracking picks the lexicographically smallest one.

use super::{DistanceResult, TimeChange};
use crate::cadlag::{sup_norm_dist, CadlagFn};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
}

const SLACK: f64 = 1e-12;
const BISECT_TOL: f64 = 1e-6;

type IUnion = Vec<(f64, f64)>;

#[derive(Debug, Clone)]
struct StripPlan {
    /// `(start, end, value)` covering `[0,1)` left to right.
    strips: Vec<(f64, f64, f64)>,
    /// Value at the right endpoint (a jump exactly at 1 lives here).
    terminal_value: f64,
}

/// Brute-force bracket for the metric via grid-restricted alignment
/// search. `upper` is realized by `witness`; `lower` is the analytic
/// half-jump certificate.
pub fn distance_oracle(f: &CadlagFn, g: &CadlagFn, m: usize) -> Result<DistanceResult, OracleError> {
    if m < 8 {
        return Err(OracleError::GridTooCoarse(format!(
            "grid size {m} below the minimum of 8"
        )));
    }
    for (name, h) in [("f", f), ("g", g)] {
        let jumps = h.jump_sizes();
        for w in jumps.windows(2) {
            if w[1].0 - w[0].0 < 2.0 / m as f64 {
                return Err(OracleError::GridTooCoarse(format!(
                    "{name} has jumps at {} and {} closer than 2/m",
                    w[0].0, w[1].0
                )));
            }
        }
    }

    let sup = sup_norm_dist(f, g);
    if sup <= 1e-12 {
        return Ok(DistanceResult::from_witness(f, g, TimeChange::identity()));
    }

    let lo = super::jump_lower_bound(f, g);
    let hi = sup + 1e-9;

    let mut candidates: Vec<TimeChange> = vec![TimeChange::identity()];
    if let Some(w) = directed_search(f, g, m, lo, hi) {
        candidates.push(w);
    }
    if let Some(w) = directed_search(g, f, m, lo, hi) {
        candidates.push(w.inverse());
    }

    let best = candidates
        .into_iter()
        .map(|w| DistanceResult::from_witness(f, g, w))
        .min_by(|a, b| a.upper.partial_cmp(&b.upper).unwrap())
        .unwrap();
    Ok(best)
}

/// Binary search over the level; returns the witness found at the lowest
/// feasible level, with `f` as the strip side.
fn directed_search(f: &CadlagFn, g: &CadlagFn, m: usize, lo0: f64, hi0: f64) -> Option<TimeChange> {
    let plan = make_strips(f, m);
    let mut lo = lo0.max(0.0);
    let mut hi = hi0.max(lo + 1e-9);
    let mut expand = 0;
    while feasibility(&plan, g, hi).is_none() {
        hi = hi * 2.0 + 0.05;
        expand += 1;
        if expand > 40 {
            return None;
        }
    }
    for _ in 0..80 {
        if hi - lo <= BISECT_TOL {
            break;
        }
        let mid = 0.5 * (hi + lo);
        if feasibility(&plan, g, mid).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    backtrack(&plan, g, hi)
}

fn make_strips(f: &CadlagFn, m: usize) -> StripPlan {
    let knots = f.knots();
    let mut cuts: Vec<f64> = knots.iter().map(|k| k.t).collect();
    if !f.is_step() {
        for i in 1..m {
            cuts.push(i as f64 / m as f64);
        }
        cuts.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
    }
    let mut strips: Vec<(f64, f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        let (start, end) = (w[0], w[1]);
        let value = f.value_at(start);
        match strips.last_mut() {
            Some(last) if last.2 == value => last.1 = end,
            _ => strips.push((start, end, value)),
        }
    }
    StripPlan {
        strips,
        terminal_value: f.value_at(1.0),
    }
}

/// Per-boundary reachable y-interval unions, or `None` when no alignment
/// stays within the level.
fn feasibility(plan: &StripPlan, g: &CadlagFn, eps: f64) -> Option<Vec<IUnion>> {
    let band = eps + SLACK;
    let g0 = g.knots()[0].v;
    if (plan.strips[0].2 - g0).abs() > band {
        return None;
    }
    let g1 = g.knots().last().unwrap().v;
    if (plan.terminal_value - g1).abs() > band {
        return None;
    }

    let alpha = (-eps).exp();
    let beta = eps.exp();
    let n = plan.strips.len();
    let mut reach: Vec<IUnion> = Vec::with_capacity(n + 1);
    let mut current: IUnion = vec![(0.0, 0.0)];
    reach.push(current.clone());

    for (i, &(start, end, value)) in plan.strips.iter().enumerate() {
        let comps = admissible_bands(g, value, band);
        let dt = end - start;
        let mut out: IUnion = Vec::new();
        for &(clo, chi) in &comps {
            for &(rlo, rhi) in &current {
                let elo = rlo.max(clo);
                let ehi = rhi.min(chi);
                if elo > ehi {
                    continue;
                }
                let xlo = elo + alpha * dt;
                let xhi = (ehi + beta * dt).min(chi);
                if xlo <= xhi + 1e-13 {
                    out.push((xlo.min(xhi), xhi));
                }
            }
        }
        let out = merge_union(out);
        if i + 1 == n {
            if !contains(&out, 1.0, 1e-9) {
                return None;
            }
            reach.push(vec![(1.0, 1.0)]);
            return Some(reach);
        }
        let next_value = plan.strips[i + 1].2;
        let boundary = intersect_unions(
            &admissible_bands(g, next_value, band),
            &admissible_bands(g, value, band),
        );
        current = intersect_unions(&out, &boundary);
        if current.is_empty() {
            return None;
        }
        reach.push(current.clone());
    }
    unreachable!("strip plan always has at least one strip");
}

/// Deterministic witness extraction at a feasible level: backward
/// co-reachability pass, then a forward pass picking the smallest
/// admissible image at each boundary.
fn backtrack(plan: &StripPlan, g: &CadlagFn, eps: f64) -> Option<TimeChange> {
    let reach = feasibility(plan, g, eps)?;
    let band = eps + SLACK;
    let alpha = (-eps).exp();
    let beta = eps.exp();
    let n = plan.strips.len();

    let mut co: Vec<IUnion> = vec![Vec::new(); n + 1];
    co[n] = vec![(1.0, 1.0)];
    for i in (0..n).rev() {
        let (start, end, value) = plan.strips[i];
        let dt = end - start;
        let comps = admissible_bands(g, value, band);
        let mut entries: IUnion = Vec::new();
        for &(clo, chi) in &comps {
            let clipped = intersect_unions(&co[i + 1], &[(f64::NEG_INFINITY, chi)]);
            for &(blo, bhi) in &clipped {
                let elo = (blo - beta * dt).max(clo);
                let ehi = (bhi - alpha * dt).min(chi);
                if elo <= ehi + 1e-13 {
                    entries.push((elo.min(ehi), ehi));
                }
            }
        }
        co[i] = intersect_unions(&merge_union(entries), &reach[i]);
        if co[i].is_empty() {
            return None;
        }
    }

    let mut y = 0.0f64;
    let mut points: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for (i, &(start, end, value)) in plan.strips.iter().enumerate() {
        let dt = end - start;
        let comps = admissible_bands(g, value, band);
        let mut best: Option<f64> = None;
        for &(clo, chi) in &comps {
            if y < clo - 1e-12 || y > chi + 1e-12 {
                continue;
            }
            let lo_t = y + alpha * dt;
            let hi_t = (y + beta * dt).min(chi);
            if lo_t > hi_t + 1e-13 {
                continue;
            }
            let window = intersect_unions(&co[i + 1], &[(lo_t, hi_t)]);
            if let Some(&(wlo, _)) = window.first() {
                best = Some(match best {
                    Some(b) => b.min(wlo),
                    None => wlo,
                });
            }
        }
        let next = best?;
        y = next;
        if i + 1 == n {
            points.push((1.0, 1.0));
        } else {
            points.push((end, y));
        }
    }
    TimeChange::new(points).ok()
}

/// Maximal y-intervals on which `|g - a|` stays within the band. Each
/// linear piece contributes a closed subinterval; touching subintervals
/// merge, which is exactly the condition that the junction can be swept
/// through (left limit and value both admissible).
fn admissible_bands(g: &CadlagFn, a: f64, band: f64) -> IUnion {
    let mut out: IUnion = Vec::new();
    let ks = g.knots();
    for w in ks.windows(2) {
        let (p, va) = (w[0].t, w[0].v);
        let (q, vb) = (w[1].t, w[1].l);
        let sub = if va == vb {
            if (va - a).abs() <= band {
                Some((p, q))
            } else {
                None
            }
        } else {
            let t_at = |val: f64| p + (q - p) * ((val - va) / (vb - va));
            let (t1, t2) = {
                let x = t_at(a - band);
                let y = t_at(a + band);
                if x <= y {
                    (x, y)
                } else {
                    (y, x)
                }
            };
            let lo = t1.max(p);
            let hi = t2.min(q);
            if lo <= hi {
                Some((lo, hi))
            } else {
                None
            }
        };
        if let Some(s) = sub {
            out.push(s);
        }
    }
    merge_union(out)
}

fn merge_union(mut v: IUnion) -> IUnion {
    if v.is_empty() {
        return v;
    }
    v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: IUnion = Vec::with_capacity(v.len());
    for (lo, hi) in v {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

fn intersect_unions(a: &[(f64, f64)], b: &[(f64, f64)]) -> IUnion {
    let mut out: IUnion = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo <= hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

fn contains(u: &[(f64, f64)], x: f64, tol: f64) -> bool {
    u.iter().any(|&(lo, hi)| lo - tol <= x && x <= hi + tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cadlag::Knot;
    use crate::skorokhod::jump_lower_bound;

    #[test]
    fn oracle_identical_inputs() {
        let f = CadlagFn::unit_step(0.5).unwrap();
        let r = distance_oracle(&f, &f, 1000).unwrap();
        assert_eq!(r.upper, 0.0);
    }

    #[test]
    fn oracle_step_pair_closed_form() {
        let f = CadlagFn::unit_step(0.5).unwrap();
        let g = CadlagFn::unit_step(0.6).unwrap();
        let r = distance_oracle(&f, &g, 1000).unwrap();
        assert!(
            (r.upper - 1.25f64.ln()).abs() <= 2e-3,
            "upper = {}, expected about {}",
            r.upper,
            1.25f64.ln()
        );
        assert!(r.value_part <= 1e-12);
    }

    #[test]
    fn oracle_lower_bound_against_continuous_approximant() {
        let x = CadlagFn::unit_step(0.5).unwrap();
        let polygon = CadlagFn::from_polygon(&[
            (0.0, 0.0),
            (0.45, 0.0),
            (0.55, 1.0),
            (1.0, 1.0),
        ])
        .unwrap();
        let r = distance_oracle(&polygon, &x, 1000).unwrap();
        assert!(r.lower >= 0.5);
        assert!(r.upper >= r.lower);
        assert_eq!(r.lower, jump_lower_bound(&polygon, &x));
    }

    #[test]
    fn oracle_rejects_coarse_grid() {
        let f = CadlagFn::new(vec![
            Knot::flat(0.0, 0.0),
            Knot::new(0.5, 1.0, 0.0),
            Knot::new(0.5005, 2.0, 1.0),
            Knot::flat(1.0, 2.0),
        ])
        .unwrap();
        let g = CadlagFn::unit_step(0.5).unwrap();
        assert!(matches!(
            distance_oracle(&f, &g, 1000),
            Err(OracleError::GridTooCoarse(_))
        ));
        assert!(matches!(
            distance_oracle(&g, &g, 4),
            Err(OracleError::GridTooCoarse(_))
        ));
    }

    #[test]
    fn oracle_two_jump_alignment() {
        // two unit jumps each; optimal alignment matches both
        let f = CadlagFn::new(vec![
            Knot::flat(0.0, 0.0),
            Knot::new(0.25, 1.0, 0.0),
            Knot::new(0.75, 2.0, 1.0),
            Knot::flat(1.0, 2.0),
        ])
        .unwrap();
        let g = CadlagFn::new(vec![
            Knot::flat(0.0, 0.0),
            Knot::new(0.3, 1.0, 0.0),
            Knot::new(0.7, 2.0, 1.0),
            Knot::flat(1.0, 2.0),
        ])
        .unwrap();
        let r = distance_oracle(&f, &g, 1000).unwrap();
        // best witness maps 0.25 -> 0.3 and 0.75 -> 0.7; the middle
        // segment's slope 0.8 dominates the outer 1.2 ones
        let expected = (0.8f64).ln().abs();
        assert!((r.upper - expected).abs() <= 2e-3, "upper = {}", r.upper);
    }
}
