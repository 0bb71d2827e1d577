//! Upper-bound optimizer for the metric.
//!
//! Candidate time changes are seeded by matching jump times of the two
//! inputs in order (all monotone partial matchings up to the knot budget)
//! and refined by coordinate descent on the knot coordinates. The best
//! candidate's exactly evaluated metric is the reported `upper`; the
//! certified `lower` comes from the half-jump bound. Running the search
//! in both orientations and keeping the minimum makes the result exactly
//! symmetric in its arguments.

use super::{distance_given, jump_lower_bound, DistanceResult, TimeChange};
use crate::cadlag::CadlagFn;
use crate::exec::{self, ExecMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceOpts {
    /// Maximum number of matched jump pairs per seed.
    pub knot_budget: usize,
    /// Number of seeds refined by coordinate descent.
    pub restarts: usize,
    /// Target accuracy of the refinement.
    pub tolerance: f64,
    pub exec: ExecMode,
}

impl Default for DistanceOpts {
    fn default() -> Self {
        Self {
            knot_budget: 8,
            restarts: 16,
            tolerance: 1e-3,
            exec: ExecMode::Parallel,
        }
    }
}

/// Certified bracket `[lower, upper]` for the metric with an explicit
/// witness. `upper >= lower` always; `budget_exhausted` flags a truncated
/// candidate enumeration (the result is still the best found so far).
pub fn distance(f: &CadlagFn, g: &CadlagFn, opts: &DistanceOpts) -> DistanceResult {
    let (fwd, fwd_exhausted) = directed_best(f, g, opts);
    let (bwd, bwd_exhausted) = directed_best(g, f, opts);

    let fwd_res = DistanceResult::from_witness(f, g, fwd);
    let bwd_res = DistanceResult::from_witness(f, g, bwd.inverse());
    let mut best = if bwd_res.upper < fwd_res.upper {
        bwd_res
    } else {
        fwd_res
    };
    best.budget_exhausted = fwd_exhausted || bwd_exhausted;
    best.lower = jump_lower_bound(f, g).min(best.upper);
    best
}

fn directed_best(f: &CadlagFn, g: &CadlagFn, opts: &DistanceOpts) -> (TimeChange, bool) {
    let (seeds, exhausted) = seed_candidates(f, g, opts);
    let objective = |lam: &TimeChange| {
        let (v, s) = distance_given(f, g, lam);
        v.max(s)
    };

    let mut scored: Vec<(f64, usize, TimeChange)> = seeds
        .into_iter()
        .enumerate()
        .map(|(i, lam)| (objective(&lam), i, lam))
        .collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    scored.truncate(opts.restarts.max(1));

    let refined = exec::map_indexed(opts.exec, scored.len(), |i| {
        let lam = descend(f, g, scored[i].2.clone(), opts.tolerance, &objective);
        (objective(&lam), lam)
    });

    let best = refined
        .into_iter()
        .enumerate()
        .min_by(|(ia, (va, _)), (ib, (vb, _))| va.partial_cmp(vb).unwrap().then(ia.cmp(ib)))
        .map(|(_, (_, lam))| lam)
        .unwrap_or_else(TimeChange::identity);
    (best, exhausted)
}

/// Identity plus every order-preserving partial matching of f-jumps to
/// g-jumps. Each matching becomes a time change with knots at all f-jump
/// times: matched ones pinned at their g targets, unmatched ones
/// interpolated so the descent can still move them.
fn seed_candidates(f: &CadlagFn, g: &CadlagFn, opts: &DistanceOpts) -> (Vec<TimeChange>, bool) {
    let jf: Vec<f64> = f.jump_sizes().into_iter().map(|(t, _)| t).collect();
    let jg: Vec<f64> = g.jump_sizes().into_iter().map(|(t, _)| t).collect();

    let mut matchings: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
    let cap = opts.restarts.max(1) * 64;
    let mut exhausted = false;
    enumerate_matchings(
        &jf,
        &jg,
        opts.knot_budget,
        &mut Vec::new(),
        &mut matchings,
        cap,
        &mut exhausted,
    );

    let mut seeds = Vec::with_capacity(matchings.len());
    for matched in &matchings {
        if let Some(lam) = matching_to_time_change(&jf, matched) {
            seeds.push(lam);
        }
    }
    (seeds, exhausted)
}

fn enumerate_matchings(
    jf: &[f64],
    jg: &[f64],
    budget: usize,
    current: &mut Vec<(f64, f64)>,
    out: &mut Vec<Vec<(f64, f64)>>,
    cap: usize,
    exhausted: &mut bool,
) {
    fn rec(
        jf: &[f64],
        jg: &[f64],
        fi: usize,
        gi: usize,
        budget: usize,
        current: &mut Vec<(f64, f64)>,
        out: &mut Vec<Vec<(f64, f64)>>,
        cap: usize,
        exhausted: &mut bool,
    ) {
        if out.len() >= cap {
            *exhausted = true;
            return;
        }
        for a in fi..jf.len() {
            for b in gi..jg.len() {
                if jf[a] <= 0.0 || jf[a] >= 1.0 || jg[b] <= 0.0 || jg[b] >= 1.0 {
                    continue;
                }
                current.push((jf[a], jg[b]));
                out.push(current.clone());
                if current.len() < budget {
                    rec(jf, jg, a + 1, b + 1, budget, current, out, cap, exhausted);
                }
                current.pop();
                if out.len() >= cap {
                    *exhausted = true;
                    return;
                }
            }
        }
    }
    rec(jf, jg, 0, 0, budget, current, out, cap, exhausted);
}

fn matching_to_time_change(jf: &[f64], matched: &[(f64, f64)]) -> Option<TimeChange> {
    let mut pins: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    pins.extend_from_slice(matched);
    pins.push((1.0, 1.0));
    // strict monotonicity of the matched images
    for w in pins.windows(2) {
        if w[1].0 <= w[0].0 || w[1].1 <= w[0].1 {
            return None;
        }
    }
    // interpolate unmatched jump times between their surrounding pins
    let mut points = pins.clone();
    for &u in jf {
        if u <= 0.0 || u >= 1.0 || matched.iter().any(|&(a, _)| a == u) {
            continue;
        }
        let i = pins.partition_point(|&(t, _)| t < u);
        if i == 0 || i == pins.len() {
            continue;
        }
        let (t0, y0) = pins[i - 1];
        let (t1, y1) = pins[i];
        if u <= t0 || u >= t1 {
            continue;
        }
        let y = y0 + (y1 - y0) * (u - t0) / (t1 - t0);
        points.push((u, y));
    }
    points.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup_by(|a, b| a.0 == b.0);
    TimeChange::new(points).ok()
}

/// Coordinate descent over knot coordinates. Each coordinate is scanned
/// on a bracket that includes the alignment-relevant special positions
/// (jump times on the t-axis, jump locations on the y-axis), then locally
/// refined by golden-section.
fn descend<F>(f: &CadlagFn, g: &CadlagFn, lam: TimeChange, tol: f64, objective: &F) -> TimeChange
where
    F: Fn(&TimeChange) -> f64,
{
    let special_t: Vec<f64> = f.jump_sizes().into_iter().map(|(t, _)| t).collect();
    let special_y: Vec<f64> = g.jump_sizes().into_iter().map(|(t, _)| t).collect();

    let mut current = lam;
    let mut value = objective(&current);
    for _ in 0..8 {
        let before = value;
        let n = current.knots().len();
        for j in 1..n.saturating_sub(1) {
            // y-coordinate
            let (res, v) = minimize_coord(&current, j, false, &special_y, objective);
            if v < value {
                current = res;
                value = v;
            }
            // t-coordinate
            let (res, v) = minimize_coord(&current, j, true, &special_t, objective);
            if v < value {
                current = res;
                value = v;
            }
        }
        if before - value < tol * 0.1 {
            break;
        }
    }
    current
}

fn minimize_coord<F>(
    lam: &TimeChange,
    j: usize,
    time_axis: bool,
    special: &[f64],
    objective: &F,
) -> (TimeChange, f64)
where
    F: Fn(&TimeChange) -> f64,
{
    let knots = lam.knots();
    let (lo, hi) = if time_axis {
        (knots[j - 1].t, knots[j + 1].t)
    } else {
        (knots[j - 1].y, knots[j + 1].y)
    };
    let gap = hi - lo;
    let margin = (gap * 1e-6).max(1e-12);
    let rebuild = |c: f64| -> Option<TimeChange> {
        let mut pts: Vec<(f64, f64)> = knots.iter().map(|k| (k.t, k.y)).collect();
        if time_axis {
            pts[j].0 = c;
        } else {
            pts[j].1 = c;
        }
        TimeChange::new(pts).ok()
    };

    let mut candidates: Vec<f64> = (0..=16)
        .map(|i| lo + gap * (i as f64 + 0.5) / 17.0)
        .collect();
    candidates.push(if time_axis { knots[j].t } else { knots[j].y });
    for &s in special {
        if s > lo + margin && s < hi - margin {
            candidates.push(s);
        }
    }

    let mut best_c = if time_axis { knots[j].t } else { knots[j].y };
    let mut best_v = objective(lam);
    for c in candidates {
        if let Some(cand) = rebuild(c) {
            let v = objective(&cand);
            if v < best_v {
                best_v = v;
                best_c = c;
            }
        }
    }

    // golden-section polish around the best scan point
    let phi = 0.618_033_988_749_894_9_f64;
    let radius = gap / 17.0;
    let mut a = (best_c - radius).max(lo + margin);
    let mut b = (best_c + radius).min(hi - margin);
    if a < b {
        let eval = |c: f64| rebuild(c).map(|l| objective(&l)).unwrap_or(f64::INFINITY);
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let mut f1 = eval(x1);
        let mut f2 = eval(x2);
        for _ in 0..40 {
            if b - a < 1e-10 {
                break;
            }
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = eval(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = eval(x2);
            }
        }
        let polished = 0.5 * (a + b);
        let v = eval(polished);
        if v < best_v {
            best_v = v;
            best_c = polished;
        }
    }

    match rebuild(best_c) {
        Some(res) => (res, best_v),
        None => (lam.clone(), objective(lam)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cadlag::{sup_norm_dist, Knot};
    use crate::skorokhod::distance_oracle;

    #[test]
    fn distance_of_function_to_itself_is_zero() {
        let f = CadlagFn::from_polygon(&[(0.0, 0.0), (0.3, 1.0), (1.0, -0.5)]).unwrap();
        let r = distance(&f, &f, &DistanceOpts::default());
        assert!(r.upper <= 1e-9);
        assert_eq!(r.lower, 0.0);
    }

    #[test]
    fn distance_matches_oracle_on_step_pair() {
        let f = CadlagFn::unit_step(0.5).unwrap();
        let g = CadlagFn::unit_step(0.6).unwrap();
        let r = distance(&f, &g, &DistanceOpts::default());
        let o = distance_oracle(&f, &g, 1000).unwrap();
        assert!((r.upper - o.upper).abs() <= 1e-3, "{} vs {}", r.upper, o.upper);
        assert!((r.upper - 1.25f64.ln()).abs() <= 1e-6);
    }

    #[test]
    fn distance_is_exactly_symmetric() {
        let f = CadlagFn::new(vec![
            Knot::flat(0.0, 0.2),
            Knot::new(0.3, 0.9, 0.2),
            Knot::flat(1.0, 0.9),
        ])
        .unwrap();
        let g = CadlagFn::new(vec![
            Knot::flat(0.0, 0.1),
            Knot::new(0.55, 1.0, 0.1),
            Knot::flat(1.0, 1.0),
        ])
        .unwrap();
        let opts = DistanceOpts::default();
        let d_fg = distance(&f, &g, &opts);
        let d_gf = distance(&g, &f, &opts);
        assert_eq!(d_fg.upper, d_gf.upper);
    }

    #[test]
    fn distance_dominated_by_sup_norm() {
        let f = CadlagFn::from_polygon(&[(0.0, 0.0), (0.4, 0.8), (1.0, 0.1)]).unwrap();
        let g = CadlagFn::from_polygon(&[(0.0, 0.1), (0.6, 0.5), (1.0, 0.4)]).unwrap();
        let r = distance(&f, &g, &DistanceOpts::default());
        assert!(r.upper <= sup_norm_dist(&f, &g) + 1e-12);
    }

    #[test]
    fn distance_ramp_vs_step_respects_half_jump_bound() {
        let ramp = CadlagFn::new(vec![
            Knot::flat(0.0, 0.0),
            Knot::flat(0.25, 0.0),
            Knot::flat(0.5, 1.0),
            Knot::flat(1.0, 1.0),
        ])
        .unwrap();
        let x = CadlagFn::unit_step(0.5).unwrap();
        let r = distance(&ramp, &x, &DistanceOpts::default());
        assert!(r.lower >= 0.5);
        assert!(r.upper >= 0.5);
    }
}
