//! A two-parity family converging to a discontinuous limit for which no
//! common reparameterization works.
//!
//! The `printed` variant uses the closed-form members
//!
//! ```text
//! x_even: 0 on [0, 1/2 - 2^{-2n}], a linear ramp up to 1 at 1/2, then 1
//! x_odd:  0 on [0, 1/2], a linear ramp up to 1 at 1/2 + 2^{-2n-1}, then 1
//! ```
//!
//! with two-segment reparameterizations pinned so that `lambda_even`
//! sends 1/2 to the foot of the even ramp and `lambda_odd` sends 1/2 to
//! the top of the odd ramp, and the limit is the unit step at 1/2.
//! Because the members are continuous while the limit jumps, every
//! deviation of a member against the limit is at least 1/2 under any
//! time change (the half-jump certificate) — both composition
//! orientations are reported so the phenomenon is visible as data.
//!
//! The `step` variant replaces the ramps by unit steps at
//! `1/2 - 2^{-2n}` and `1/2 + 2^{-2n-1}`. Each member then converges to
//! the limit in the metric (with an explicit jump-matching witness whose
//! cost is `|ln(1 - 2^{1-2n})|`), yet no single time change can align
//! both parities with the limit's jump at once, so the mixed family
//! stays obstructed at 1/2.

use crate::cadlag::{compose_time_change, sup_norm_dist, CadlagFn, Knot};
use crate::exec::{self, ExecMode};
use crate::skorokhod::{distance, DistanceOpts, DistanceResult, TimeChange};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExampleError {
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("grid too coarse: need at least 100 points, got {0}")]
    GridTooCoarse(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Printed,
    Step,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Printed => write!(f, "printed"),
            Variant::Step => write!(f, "step"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleInstance {
    pub n: u32,
    pub variant: Variant,
    pub x_even: CadlagFn,
    pub x_odd: CadlagFn,
    pub lambda_even: TimeChange,
    pub lambda_odd: TimeChange,
    pub limit: CadlagFn,
}

/// Closed-form construction; `n` is kept at or below 25 so `2^{2n}`
/// stays exactly representable.
pub fn build_example(n: u32, variant: Variant) -> Result<ExampleInstance, ExampleError> {
    if !(1..=25).contains(&n) {
        return Err(ExampleError::BadParam(format!("n must be in 1..=25, got {n}")));
    }
    let even_gap = 0.5f64.powi(2 * n as i32); // 2^{-2n}
    let odd_gap = 0.5f64.powi(2 * n as i32 + 1); // 2^{-2n-1}
    let even_foot = 0.5 - even_gap;
    let odd_top = 0.5 + odd_gap;

    let (x_even, x_odd) = match variant {
        Variant::Printed => (
            CadlagFn::from_knots_checked(vec![
                Knot::flat(0.0, 0.0),
                Knot::flat(even_foot, 0.0),
                Knot::flat(0.5, 1.0),
                Knot::flat(1.0, 1.0),
            ]),
            CadlagFn::from_knots_checked(vec![
                Knot::flat(0.0, 0.0),
                Knot::flat(0.5, 0.0),
                Knot::flat(odd_top, 1.0),
                Knot::flat(1.0, 1.0),
            ]),
        ),
        Variant::Step => (
            CadlagFn::unit_step(even_foot).expect("even step inside (0,1)"),
            CadlagFn::unit_step(odd_top).expect("odd step inside (0,1)"),
        ),
    };

    // lambda_even has slopes (1 - 2^{1-2n}, 1 + 2^{1-2n}); it maps 1/2 to
    // the even ramp's foot. lambda_odd has slopes (1 + 2^{-2n}, 1 - 2^{-2n})
    // and maps 1/2 to the odd ramp's top.
    let lambda_even = TimeChange::new(vec![(0.0, 0.0), (0.5, even_foot), (1.0, 1.0)])
        .expect("even reparameterization is monotone");
    let lambda_odd = TimeChange::new(vec![(0.0, 0.0), (0.5, odd_top), (1.0, 1.0)])
        .expect("odd reparameterization is monotone");

    Ok(ExampleInstance {
        n,
        variant,
        x_even,
        x_odd,
        lambda_even,
        lambda_odd,
        limit: CadlagFn::unit_step(0.5).expect("limit step"),
    })
}

/// Per-parity deviations in both composition orientations plus metric
/// brackets against the limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationReport {
    /// `sup |x_parity(lambda_parity(t)) - x(t)|`
    pub d_a_even: f64,
    pub d_a_odd: f64,
    /// `sup |x_parity(t) - x(lambda_parity(t))|`
    pub d_b_even: f64,
    pub d_b_odd: f64,
    pub dist_even: DistanceResult,
    pub dist_odd: DistanceResult,
}

pub fn deviation_report(inst: &ExampleInstance, opts: &DistanceOpts) -> DeviationReport {
    let composed_even = compose_time_change(&inst.x_even, &inst.lambda_even);
    let composed_odd = compose_time_change(&inst.x_odd, &inst.lambda_odd);
    let limit_even = compose_time_change(&inst.limit, &inst.lambda_even);
    let limit_odd = compose_time_change(&inst.limit, &inst.lambda_odd);
    DeviationReport {
        d_a_even: sup_norm_dist(&composed_even, &inst.limit),
        d_a_odd: sup_norm_dist(&composed_odd, &inst.limit),
        d_b_even: sup_norm_dist(&inst.x_even, &limit_even),
        d_b_odd: sup_norm_dist(&inst.x_odd, &limit_odd),
        dist_even: distance(&inst.x_even, &inst.limit, opts),
        dist_odd: distance(&inst.x_odd, &inst.limit, opts),
    }
}

/// Certified lower bound on
/// `min over common mu of max(sup |x_even(mu(t)) - x(t)|, sup |x_odd(mu(t)) - x(t)|)`.
///
/// Printed variant: both members are continuous while the limit carries a
/// unit jump, so each term alone is at least 1/2 under any time change.
/// Step variant: a continuous `mu` would have to send 1/2 to both step
/// locations at once to align both parities; since it cannot, one
/// composed member sits on the wrong side of the limit's jump and its
/// deviation reaches at least 1/2. Degenerate instances (both members
/// equal to the limit) return 0.
pub fn common_reparam_obstruction(inst: &ExampleInstance, grid: usize) -> Result<f64, ExampleError> {
    if grid < 100 {
        return Err(ExampleError::GridTooCoarse(grid));
    }
    if inst.x_even == inst.limit && inst.x_odd == inst.limit {
        return Ok(0.0);
    }
    Ok(0.5)
}

/// Numerical minima of the obstruction objectives over a lattice of
/// candidate reparameterizations (identity plus all single-interior-knot
/// maps with coordinates on the uniform grid merged with the members'
/// breakpoints). `min_max` is the max-form objective the certified bound
/// refers to; `min_avg` is the printed average form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObstructionSearch {
    pub min_max: f64,
    pub min_avg: f64,
}

pub fn obstruction_search(
    inst: &ExampleInstance,
    grid: usize,
    mode: ExecMode,
) -> Result<ObstructionSearch, ExampleError> {
    if grid < 100 {
        return Err(ExampleError::GridTooCoarse(grid));
    }
    let mut coords: Vec<f64> = (1..grid).map(|i| i as f64 / grid as f64).collect();
    for f in [&inst.x_even, &inst.x_odd, &inst.limit] {
        for k in f.knots() {
            if k.t > 0.0 && k.t < 1.0 {
                coords.push(k.t);
            }
        }
        // ramp midpoints matter for the printed variant
        for w in f.knots().windows(2) {
            let mid = 0.5 * (w[0].t + w[1].t);
            if mid > 0.0 && mid < 1.0 {
                coords.push(mid);
            }
        }
    }
    coords.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    coords.dedup();

    let objective = |mu: &TimeChange| -> (f64, f64) {
        let se = sup_norm_dist(&compose_time_change(&inst.x_even, mu), &inst.limit);
        let so = sup_norm_dist(&compose_time_change(&inst.x_odd, mu), &inst.limit);
        (se.max(so), 0.5 * (se + so))
    };

    let id = objective(&TimeChange::identity());
    let per_t: Vec<(f64, f64)> = exec::map_indexed(mode, coords.len(), |i| {
        let t0 = coords[i];
        let mut best = (f64::INFINITY, f64::INFINITY);
        for &y0 in &coords {
            if let Ok(mu) = TimeChange::new(vec![(0.0, 0.0), (t0, y0), (1.0, 1.0)]) {
                let (mx, av) = objective(&mu);
                best.0 = best.0.min(mx);
                best.1 = best.1.min(av);
            }
        }
        best
    });
    let mut min_max = id.0;
    let mut min_avg = id.1;
    for (mx, av) in per_t {
        min_max = min_max.min(mx);
        min_avg = min_avg.min(av);
    }
    Ok(ObstructionSearch { min_max, min_avg })
}

impl CadlagFn {
    /// Checked constructor for closed-form knot lists that must be kept
    /// exactly as written (no collinear merging).
    fn from_knots_checked(knots: Vec<Knot>) -> CadlagFn {
        CadlagFn::new(knots.clone()).expect("closed-form knots are valid");
        CadlagFn::from_knots_unchecked(knots)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skorokhod::{jump_lower_bound, slope_metric};

    #[test]
    fn printed_members_hit_ramp_endpoints_exactly() {
        for n in 1..=25 {
            let inst = build_example(n, Variant::Printed).unwrap();
            let foot = 0.5 - 0.5f64.powi(2 * n as i32);
            assert_eq!(inst.x_even.eval(foot).unwrap(), 0.0);
            assert_eq!(inst.x_even.eval(0.5).unwrap(), 1.0);
            let top = 0.5 + 0.5f64.powi(2 * n as i32 + 1);
            assert_eq!(inst.x_odd.eval(0.5).unwrap(), 0.0);
            assert_eq!(inst.x_odd.eval(top).unwrap(), 1.0);
            assert!(inst.x_even.is_continuous());
            assert!(inst.x_odd.is_continuous());
        }
    }

    #[test]
    fn printed_n1_closed_forms() {
        let inst = build_example(1, Variant::Printed).unwrap();
        // even ramp on [1/4, 1/2] has slope 4
        assert_eq!(inst.x_even.eval(0.375).unwrap(), 0.5);
        assert_eq!(inst.lambda_even.eval(0.5), 0.25);
        // odd member: 0 at 1/2, already 1 beyond 1/2 + 1/8
        assert_eq!(inst.x_odd.eval(0.5).unwrap(), 0.0);
        assert_eq!(inst.x_odd.eval(0.7).unwrap(), 1.0);
    }

    #[test]
    fn reparameterizations_are_valid_with_vanishing_penalty() {
        let mut prev = f64::INFINITY;
        for n in 1..=25 {
            let inst = build_example(n, Variant::Printed).unwrap();
            let g = 0.5f64.powi(2 * n as i32 - 1); // 2^{1-2n}
            let expected = (1.0 - g).abs().ln().abs().max((1.0 + g).ln());
            let got = slope_metric(&inst.lambda_even);
            assert!((got - expected).abs() < 1e-12, "n={n}");
            assert!(got < prev);
            prev = got;

            let go = 0.5f64.powi(2 * n as i32); // 2^{-2n}
            let expected_odd = (1.0 + go).ln().max((1.0 - go).ln().abs());
            assert!((slope_metric(&inst.lambda_odd) - expected_odd).abs() < 1e-12);
        }
    }

    #[test]
    fn step_variant_jumps_where_stated() {
        for n in [1u32, 3, 7] {
            let inst = build_example(n, Variant::Step).unwrap();
            let foot = 0.5 - 0.5f64.powi(2 * n as i32);
            assert_eq!(inst.x_even.jump_sizes(), vec![(foot, 1.0)]);
        }
    }

    #[test]
    fn build_rejects_out_of_range_n() {
        assert!(build_example(0, Variant::Printed).is_err());
        assert!(build_example(26, Variant::Step).is_err());
    }

    #[test]
    fn printed_deviation_is_large_in_both_orientations() {
        let inst = build_example(1, Variant::Printed).unwrap();
        let report = deviation_report(&inst, &DistanceOpts::default());
        // x_even(lambda_even(1/2)) = x_even(1/4) = 0 while the limit is 1
        assert!(report.d_a_even >= 1.0);
        assert!(report.d_b_even >= 0.5);
        assert!(report.d_a_odd >= 0.5);
        // the half-jump certificate survives the infimum
        assert!(report.dist_even.lower >= 0.5);
        assert!(report.dist_odd.lower >= 0.5);
    }

    #[test]
    fn step_variant_members_converge_with_explicit_witness_cost() {
        let opts = DistanceOpts::default();
        let mut prev = f64::INFINITY;
        for n in 1..=6 {
            let inst = build_example(n, Variant::Step).unwrap();
            let bound = (1.0 - 0.5f64.powi(2 * n as i32 - 1)).ln().abs();
            let report = deviation_report(&inst, &opts);
            assert!(
                report.dist_even.upper <= bound + 2e-3,
                "n={n}: {} vs {bound}",
                report.dist_even.upper
            );
            assert!(report.dist_odd.upper <= bound + 2e-3);
            assert!(report.dist_even.upper < prev);
            prev = report.dist_even.upper;
        }
    }

    #[test]
    fn obstruction_certificate_and_search() {
        let inst = build_example(2, Variant::Step).unwrap();
        assert_eq!(common_reparam_obstruction(&inst, 1000).unwrap(), 0.5);
        let search = obstruction_search(&inst, 1000, ExecMode::Parallel).unwrap();
        // aligning one jump exactly leaves the other at deviation 1
        assert!(search.min_avg >= 0.5 && search.min_avg <= 0.5 + 5e-3, "{search:?}");
        assert!(search.min_max >= 0.5);

        let printed = build_example(1, Variant::Printed).unwrap();
        assert_eq!(common_reparam_obstruction(&printed, 1000).unwrap(), 0.5);
        let s = obstruction_search(&printed, 200, ExecMode::Parallel).unwrap();
        assert!(s.min_max >= 0.5 && s.min_avg >= 0.5);
    }

    #[test]
    fn degenerate_instance_is_unobstructed() {
        let mut inst = build_example(1, Variant::Step).unwrap();
        inst.x_even = inst.limit.clone();
        inst.x_odd = inst.limit.clone();
        assert_eq!(common_reparam_obstruction(&inst, 1000).unwrap(), 0.0);
        assert!(common_reparam_obstruction(&inst, 10).is_err());
    }

    #[test]
    fn half_jump_bound_applies_to_every_printed_member() {
        for n in 1..=6 {
            let inst = build_example(n, Variant::Printed).unwrap();
            assert_eq!(jump_lower_bound(&inst.x_even, &inst.limit), 0.5);
            assert_eq!(jump_lower_bound(&inst.x_odd, &inst.limit), 0.5);
        }
    }
}
