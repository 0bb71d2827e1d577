//! Statistical verification machinery: empirical CDFs, Kolmogorov-Smirnov
//! distances against exact limit laws, convergence sweeps over the scale
//! parameter, and a deterministic checker for indexed-composition
//! convergence. Exact rational evaluation of the rate bound lives in
//! [`rate`].

pub mod rate;

use crate::cadlag::{index_compose, sup_norm_dist, CadlagError, CadlagFn, IndexProcess, IndexedFamily, Knot};
use crate::exec::{self, ExecMode};
use crate::processes::{
    const_index, donsker_family, partial_sum_family, poisson_index, IncrementSpec, SampleError,
    Seed,
};
use crate::special::norm_cdf;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitsError {
    #[error("empty sample")]
    Empty,
    #[error("reference CDF is not a valid distribution function")]
    BadCdf,
    #[error("family has no designated limit member")]
    MissingLimit,
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Cadlag(#[from] CadlagError),
}

/// Empirical CDF over a finite sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

/// Standard empirical CDF; rejects empty input.
pub fn ecdf(samples: &[f64]) -> Result<Ecdf, LimitsError> {
    if samples.is_empty() {
        return Err(LimitsError::Empty);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(Ecdf { sorted })
}

impl Ecdf {
    /// `P(X <= x)` under the empirical measure.
    pub fn eval(&self, x: f64) -> f64 {
        let count = self.sorted.partition_point(|&v| v <= x);
        count as f64 / self.sorted.len() as f64
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }
}

/// Two-sample KS statistic `sup_x |F_a - F_b|`, evaluated at all sample
/// points of both samples.
pub fn ks_two_sample(a: &Ecdf, b: &Ecdf) -> f64 {
    let mut d: f64 = 0.0;
    for x in a.values().iter().chain(b.values()) {
        d = d.max((a.eval(*x) - b.eval(*x)).abs());
    }
    d
}

/// One-sample KS statistic against a reference CDF. The reference values
/// are checked to be a non-decreasing map into `[0,1]` along the sample.
pub fn ks_vs_cdf<F: Fn(f64) -> f64>(samples: &Ecdf, cdf: F) -> Result<f64, LimitsError> {
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    let mut prev = -1.0;
    for (i, &x) in samples.values().iter().enumerate() {
        let c = cdf(x);
        if !(0.0..=1.0).contains(&c) || c < prev - 1e-12 {
            return Err(LimitsError::BadCdf);
        }
        prev = c;
        d = d.max(((i + 1) as f64 / n - c).abs());
        d = d.max((c - i as f64 / n).abs());
    }
    Ok(d)
}

/// Exact limit laws used by the sweeps.
pub fn std_normal_cdf(x: f64) -> f64 {
    norm_cdf(x)
}

/// CDF of `sup_{[0,1]} W` by the reflection principle.
pub fn sup_bm_cdf(a: f64) -> f64 {
    (2.0 * norm_cdf(a) - 1.0).max(0.0)
}

pub fn uniform_cdf(x: f64, lo: f64, hi: f64) -> f64 {
    ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
}

/// Real-valued reduction applied to a composed path (the
/// continuous-mapping surrogate for distributional convergence).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Functional {
    Terminal,
    EvalAt { t: f64 },
    Sup,
    Integral,
}

impl Functional {
    pub fn apply(&self, z: &CadlagFn) -> f64 {
        match *self {
            Functional::Terminal => z.terminal(),
            Functional::EvalAt { t } => z.value_at(t.clamp(0.0, 1.0)),
            Functional::Sup => z.sup(),
            Functional::Integral => z.integral(),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Functional::Terminal => "terminal".into(),
            Functional::EvalAt { t } => format!("eval-at-{t}"),
            Functional::Sup => "sup".into(),
            Functional::Integral => "integral".into(),
        }
    }
}

/// Which family of processes a sweep replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum FamilyKind {
    /// `k`-step scaled walk polygons over a shared increment stream.
    DonskerPolygons { increments: IncrementSpec },
    /// Constant functions carrying the partial sums themselves.
    PartialSumConstants { increments: IncrementSpec },
}

/// Index process plugged into the composition; `n` is the sweep scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum IndexKind {
    /// Deterministic index `k = n` (no random substitution).
    Fixed,
    /// Random variable uniform on `{n, ..., 2n}`; scaled limit is
    /// Uniform[1,2], threshold 1/2.
    UniformNto2n,
    /// Counting process `pi(n(t+a)) + 1`; scaled limit is `t + a`.
    Poisson { a: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ReferenceLaw {
    StdNormal,
    SupBrownian,
    Uniform { lo: f64, hi: f64 },
}

impl ReferenceLaw {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ReferenceLaw::StdNormal => std_normal_cdf(x),
            ReferenceLaw::SupBrownian => sup_bm_cdf(x),
            ReferenceLaw::Uniform { lo, hi } => uniform_cdf(x, lo, hi),
        }
    }
}

/// Complete description of one convergence experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepModel {
    pub family: FamilyKind,
    pub index: IndexKind,
    pub reference: ReferenceLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: u64,
    pub functional: String,
    pub ks: f64,
    pub stderr: f64,
    pub reps: u32,
}

/// One replicate of the composed process `Y_{nu_n}` for the given model.
pub fn sample_composition(
    model: &SweepModel,
    n: u64,
    seed: Seed,
) -> Result<CadlagFn, LimitsError> {
    let family = match model.family {
        FamilyKind::DonskerPolygons { increments } => donsker_family(increments, seed)?,
        FamilyKind::PartialSumConstants { increments } => partial_sum_family(increments, seed)?,
    };
    let index = match model.index {
        IndexKind::Fixed => {
            let k = u32::try_from(n)
                .map_err(|_| LimitsError::BadParam(format!("scale {n} too large")))?;
            IndexProcess::constant(k).with_hints(0.5, n as f64)
        }
        IndexKind::UniformNto2n => {
            let lo = u32::try_from(n)
                .map_err(|_| LimitsError::BadParam(format!("scale {n} too large")))?;
            let w = 1.0 / (n as f64 + 1.0);
            let dist: Vec<(u32, f64)> = (lo..=2 * lo).map(|k| (k, w)).collect();
            const_index(&dist, seed)?.with_hints(0.5, n as f64)
        }
        IndexKind::Poisson { a } => poisson_index(n, a, seed)?,
    };
    Ok(index_compose(&family, &index)?)
}

/// KS distance of the functional's empirical law to the reference, per
/// scale. Replicates run independently (parallel by default) and are
/// folded in replicate order. `stderr` is the worst-case binomial
/// standard error `0.5/sqrt(reps)` of a single CDF ordinate.
pub fn convergence_sweep(
    model: &SweepModel,
    ns: &[u64],
    functional: Functional,
    reps: u32,
    root_seed: u64,
    mode: ExecMode,
) -> Result<Vec<SweepRow>, LimitsError> {
    if reps < 100 {
        return Err(LimitsError::BadParam(format!(
            "need at least 100 replicates, got {reps}"
        )));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LimitsError::BadParam("scales must be increasing".into()));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let results = exec::map_indexed(mode, reps as usize, |r| {
            let seed = Seed::new(root_seed).replicate(r as u64);
            sample_composition(model, n, seed).map(|z| functional.apply(&z))
        });
        let mut samples = Vec::with_capacity(results.len());
        for res in results {
            samples.push(res?);
        }
        let e = ecdf(&samples)?;
        let ks = ks_vs_cdf(&e, |x| model.reference.cdf(x))?;
        rows.push(SweepRow {
            n,
            functional: functional.label(),
            ks,
            stderr: 0.5 / (reps as f64).sqrt(),
            reps,
        });
    }
    Ok(rows)
}

/// Deterministic check of `x_{mu_n} -> x` in the uniform norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    /// `sup |x_{mu_n} - x|` per provided index process, in input order.
    pub deviations: Vec<f64>,
    /// For each rung, the first position after which every deviation is
    /// at or below it.
    pub eventually_below: Vec<(f64, Option<usize>)>,
}

pub const LEMMA_RUNGS: [f64; 3] = [0.1, 0.01, 0.001];

pub fn lemma_check(
    family: &IndexedFamily,
    indices: &[IndexProcess],
) -> Result<LemmaReport, LimitsError> {
    let limit = family.limit().ok_or(LimitsError::MissingLimit)?;
    let mut deviations = Vec::with_capacity(indices.len());
    for mu in indices {
        let z = index_compose(family, mu)?;
        deviations.push(sup_norm_dist(&z, limit));
    }
    let eventually_below = LEMMA_RUNGS
        .iter()
        .map(|&rung| {
            let first = (0..deviations.len())
                .find(|&i| deviations[i..].iter().all(|&d| d <= rung));
            (rung, first)
        })
        .collect();
    Ok(LemmaReport {
        deviations,
        eventually_below,
    })
}

/// The constant-shift family `x_k = x + 1/k` over a base limit; the
/// composed deviation against the staircase index is exactly `1/n`.
pub fn shift_family(base: CadlagFn) -> IndexedFamily {
    let limit = base.clone();
    IndexedFamily::from_fn(move |k| {
        if k == 0 {
            return None;
        }
        Some(base.shifted(1.0 / k as f64))
    })
    .with_limit(limit)
}

/// Càdlàg staircase `t -> floor(n (t + 1))`: starts at `n`, steps up at
/// each `j/n` and reaches `2n` at the right endpoint.
pub fn staircase_index(n: u32) -> Result<IndexProcess, LimitsError> {
    if n < 1 {
        return Err(LimitsError::BadParam("n must be >= 1".into()));
    }
    let nf = n as f64;
    let mut knots = Vec::with_capacity(n as usize + 1);
    knots.push(Knot::flat(0.0, nf));
    for j in 1..n {
        let t = j as f64 / nf;
        knots.push(Knot::new(t, nf + j as f64, nf + j as f64 - 1.0));
    }
    knots.push(Knot::new(1.0, 2.0 * nf, 2.0 * nf - 1.0));
    let path = CadlagFn::from_knots_unchecked(knots);
    Ok(IndexProcess::new(path, 0.5, nf)?)
}
