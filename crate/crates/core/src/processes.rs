//! Seeded samplers: increment sequences, partial-sum families, scaled
//! random-walk polygons, Wiener reference paths, and index processes.
//!
//! Everything is a pure function of `(spec, seed)`. Per-replicate streams
//! are derived from the root seed with a documented 64-bit mix (see
//! [`Seed`]), so replicate-level parallelism reproduces the sequential
//! results bit for bit. Gaussian draws go through an inverse-CDF rational
//! approximation rather than a platform RNG distribution, which keeps
//! outputs stable across toolchains.

use crate::cadlag::{CadlagError, CadlagFn, IndexProcess, IndexedFamily, Knot};
use crate::special::norm_ppf;
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("bad distribution: {0}")]
    BadDist(String),
    #[error(transparent)]
    Cadlag(#[from] CadlagError),
}

/// Increment law for partial sums and walk polygons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum IncrementKind {
    Rademacher,
    StandardNormal,
    /// Uniform on [-1, 1].
    CenteredUniform,
    /// `X_i = xi_i * base^{-i}` with `xi_i` Rademacher; the partial sums
    /// converge absolutely (for base 2 the limit law is Uniform[-1,1]).
    GeometricDecay { base: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncrementSpec {
    #[serde(flatten)]
    pub kind: IncrementKind,
    /// Scale used by the walk normalization `S_i / (sigma sqrt(n))`.
    pub sigma: f64,
}

impl IncrementSpec {
    pub fn rademacher() -> Self {
        Self {
            kind: IncrementKind::Rademacher,
            sigma: 1.0,
        }
    }

    pub fn standard_normal() -> Self {
        Self {
            kind: IncrementKind::StandardNormal,
            sigma: 1.0,
        }
    }

    pub fn centered_uniform() -> Self {
        Self {
            kind: IncrementKind::CenteredUniform,
            sigma: (1.0f64 / 3.0).sqrt(),
        }
    }

    pub fn geometric_decay(base: f64) -> Self {
        Self {
            kind: IncrementKind::GeometricDecay { base },
            sigma: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), SampleError> {
        if !(self.sigma > 0.0) {
            return Err(SampleError::BadParam(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if let IncrementKind::GeometricDecay { base } = self.kind {
            if !(base > 1.0) {
                return Err(SampleError::BadParam(format!(
                    "decay base must exceed 1, got {base}"
                )));
            }
        }
        Ok(())
    }

    /// Draws increment number `i` (1-based; the position matters only for
    /// the geometric-decay law).
    fn draw(&self, i: u32, rng: &mut ChaCha12Rng) -> f64 {
        match self.kind {
            IncrementKind::Rademacher => sign(rng),
            IncrementKind::StandardNormal => norm_ppf(u01_open(rng)),
            IncrementKind::CenteredUniform => 2.0 * u01(rng) - 1.0,
            IncrementKind::GeometricDecay { base } => sign(rng) * base.powi(-(i as i32)),
        }
    }
}

fn sign(rng: &mut ChaCha12Rng) -> f64 {
    if rng.next_u64() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Uniform on [0, 1) from the top 53 bits.
fn u01(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Uniform on the open interval (0, 1).
fn u01_open(rng: &mut ChaCha12Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

/// Root seed plus replicate index. The stream for a `(root, replicate,
/// tag)` triple is `ChaCha12` keyed by
/// `mix64(root ^ mix64(replicate * 0x9E3779B97F4A7C15 + tag))` where
/// `mix64` is the splitmix64 finalizer; the same triple always yields
/// the same stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seed {
    pub root: u64,
    pub replicate: u64,
}

/// Stream tags separating the independent randomness sources of one
/// replicate.
pub mod stream {
    pub const INCREMENTS: u64 = 1;
    pub const INDEX: u64 = 2;
    pub const WIENER: u64 = 3;
}

impl Seed {
    pub fn new(root: u64) -> Self {
        Self { root, replicate: 0 }
    }

    pub fn replicate(mut self, r: u64) -> Self {
        self.replicate = r;
        self
    }

    pub fn rng(&self, tag: u64) -> ChaCha12Rng {
        let inner = mix64(
            self.replicate
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(tag),
        );
        ChaCha12Rng::seed_from_u64(mix64(self.root ^ inner))
    }
}

/// splitmix64 finalizer
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `k` increment draws, deterministic in the seed.
pub fn sample_increments(spec: &IncrementSpec, k: u32, seed: Seed) -> Result<Vec<f64>, SampleError> {
    spec.validate()?;
    if k < 1 {
        return Err(SampleError::BadParam("increment count must be >= 1".into()));
    }
    let mut rng = seed.rng(stream::INCREMENTS);
    Ok((1..=k).map(|i| spec.draw(i, &mut rng)).collect())
}

/// Shared increment stream with lazily extended prefix sums; lets family
/// members for different indices reuse the same underlying draws.
struct IncrementCache {
    spec: IncrementSpec,
    state: Mutex<CacheState>,
}

struct CacheState {
    rng: ChaCha12Rng,
    increments: Vec<f64>,
    sums: Vec<f64>, // sums[i] = S_i, sums[0] = 0
}

impl IncrementCache {
    fn new(spec: IncrementSpec, seed: Seed) -> Self {
        Self {
            spec,
            state: Mutex::new(CacheState {
                rng: seed.rng(stream::INCREMENTS),
                increments: Vec::new(),
                sums: vec![0.0],
            }),
        }
    }

    fn extend_to(state: &mut CacheState, spec: &IncrementSpec, k: usize) {
        while state.increments.len() < k {
            let i = state.increments.len() as u32 + 1;
            let x = spec.draw(i, &mut state.rng);
            state.increments.push(x);
            let last = *state.sums.last().unwrap();
            state.sums.push(last + x);
        }
    }

    fn partial_sum(&self, k: usize) -> f64 {
        let mut st = self.state.lock().unwrap();
        Self::extend_to(&mut st, &self.spec, k);
        st.sums[k]
    }

    fn prefix(&self, k: usize) -> Vec<f64> {
        let mut st = self.state.lock().unwrap();
        Self::extend_to(&mut st, &self.spec, k);
        st.increments[..k].to_vec()
    }
}

const FAMILY_INDEX_CAP: u32 = 1 << 24;

/// Family of constant functions `Y_k = S_k` over one increment stream;
/// `Y_0` is the zero function.
pub fn partial_sum_family(spec: IncrementSpec, seed: Seed) -> Result<IndexedFamily, SampleError> {
    spec.validate()?;
    let cache = Arc::new(IncrementCache::new(spec, seed));
    Ok(IndexedFamily::from_fn(move |k| {
        if k > FAMILY_INDEX_CAP {
            return None;
        }
        Some(CadlagFn::constant(cache.partial_sum(k as usize)))
    }))
}

/// Scaled random-walk polygon: knots at `i/n`, values `S_i/(sigma sqrt n)`,
/// linear in between. The polygon keeps exactly `n + 1` knots.
pub fn donsker_polygon(spec: &IncrementSpec, n: u32, seed: Seed) -> Result<CadlagFn, SampleError> {
    let incr = sample_increments(spec, n, seed)?;
    donsker_polygon_from_increments(&incr, spec.sigma)
}

/// Same construction from explicit increments (useful for degenerate
/// walks in tests).
pub fn donsker_polygon_from_increments(
    increments: &[f64],
    sigma: f64,
) -> Result<CadlagFn, SampleError> {
    let n = increments.len();
    if n == 0 {
        return Err(SampleError::BadParam("need at least one increment".into()));
    }
    if !(sigma > 0.0) {
        return Err(SampleError::BadParam(format!("sigma must be positive: {sigma}")));
    }
    let scale = 1.0 / (sigma * (n as f64).sqrt());
    let mut knots = Vec::with_capacity(n + 1);
    knots.push(Knot::flat(0.0, 0.0));
    let mut s = 0.0;
    for (i, x) in increments.iter().enumerate() {
        s += x;
        knots.push(Knot::flat((i + 1) as f64 / n as f64, s * scale));
    }
    Ok(CadlagFn::from_knots_unchecked(knots))
}

/// Family `k -> k`-step walk polygon over one shared increment stream.
pub fn donsker_family(spec: IncrementSpec, seed: Seed) -> Result<IndexedFamily, SampleError> {
    spec.validate()?;
    let sigma = spec.sigma;
    let cache = Arc::new(IncrementCache::new(spec, seed));
    Ok(IndexedFamily::from_fn(move |k| {
        if k == 0 || k > FAMILY_INDEX_CAP {
            return None;
        }
        let incr = cache.prefix(k as usize);
        donsker_polygon_from_increments(&incr, sigma).ok()
    }))
}

/// Wiener reference path: polygon through exact Gaussian increments with
/// variance `1/m` per step.
pub fn sample_wiener(m: u32, seed: Seed) -> Result<CadlagFn, SampleError> {
    if m < 2 {
        return Err(SampleError::BadParam(format!("grid must be >= 2, got {m}")));
    }
    let mut rng = seed.rng(stream::WIENER);
    let sd = (1.0 / m as f64).sqrt();
    let mut knots = Vec::with_capacity(m as usize + 1);
    knots.push(Knot::flat(0.0, 0.0));
    let mut w = 0.0;
    for i in 1..=m {
        w += sd * norm_ppf(u01_open(&mut rng));
        knots.push(Knot::flat(i as f64 / m as f64, w));
    }
    Ok(CadlagFn::from_knots_unchecked(knots))
}

/// Counting-process index `t -> pi(n (t + a)) + 1` built from unit-rate
/// exponential interarrivals. The `+1` keeps values at or above 1 so the
/// index always points inside a family; the hints record `f_n = n` and
/// `c = a`.
pub fn poisson_index(n: u64, a: f64, seed: Seed) -> Result<IndexProcess, SampleError> {
    if n < 1 {
        return Err(SampleError::BadParam("scale n must be >= 1".into()));
    }
    if !(a > 0.0) {
        return Err(SampleError::BadParam(format!(
            "offset a must be positive (the limit must stay above a positive threshold), got {a}"
        )));
    }
    let nf = n as f64;
    let s_start = nf * a;
    let s_end = nf * (1.0 + a);
    let mut rng = seed.rng(stream::INDEX);

    let mut arrivals_before = 0u64;
    let mut jump_times: Vec<f64> = Vec::new();
    let mut t_cum = 0.0f64;
    loop {
        t_cum -= (1.0 - u01(&mut rng)).ln();
        if t_cum > s_end {
            break;
        }
        if t_cum <= s_start {
            arrivals_before += 1;
        } else {
            jump_times.push((t_cum - s_start) / nf);
        }
    }

    let mut knots: Vec<Knot> = Vec::new();
    let mut value = arrivals_before as f64 + 1.0;
    knots.push(Knot::flat(0.0, value));
    for &t in &jump_times {
        let t = t.min(1.0);
        value += 1.0;
        match knots.last_mut() {
            // interarrival rounding can collapse two jumps onto one time
            Some(k) if k.t == t => k.v = value,
            _ => {
                let prev = value - 1.0;
                knots.push(Knot::new(t, value, prev));
            }
        }
    }
    if knots.last().unwrap().t < 1.0 {
        knots.push(Knot::flat(1.0, value));
    }
    let path = CadlagFn::from_knots_unchecked(knots);
    Ok(IndexProcess::new(path, a, nf)?)
}

/// A random variable used as a constant-in-time index process.
pub fn const_index(dist: &[(u32, f64)], seed: Seed) -> Result<IndexProcess, SampleError> {
    if dist.is_empty() {
        return Err(SampleError::BadDist("empty support".into()));
    }
    let mut total = 0.0;
    for &(k, w) in dist {
        if k < 1 {
            return Err(SampleError::BadDist(format!("support value {k} below 1")));
        }
        if !(w > 0.0) {
            return Err(SampleError::BadDist(format!("weight {w} not positive")));
        }
        total += w;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(SampleError::BadDist(format!("weights sum to {total}, not 1")));
    }
    let mut rng = seed.rng(stream::INDEX);
    let u = u01(&mut rng) * total;
    let mut acc = 0.0;
    let mut drawn = dist[dist.len() - 1].0;
    for &(k, w) in dist {
        acc += w;
        if u < acc {
            drawn = k;
            break;
        }
    }
    Ok(IndexProcess::constant(drawn))
}
