//! Exact rational evaluation of the convergence-rate bound for randomly
//! indexed sequences.
//!
//! For a finite family of laws `F_1..F_K` with limit `F`, an index law
//! `p_n` on `{1..K}` with normalization `f(n)`, a scaled limit index law
//! `nu` bounded below by `c > 0`, the report compares
//!
//! ```text
//! lhs  = sup_x | sum_k p_n(k) F_k(x)  -  F(x) |
//! rhs  = sup_x sup_{k >= floor(c f(n))} |F_k(x) - F(x)|
//!        + 2 sup_x sup_k |F_k(x) - F(x)| * inf_x |F_{nu_n/f(n)}(x) - F_nu(x)|
//! ```
//!
//! in exact big-rational arithmetic. CDFs are strict (`P{X < x}`), and
//! all sups/infs run over the union of atoms, midpoints between
//! consecutive atoms, and one point on each side of the support — which
//! is exhaustive for finite laws. With the flanking points included the
//! inf factor vanishes whenever both scaled-index CDFs agree at an
//! extreme, so a sup variant of the second term is reported alongside as
//! a diagnostic.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use thiserror::Error;

pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("model is not a finite exact model: {0}")]
    NotFinite(String),
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),
}

/// Finite real law in exact arithmetic; atoms sorted, probabilities
/// positive and summing to one exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDist {
    atoms: Vec<(Rat, Rat)>,
}

impl FiniteDist {
    pub fn new(mut atoms: Vec<(Rat, Rat)>) -> Result<Self, RateError> {
        if atoms.is_empty() {
            return Err(RateError::NotFinite("distribution with empty support".into()));
        }
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Rat, Rat)> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            if p.is_negative() {
                return Err(RateError::NotFinite(format!("negative weight at {v}")));
            }
            if p.is_zero() {
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        if merged.is_empty() {
            return Err(RateError::NotFinite("distribution with empty support".into()));
        }
        let total: Rat = merged.iter().map(|(_, p)| p.clone()).sum();
        if !total.is_one() {
            return Err(RateError::NotFinite(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { atoms: merged })
    }

    pub fn point_mass(v: Rat) -> Self {
        Self {
            atoms: vec![(v, Rat::one())],
        }
    }

    pub fn atoms(&self) -> &[(Rat, Rat)] {
        &self.atoms
    }

    /// Strict CDF `P{X < x}`.
    pub fn cdf_strict(&self, x: &Rat) -> Rat {
        self.atoms
            .iter()
            .take_while(|(v, _)| v < x)
            .map(|(_, p)| p.clone())
            .sum()
    }

    pub fn min_atom(&self) -> &Rat {
        &self.atoms[0].0
    }

    /// Rescale every atom value by `1/f`.
    fn scaled(&self, f: &Rat) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|(v, p)| (v / f, p.clone()))
                .collect(),
        }
    }
}

/// Evaluation grid for sups/infs over finitely many laws: every atom,
/// every midpoint between consecutive atoms, and one flanking point on
/// each side.
fn evaluation_points(dists: &[&FiniteDist]) -> Vec<Rat> {
    let mut xs: Vec<Rat> = dists
        .iter()
        .flat_map(|d| d.atoms.iter().map(|(v, _)| v.clone()))
        .collect();
    xs.sort();
    xs.dedup();
    let mut out = Vec::with_capacity(2 * xs.len() + 2);
    out.push(xs[0].clone() - Rat::one());
    for i in 0..xs.len() {
        out.push(xs[i].clone());
        if i + 1 < xs.len() {
            out.push((xs[i].clone() + xs[i + 1].clone()) / rat(2, 1));
        }
    }
    out.push(xs[xs.len() - 1].clone() + Rat::one());
    out
}

/// Finite model resolved at one scale `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateModel {
    pub family: Vec<FiniteDist>,
    pub limit: FiniteDist,
    /// Index law on `{1..K}` (atom values are the integers `k`).
    pub index: FiniteDist,
    /// Scaled-limit index law; must be supported above `c`.
    pub nu: FiniteDist,
    pub f_n: Rat,
    pub c: Rat,
    pub n: u32,
}

impl RateModel {
    pub fn validate(&self) -> Result<(), RateError> {
        if self.family.is_empty() {
            return Err(RateError::NotFinite("empty family".into()));
        }
        if !self.c.is_positive() || !self.f_n.is_positive() {
            return Err(RateError::HypothesisViolation(format!(
                "c and f(n) must be positive: c={}, f(n)={}",
                self.c, self.f_n
            )));
        }
        let k_max = BigInt::from(self.family.len());
        for (v, _) in self.index.atoms() {
            if !v.is_integer() {
                return Err(RateError::NotFinite(format!("index atom {v} not an integer")));
            }
            let k = v.to_integer();
            if k < BigInt::one() || k > k_max {
                return Err(RateError::NotFinite(format!(
                    "index atom {k} outside 1..={k_max}"
                )));
            }
        }
        for (v, _) in self.nu.atoms() {
            if v <= &self.c {
                return Err(RateError::HypothesisViolation(format!(
                    "scaled limit index has an atom {v} not above c={}",
                    self.c
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateBoundReport {
    pub n: u32,
    pub lhs: Rat,
    pub term1: Rat,
    pub term2_printed: Rat,
    pub term2_sup_variant: Rat,
    pub rhs_printed: Rat,
    pub holds: bool,
    /// First index included in the tail sup, `max(1, floor(c f(n)))`.
    pub k_min: u32,
}

/// Serialization-friendly mirror with decimal approximations.
#[derive(Debug, Clone, Serialize)]
pub struct RateBoundRow {
    pub n: u32,
    pub k_min: u32,
    pub lhs: String,
    pub term1: String,
    pub term2_printed: String,
    pub term2_sup_variant: String,
    pub rhs_printed: String,
    pub lhs_f64: f64,
    pub rhs_f64: f64,
    pub holds: bool,
}

impl RateBoundReport {
    pub fn to_row(&self) -> RateBoundRow {
        RateBoundRow {
            n: self.n,
            k_min: self.k_min,
            lhs: self.lhs.to_string(),
            term1: self.term1.to_string(),
            term2_printed: self.term2_printed.to_string(),
            term2_sup_variant: self.term2_sup_variant.to_string(),
            rhs_printed: self.rhs_printed.to_string(),
            lhs_f64: self.lhs.to_f64().unwrap_or(f64::NAN),
            rhs_f64: self.rhs_printed.to_f64().unwrap_or(f64::NAN),
            holds: self.holds,
        }
    }
}

/// Exact evaluation of both sides of the bound.
pub fn rate_bound_exact(model: &RateModel) -> Result<RateBoundReport, RateError> {
    model.validate()?;
    let k_count = model.family.len();

    let mut value_dists: Vec<&FiniteDist> = model.family.iter().collect();
    value_dists.push(&model.limit);
    let xs = evaluation_points(&value_dists);

    // mixture by total probability over the index law
    let index_probs: Vec<(usize, Rat)> = model
        .index
        .atoms()
        .iter()
        .map(|(v, p)| (v.to_integer().to_usize().unwrap(), p.clone()))
        .collect();

    let mut lhs = Rat::zero();
    for x in &xs {
        let fx = model.limit.cdf_strict(x);
        let mut mix = Rat::zero();
        for (k, p) in &index_probs {
            mix += p * model.family[k - 1].cdf_strict(x);
        }
        let d = (mix - &fx).abs();
        if d > lhs {
            lhs = d;
        }
    }

    let kf = (&model.c * &model.f_n).floor().to_integer();
    let k_min = if kf < BigInt::one() {
        1usize
    } else {
        kf.to_usize().unwrap_or(usize::MAX)
    };

    let mut term1 = Rat::zero();
    let mut sup_all = Rat::zero();
    for x in &xs {
        let fx = model.limit.cdf_strict(x);
        for (ki, fk) in model.family.iter().enumerate() {
            let d = (fk.cdf_strict(x) - &fx).abs();
            if d > sup_all {
                sup_all = d.clone();
            }
            if ki + 1 >= k_min && d > term1 {
                term1 = d;
            }
        }
    }
    let _ = k_count;

    let scaled = model.index.scaled(&model.f_n);
    let idx_xs = evaluation_points(&[&scaled, &model.nu]);
    let mut inf_term: Option<Rat> = None;
    let mut sup_term = Rat::zero();
    for x in &idx_xs {
        let d = (scaled.cdf_strict(x) - model.nu.cdf_strict(x)).abs();
        if d > sup_term {
            sup_term = d.clone();
        }
        inf_term = Some(match inf_term {
            Some(cur) if cur <= d => cur,
            _ => d,
        });
    }
    let inf_term = inf_term.unwrap_or_else(Rat::zero);

    let two = rat(2, 1);
    let term2_printed = &two * &sup_all * &inf_term;
    let term2_sup_variant = &two * &sup_all * &sup_term;
    let rhs_printed = &term1 + &term2_printed;
    let holds = lhs <= rhs_printed;

    Ok(RateBoundReport {
        n: model.n,
        lhs,
        term1,
        term2_printed,
        term2_sup_variant,
        rhs_printed,
        holds,
        k_min: k_min.min(u32::MAX as usize) as u32,
    })
}

/// The mixture law computed by enumerating the joint (index, value)
/// atoms under independence. Equals the total-probability mixture used
/// for `lhs` exactly.
pub fn lhs_via_joint(model: &RateModel) -> Result<Rat, RateError> {
    model.validate()?;
    let mut joint: Vec<(Rat, Rat)> = Vec::new();
    for (kv, kp) in model.index.atoms() {
        let k = kv.to_integer().to_usize().unwrap();
        for (v, p) in model.family[k - 1].atoms() {
            joint.push((v.clone(), kp * p));
        }
    }
    let joint = FiniteDist::new(joint)?;
    let mut dists: Vec<&FiniteDist> = vec![&joint, &model.limit];
    dists.extend(model.family.iter());
    let xs = evaluation_points(&dists);
    let mut lhs = Rat::zero();
    for x in &xs {
        let d = (joint.cdf_strict(x) - model.limit.cdf_strict(x)).abs();
        if d > lhs {
            lhs = d;
        }
    }
    Ok(lhs)
}

/// The worked finite model: `Y_k` puts mass `1/2 + 2^{-k}` at 0 and the
/// rest at 1, the limit is fair on {0,1}, the index is uniform on
/// `{n, n+1}` with `f(n) = n`, the scaled limit index is the point mass
/// at 1 and `c = 1/2`.
pub fn toy_model(n: u32) -> RateModel {
    let k_top = n as usize + 1;
    let half = rat(1, 2);
    let family: Vec<FiniteDist> = (1..=k_top)
        .map(|k| {
            let bump = BigRational::new(BigInt::one(), BigInt::one() << k);
            let p0 = &half + &bump;
            let p1 = Rat::one() - &p0;
            FiniteDist::new(vec![(rat(0, 1), p0), (rat(1, 1), p1)]).unwrap()
        })
        .collect();
    let limit = FiniteDist::new(vec![(rat(0, 1), half.clone()), (rat(1, 1), half.clone())]).unwrap();
    let index = FiniteDist::new(vec![
        (rat(n as i64, 1), half.clone()),
        (rat(n as i64 + 1, 1), half),
    ])
    .unwrap();
    RateModel {
        family,
        limit,
        index,
        nu: FiniteDist::point_mass(rat(1, 1)),
        f_n: rat(n as i64, 1),
        c: rat(1, 2),
        n,
    }
}

/// Random finite model satisfying the hypotheses. The index law is kept
/// supported at or above `floor(c f(n))` — the regime the bound
/// addresses (an index with mass far below the threshold admits
/// counterexamples because the printed second term vanishes on finite
/// models). Half of the draws instead quantize the scaled limit index,
/// which matches the threshold condition automatically.
pub fn random_hypothesis_model(seed: u64) -> RateModel {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut pick = |lo: u64, hi: u64| lo + rng.next_u64() % (hi - lo + 1);

    let k_count = pick(4, 12) as usize;
    let n = pick(2, k_count as u64) as u32;
    let c = if pick(0, 1) == 0 { rat(1, 4) } else { rat(1, 2) };
    let f_n = rat(n as i64, 1);

    let random_dist = |rng_vals: &mut dyn FnMut(u64, u64) -> u64| {
        let support = rng_vals(1, 4) as usize;
        let mut atoms: Vec<(Rat, Rat)> = Vec::with_capacity(support);
        let mut weights: Vec<i64> = Vec::with_capacity(support);
        let mut used: Vec<(i64, i64)> = Vec::new();
        for _ in 0..support {
            let mut v;
            loop {
                v = (rng_vals(0, 12) as i64 - 6, rng_vals(1, 4) as i64);
                if !used.contains(&v) {
                    break;
                }
            }
            used.push(v);
            atoms.push((rat(v.0, v.1), Rat::zero()));
            weights.push(rng_vals(1, 8) as i64);
        }
        let total: i64 = weights.iter().sum();
        for (a, w) in atoms.iter_mut().zip(&weights) {
            a.1 = rat(*w, total);
        }
        FiniteDist::new(atoms).unwrap()
    };

    let family: Vec<FiniteDist> = (0..k_count).map(|_| random_dist(&mut pick)).collect();
    let limit = random_dist(&mut pick);

    // scaled limit index: atoms strictly above c, at or below K/n so a
    // quantized version stays inside the family range
    let nu = {
        let span_num = k_count as i64; // K/n in units of 1/n
        let mut atoms: Vec<(Rat, Rat)> = Vec::new();
        let mut weights: Vec<i64> = Vec::new();
        let support = pick(1, 3) as usize;
        let mut used: Vec<i64> = Vec::new();
        for _ in 0..support {
            // atom = j / (2n), constrained to (c, K/n]
            let lo_j = {
                let c_times = (&c * rat(2 * n as i64, 1)).floor().to_integer();
                c_times.to_i64().unwrap() + 1
            };
            let hi_j = 2 * span_num;
            let mut j;
            loop {
                j = pick(lo_j as u64, hi_j as u64) as i64;
                if !used.contains(&j) {
                    break;
                }
            }
            used.push(j);
            atoms.push((rat(j, 2 * n as i64), Rat::zero()));
            weights.push(pick(1, 8) as i64);
        }
        let total: i64 = weights.iter().sum();
        for (a, w) in atoms.iter_mut().zip(&weights) {
            a.1 = rat(*w, total);
        }
        FiniteDist::new(atoms).unwrap()
    };

    let kf = (&c * &f_n).floor().to_integer().to_i64().unwrap().max(1) as u64;
    let index = if pick(0, 1) == 0 {
        // direct: random law supported on {k_min .. K}
        let mut atoms: Vec<(Rat, Rat)> = Vec::new();
        let mut weights: Vec<i64> = Vec::new();
        let support = pick(1, 4) as usize;
        let mut used: Vec<u64> = Vec::new();
        for _ in 0..support {
            let mut k;
            loop {
                k = pick(kf, k_count as u64);
                if !used.contains(&k) {
                    break;
                }
            }
            used.push(k);
            atoms.push((rat(k as i64, 1), Rat::zero()));
            weights.push(pick(1, 8) as i64);
        }
        let total: i64 = weights.iter().sum();
        for (a, w) in atoms.iter_mut().zip(&weights) {
            a.1 = rat(*w, total);
        }
        FiniteDist::new(atoms).unwrap()
    } else {
        // quantized: p_n(k) = P { nu in ((k-1)/n, k/n] }
        let mut atoms: Vec<(Rat, Rat)> = Vec::new();
        for k in 1..=k_count {
            let lo = rat(k as i64 - 1, n as i64);
            let hi = rat(k as i64, n as i64);
            let mass: Rat = nu
                .atoms()
                .iter()
                .filter(|(v, _)| v > &lo && v <= &hi)
                .map(|(_, p)| p.clone())
                .sum();
            if mass.is_positive() {
                atoms.push((rat(k as i64, 1), mass));
            }
        }
        FiniteDist::new(atoms).unwrap()
    };

    RateModel {
        family,
        limit,
        index,
        nu,
        f_n,
        c,
        n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_model_at_n2_exact_values() {
        let report = rate_bound_exact(&toy_model(2)).unwrap();
        assert_eq!(report.lhs, rat(3, 16));
        assert_eq!(report.term1, rat(1, 2));
        assert_eq!(report.term2_printed, Rat::zero());
        assert!(report.holds);
        assert_eq!(report.k_min, 1);
    }

    #[test]
    fn toy_model_bound_holds_for_all_small_n() {
        for n in 1..=20 {
            let report = rate_bound_exact(&toy_model(n)).unwrap();
            // lhs = 3 * 2^{-n-2}, term1 = 2^{-floor(n/2)} when the floor
            // threshold lands inside the family
            let expected_lhs = BigRational::new(BigInt::from(3), BigInt::one() << (n + 2));
            assert_eq!(report.lhs, expected_lhs);
            assert!(report.lhs <= report.term1, "n={n}");
            assert!(report.holds, "n={n}");
        }
    }

    #[test]
    fn identical_family_gives_zero_lhs() {
        let mut model = toy_model(3);
        model.family = vec![model.limit.clone(); model.family.len()];
        let report = rate_bound_exact(&model).unwrap();
        assert_eq!(report.lhs, Rat::zero());
        assert_eq!(report.term1, Rat::zero());
        assert!(report.holds);
    }

    #[test]
    fn joint_enumeration_matches_mixture() {
        for n in [1u32, 3, 7] {
            let model = toy_model(n);
            let report = rate_bound_exact(&model).unwrap();
            assert_eq!(report.lhs, lhs_via_joint(&model).unwrap());
        }
        for s in 0..20u64 {
            let model = random_hypothesis_model(s);
            let report = rate_bound_exact(&model).unwrap();
            assert_eq!(report.lhs, lhs_via_joint(&model).unwrap());
        }
    }

    #[test]
    fn random_models_satisfy_bound() {
        for s in 0..100u64 {
            let model = random_hypothesis_model(s);
            let report = rate_bound_exact(&model).unwrap();
            assert!(report.holds, "seed {s}: lhs={} rhs={}", report.lhs, report.rhs_printed);
        }
    }

    #[test]
    fn validation_rejects_hypothesis_violations() {
        let mut model = toy_model(2);
        model.nu = FiniteDist::point_mass(rat(1, 4)); // not above c = 1/2
        assert!(matches!(
            rate_bound_exact(&model),
            Err(RateError::HypothesisViolation(_))
        ));

        let mut model = toy_model(2);
        model.index = FiniteDist::point_mass(rat(99, 1)); // outside family
        assert!(matches!(rate_bound_exact(&model), Err(RateError::NotFinite(_))));
    }

    #[test]
    fn finite_dist_enforces_exact_normalization() {
        assert!(FiniteDist::new(vec![(rat(0, 1), rat(1, 3)), (rat(1, 1), rat(1, 3))]).is_err());
        assert!(FiniteDist::new(vec![(rat(0, 1), rat(1, 2)), (rat(1, 1), rat(-1, 2))]).is_err());
        let d = FiniteDist::new(vec![
            (rat(1, 1), rat(1, 4)),
            (rat(0, 1), rat(1, 2)),
            (rat(1, 1), rat(1, 4)),
        ])
        .unwrap();
        assert_eq!(d.atoms().len(), 2);
        assert_eq!(d.cdf_strict(&rat(1, 1)), rat(1, 2));
    }
}
