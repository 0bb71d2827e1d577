//! Gaussian special functions used by the samplers and the limit laws.
//!
//! The quantile is Wichura's PPND16 rational approximation (absolute
//! error below 1e-9 across the open unit interval). The CDF is computed
//! from first principles — an alternating series for the central range
//! and a Mills-ratio continued fraction in the tails — so the two routes
//! are independent and cross-validate each other in the round-trip test.

/// Standard normal quantile (inverse CDF), `p` in the open unit interval.
pub fn norm_ppf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * rational(r, &PPND_A, &PPND_B);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        rational(r, &PPND_C, &PPND_D)
    } else {
        let r = r - 5.0;
        rational(r, &PPND_E, &PPND_F)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

fn rational(x: f64, num: &[f64; 8], den: &[f64; 8]) -> f64 {
    let mut n = 0.0;
    let mut d = 0.0;
    for i in (0..8).rev() {
        n = n * x + num[i];
        d = d * x + den[i];
    }
    n / d
}

const PPND_A: [f64; 8] = [
    3.387_132_872_796_366_608e0,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const PPND_B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
const PPND_C: [f64; 8] = [
    1.423_437_110_749_683_577_34e0,
    4.630_337_846_156_545_295_9e0,
    5.769_497_221_460_691_405_5e0,
    3.647_848_324_763_204_605_04e0,
    1.270_458_252_452_368_382_58e0,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const PPND_D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87e0,
    1.676_384_830_183_803_849_4e0,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const PPND_E: [f64; 8] = [
    6.657_904_643_501_103_777_2e0,
    5.463_784_911_164_114_369_9e0,
    1.784_826_539_917_291_335_8e0,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const PPND_F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - norm_cdf(-x);
    }
    if x > 3.0 {
        return 1.0 - upper_tail(x);
    }
    0.5 + phi_series(x)
}

/// `P(0 < Z <= x)` via the alternating series for the error integral.
fn phi_series(x: f64) -> f64 {
    // integral of the density: x * exp(-x^2/2) * sum x^{2n} / (1*3*...*(2n+1))
    let x2 = x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 1.0;
    loop {
        term *= x2 / (2.0 * n + 1.0);
        sum += term;
        n += 1.0;
        if term < 1e-18 * sum || n > 500.0 {
            break;
        }
    }
    INV_SQRT_2PI * x * (-0.5 * x2).exp() * sum
}

/// Upper tail `P(Z > x)` for large positive `x` via the Mills-ratio
/// continued fraction `phi(x) / (x + 1/(x + 2/(x + 3/(...))))`.
fn upper_tail(x: f64) -> f64 {
    let mut cf = 0.0;
    for k in (1..=60).rev() {
        cf = k as f64 / (x + cf);
    }
    INV_SQRT_2PI * (-0.5 * x * x).exp() / (x + cf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_points() {
        assert_eq!(norm_cdf(0.0), 0.5);
        assert!((norm_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-12);
        assert!((norm_cdf(-1.0) - 0.158_655_253_931_457_05).abs() < 1e-12);
        assert!((norm_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-12);
        assert!((norm_cdf(4.0) - 0.999_968_328_758_166_9).abs() < 1e-12);
    }

    #[test]
    fn quantile_reference_points() {
        assert_eq!(norm_ppf(0.5), 0.0);
        assert!((norm_ppf(0.975) - 1.959_963_984_540_054).abs() < 1e-8);
        assert!((norm_ppf(0.025) + 1.959_963_984_540_054).abs() < 1e-8);
    }

    #[test]
    fn round_trip_cross_validates_both_routes() {
        let mut u = 1e-6;
        while u < 1.0 {
            let x = norm_ppf(u);
            assert!(
                (norm_cdf(x) - u).abs() < 1e-9,
                "round trip failed at u={u}: ppf={x}, cdf={}",
                norm_cdf(x)
            );
            u += 0.000_937;
        }
    }
}
