//! Confidence intervals for the mean and one-sided bounds for means of
//! convex monotone functionals, built on the Studentized randomized pivot.

use crate::error::{Error, Result};
use crate::pivots::{randomized_abs_sum, variance_components};
use crate::process::SampleSeries;
use crate::weights::WeightVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalMethod {
    /// Short-memory Studentizer D_{n,q,0}.
    GStuShort,
    /// Long-memory Studentizer D_{n,q,d}.
    GStuLong,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: IntervalMethod,
}

/// Monotonicity/convexity shape declared by the caller; it is trusted, not
/// verified (impossible for an opaque callable).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionalShape {
    IncreasingConvex,
    DecreasingConvex,
}

/// Standard normal quantile `Phi^{-1}(p)` via the Wichura rational
/// approximation (AS 241), accurate well beyond 1e-8.
pub fn z_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ParameterDomain(format!(
            "quantile level must lie in (0,1), got {p}"
        )));
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return Ok(q * poly(&A, r) / poly(&B, r));
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let z = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    Ok(if q < 0.0 { -z } else { z })
}

fn poly(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

const A: [f64; 8] = [
    3.387_132_872_796_366_5e0,
    1.331_416_678_917_843_8e2,
    1.971_590_950_306_551_3e3,
    1.373_169_376_550_946e4,
    4.592_195_393_154_987e4,
    6.726_577_092_700_87e4,
    3.343_057_558_358_813e4,
    2.509_080_928_730_122_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091e1,
    6.871_870_074_920_579e2,
    5.394_196_021_424_751e3,
    2.121_379_430_158_659_7e4,
    3.930_789_580_009_271e4,
    2.872_908_573_572_194_3e4,
    5.226_495_278_852_545_5e3,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_5e0,
    4.630_337_846_156_545e0,
    5.769_497_221_460_691e0,
    3.647_848_324_763_204_5e0,
    1.270_458_252_452_368_4e0,
    2.417_807_251_774_506e-1,
    2.272_384_498_926_918_4e-2,
    7.745_450_142_783_414e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_759e0,
    1.676_384_830_183_803_8e0,
    6.897_673_349_851e-1,
    1.481_039_764_274_800_8e-1,
    1.519_866_656_361_645_7e-2,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_9e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103e0,
    5.463_784_911_164_114e0,
    1.784_826_539_917_291_3e0,
    2.965_605_718_285_048_7e-1,
    2.653_218_952_657_612_4e-2,
    1.242_660_947_388_078_4e-3,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_88e-1,
    1.369_298_809_227_358e-1,
    1.487_536_129_085_061_5e-2,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_7e-15,
];

struct BoundParts {
    center: f64,
    half: f64,
    abs_weight_sum: f64,
    method: IntervalMethod,
}

fn bound_parts(
    x: &SampleSeries,
    w: &WeightVector,
    q: usize,
    d: f64,
    z: f64,
) -> Result<BoundParts> {
    if w.is_degenerate() {
        return Err(Error::DegenerateWeights);
    }
    let vc = variance_components(x, w, q, d)?;
    if !(vc.total > 0.0) {
        return Err(Error::NonpositiveStudentizer(vc.total));
    }
    // sum_i |c_i| X_i = randomized_abs_sum at mu = 0
    let center = randomized_abs_sum(x, w, 0.0)?;
    let abs_weight_sum: f64 = w.centered().map(f64::abs).sum();
    Ok(BoundParts {
        center,
        half: z * vc.total.sqrt(),
        abs_weight_sum,
        method: if d == 0.0 {
            IntervalMethod::GStuShort
        } else {
            IntervalMethod::GStuLong
        },
    })
}

/// Two-sided `1 - alpha` randomized confidence interval for the mean:
/// `( sum_i |c_i| X_i -+ z_{1-alpha/2} D^{1/2} ) / sum_j |c_j|`.
pub fn ci_mean(
    x: &SampleSeries,
    w: &WeightVector,
    q: usize,
    d: f64,
    alpha: f64,
) -> Result<Interval> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::ParameterDomain(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    let z = z_quantile(1.0 - alpha / 2.0)?;
    let p = bound_parts(x, w, q, d, z)?;
    Ok(Interval {
        lower: (p.center - p.half) / p.abs_weight_sum,
        upper: (p.center + p.half) / p.abs_weight_sum,
        level: 1.0 - alpha,
        method: p.method,
    })
}

/// One-sided `1 - alpha` lower confidence bound for `E G(X)` where `G` is
/// convex and monotone in the declared direction: `G` applied to the
/// one-sided lower (increasing) or upper (decreasing) bound point for the
/// mean, using the one-sided quantile `z_{1-alpha}`.
pub fn functional_lower_bound<G: Fn(f64) -> f64>(
    x: &SampleSeries,
    w: &WeightVector,
    q: usize,
    d: f64,
    alpha: f64,
    shape: FunctionalShape,
    func: G,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::ParameterDomain(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    let z = z_quantile(1.0 - alpha)?;
    let p = bound_parts(x, w, q, d, z)?;
    let point = match shape {
        FunctionalShape::IncreasingConvex => (p.center - p.half) / p.abs_weight_sum,
        FunctionalShape::DecreasingConvex => (p.center + p.half) / p.abs_weight_sum,
    };
    Ok(func(point))
}
