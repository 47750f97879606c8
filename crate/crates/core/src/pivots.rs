//! The randomized and classical pivot statistics: G_n, its Studentized
//! version, the classical Studentized t-ratio, the bootstrap-style
//! statistics T_n*, and the shared variance components.
//!
//! All d-dependent exponents are evaluated in log space, so large n never
//! overflows a power.

use rayon::prelude::*;

use crate::acvf::{acvf_upto, sample_mean};
use crate::error::{Error, Result};
use crate::process::{theoretical_acvf, ProcessSpec, SampleSeries, Sampler};
use crate::rng::RngStream;
use crate::weights::{draw_weights, sum_sq_centered, CenteredWeightStats, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotKind {
    Gn,
    GnStu,
    TnStu,
    TStar,
    TStarShort,
    TStarStu,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotValue {
    pub value: f64,
    pub kind: PivotKind,
}

/// The Studentizer `D_{n,q,d}` split into its two additive parts:
/// `lag0_term = (q/n)^{-2d} gamma_bar_0 sum_j (w_j/n - 1/n)^2` and
/// `cross_term = 2 sum_{h=1}^q gamma_bar_h
///     sum_{j=1}^{q-h} |w_j - 1||w_{j+h} - 1| / (n^{1-2d} q^{1+2d})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceComponents {
    pub lag0_term: f64,
    pub cross_term: f64,
    pub total: f64,
    pub d_used: f64,
    pub q_used: usize,
}

fn check_lengths(x: &SampleSeries, w: &WeightVector) -> Result<()> {
    if x.len() != w.n() {
        return Err(Error::ShapeMismatch(format!(
            "series length {} != weight length {}",
            x.len(),
            w.n()
        )));
    }
    Ok(())
}

/// `sum_i |w_i/n - 1/n| (X_i - mu)`; the absolute centered weights preserve mu.
pub fn randomized_abs_sum(x: &SampleSeries, w: &WeightVector, mu: f64) -> Result<f64> {
    check_lengths(x, w)?;
    Ok(x.iter()
        .zip(w.centered())
        .map(|(&xi, c)| c.abs() * (xi - mu))
        .sum())
}

/// `sum_i (w_i/n - 1/n) X_i = Xbar* - Xbar`; invariant under shifts of X
/// because the centered weights sum to zero.
pub fn randomized_signed_sum(x: &SampleSeries, w: &WeightVector) -> Result<f64> {
    check_lengths(x, w)?;
    Ok(x.iter().zip(w.centered()).map(|(&xi, c)| c * xi).sum())
}

fn require_nondegenerate(w: &WeightVector) -> Result<()> {
    if w.is_degenerate() {
        return Err(Error::DegenerateWeights);
    }
    Ok(())
}

fn sqrt_radicand(r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::NonpositiveStudentizer(r));
    }
    Ok(r.sqrt())
}

/// The oracle-normalized pivot G_n: the randomized absolute sum divided by
/// its exact conditional standard deviation, built from the theoretical
/// autocovariances `gamma[0..n]` (entries beyond the slice are taken as 0).
pub fn g_n(x: &SampleSeries, w: &WeightVector, mu: f64, gamma: &[f64]) -> Result<PivotValue> {
    check_lengths(x, w)?;
    require_nondegenerate(w)?;
    if gamma.is_empty() || gamma[0] <= 0.0 {
        return Err(Error::ParameterDomain("gamma_0 must be positive".into()));
    }
    let n = x.len();
    let c: Vec<f64> = w.centered().collect();
    let mut radicand = gamma[0] * c.iter().map(|v| v * v).sum::<f64>();
    for h in 1..n.min(gamma.len()) {
        if gamma[h] == 0.0 {
            continue;
        }
        let s: f64 = (0..n - h).map(|j| c[j].abs() * c[j + h].abs()).sum();
        radicand += 2.0 * gamma[h] * s;
    }
    let denom = sqrt_radicand(radicand)?;
    Ok(PivotValue {
        value: randomized_abs_sum(x, w, mu)? / denom,
        kind: PivotKind::Gn,
    })
}

/// Studentizer components `D_{n,q,d}` from the sample autocovariances of `x`
/// at lags `0..=q` and the weight vector `w`.
pub fn variance_components(
    x: &SampleSeries,
    w: &WeightVector,
    q: usize,
    d: f64,
) -> Result<VarianceComponents> {
    check_lengths(x, w)?;
    if !(0.0..0.5).contains(&d) {
        return Err(Error::ParameterDomain(format!(
            "d must lie in [0, 0.5), got {d}"
        )));
    }
    let n = x.len();
    if q < 1 || q > n - 1 {
        return Err(Error::ParameterDomain(format!(
            "q must lie in 1..={}, got {q}",
            n - 1
        )));
    }
    let est = acvf_upto(x, q)?;
    let stats = CenteredWeightStats::new(w, q)?;
    let nf = n as f64;
    let qf = q as f64;
    let lag0_term = (-2.0 * d * (qf.ln() - nf.ln())).exp() * est.gammas[0] * stats.sum_sq;
    // 1 / (n^{1-2d} q^{1+2d})
    let cross_scale = (-(1.0 - 2.0 * d) * nf.ln() - (1.0 + 2.0 * d) * qf.ln()).exp();
    let mut cross_term = 0.0;
    for h in 1..=q {
        cross_term += est.gammas[h] * stats.abs_lag_sums[h - 1];
    }
    cross_term *= 2.0 * cross_scale;
    Ok(VarianceComponents {
        lag0_term,
        cross_term,
        total: lag0_term + cross_term,
        d_used: d,
        q_used: q,
    })
}

/// The Studentized randomized pivot `G_n^stu(d)`; asymptotically standard
/// normal for both short (d = 0) and long memory.
pub fn g_n_stu(
    x: &SampleSeries,
    w: &WeightVector,
    q: usize,
    d: f64,
    mu: f64,
) -> Result<PivotValue> {
    require_nondegenerate(w)?;
    let vc = variance_components(x, w, q, d)?;
    let denom = sqrt_radicand(vc.total)?;
    Ok(PivotValue {
        value: randomized_abs_sum(x, w, mu)? / denom,
        kind: PivotKind::GnStu,
    })
}

/// The classical Studentized statistic
/// `T_n^stu(d) = n^{1/2-d} (Xbar - mu) / sqrt(q^{-2d} gamma_bar_0
///  + 2 q^{-2d} sum_{h<=q} gamma_bar_h (1 - h/q))`.
pub fn t_n_stu(x: &SampleSeries, q: usize, d: f64, mu: f64) -> Result<PivotValue> {
    if !(0.0..0.5).contains(&d) {
        return Err(Error::ParameterDomain(format!(
            "d must lie in [0, 0.5), got {d}"
        )));
    }
    let n = x.len();
    if q < 1 || q > n - 1 {
        return Err(Error::ParameterDomain(format!(
            "q must lie in 1..={}, got {q}",
            n - 1
        )));
    }
    let est = acvf_upto(x, q)?;
    let qf = q as f64;
    let mut lrv = est.gammas[0];
    for h in 1..=q {
        lrv += 2.0 * est.gammas[h] * (1.0 - h as f64 / qf);
    }
    let radicand = (-2.0 * d * qf.ln()).exp() * lrv;
    let denom = sqrt_radicand(radicand)?;
    let scale = ((0.5 - d) * (n as f64).ln()).exp();
    Ok(PivotValue {
        value: scale * (sample_mean(x) - mu) / denom,
        kind: PivotKind::TnStu,
    })
}

/// Bootstrap statistic T_n* with the full signed-product conditional
/// variance, built from theoretical autocovariances.
pub fn t_star(x: &SampleSeries, w: &WeightVector, gamma: &[f64]) -> Result<PivotValue> {
    check_lengths(x, w)?;
    require_nondegenerate(w)?;
    if gamma.is_empty() || gamma[0] <= 0.0 {
        return Err(Error::ParameterDomain("gamma_0 must be positive".into()));
    }
    let n = x.len();
    let c: Vec<f64> = w.centered().collect();
    let mut radicand = gamma[0] * c.iter().map(|v| v * v).sum::<f64>();
    for h in 1..n.min(gamma.len()) {
        if gamma[h] == 0.0 {
            continue;
        }
        let s: f64 = (0..n - h).map(|j| c[j] * c[j + h]).sum();
        radicand += 2.0 * gamma[h] * s;
    }
    let denom = sqrt_radicand(radicand)?;
    Ok(PivotValue {
        value: randomized_signed_sum(x, w)? / denom,
        kind: PivotKind::TStar,
    })
}

/// Short-memory form of T_n* keeping only the lag-0 variance term.
pub fn t_star_short(x: &SampleSeries, w: &WeightVector, gamma0: f64) -> Result<PivotValue> {
    check_lengths(x, w)?;
    require_nondegenerate(w)?;
    let denom = sqrt_radicand(gamma0 * sum_sq_centered(w))?;
    Ok(PivotValue {
        value: randomized_signed_sum(x, w)? / denom,
        kind: PivotKind::TStarShort,
    })
}

/// Studentized bootstrap statistic
/// `T_n*^stu = sum_i (w_i/n - 1/n) X_i / sqrt(gamma_bar_0 sum_j (w_j/n - 1/n)^2)`.
pub fn t_star_stu(x: &SampleSeries, w: &WeightVector) -> Result<PivotValue> {
    check_lengths(x, w)?;
    require_nondegenerate(w)?;
    let gamma0 = acvf_upto(x, 0)?.gammas[0];
    let denom = sqrt_radicand(gamma0 * sum_sq_centered(w))?;
    Ok(PivotValue {
        value: randomized_signed_sum(x, w)? / denom,
        kind: PivotKind::TStarStu,
    })
}

/// Monte Carlo estimate of the conditional-variance scale
/// `n^{1-2d} ( gamma_0 sum_j c_j^2 + 2 sum_h gamma_h sum_j c_j c_{j+h} )`
/// averaged over `weight_draws` multinomial draws, using theoretical
/// autocovariances. For long memory this tends to 0 as n grows, which is
/// the diagnostic for why T_n* degenerates there.
pub fn tstar_variance_diagnostic(
    spec: &ProcessSpec,
    n: usize,
    weight_draws: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    let _ = Sampler::new(*spec, n)?; // validates spec and n
    let d = spec.model.memory_d();
    let gamma: Vec<f64> = (0..n)
        .map(|h| theoretical_acvf(spec, h))
        .collect::<Result<_>>()?;
    let draws: Vec<WeightVector> = (0..weight_draws)
        .map(|_| draw_weights(n, rng))
        .collect::<Result<_>>()?;
    let scale = ((1.0 - 2.0 * d) * (n as f64).ln()).exp();
    let total: f64 = draws
        .par_iter()
        .map(|w| {
            let c: Vec<f64> = w.centered().collect();
            let mut var = gamma[0] * c.iter().map(|v| v * v).sum::<f64>();
            for h in 1..n {
                if gamma[h] == 0.0 {
                    continue;
                }
                let s: f64 = (0..n - h).map(|j| c[j] * c[j + h]).sum();
                var += 2.0 * gamma[h] * s;
            }
            scale * var
        })
        .sum();
    Ok(total / weight_draws as f64)
}
