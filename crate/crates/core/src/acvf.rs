//! Sample moments of an observed series and the bandwidth-q selection rules.

use crate::error::{Error, Result};
use crate::process::SampleSeries;

/// Sample mean and sample autocovariances `gamma_bar_0..gamma_bar_q`
/// (divisor n, demeaned by the sample mean).
#[derive(Debug, Clone)]
pub struct AcvfEstimates {
    pub mean: f64,
    pub gammas: Vec<f64>,
    pub n: usize,
    pub q: usize,
}

pub fn sample_mean(x: &SampleSeries) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// `gamma_bar_h = (1/n) sum_{j=1}^{n-h} (X_j - Xbar)(X_{j+h} - Xbar)`.
///
/// The divisor is n, not n-h, which guarantees `|gamma_bar_h| <= gamma_bar_0`.
pub fn sample_acvf(x: &SampleSeries, h: usize) -> Result<f64> {
    let n = x.len();
    if h >= n {
        return Err(Error::ParameterDomain(format!(
            "lag h={h} must be < n={n}"
        )));
    }
    let mean = sample_mean(x);
    let v = &x[..];
    let s: f64 = (0..n - h).map(|j| (v[j] - mean) * (v[j + h] - mean)).sum();
    Ok(s / n as f64)
}

/// All sample autocovariances up to lag `q` in one pass.
pub fn acvf_upto(x: &SampleSeries, q: usize) -> Result<AcvfEstimates> {
    let n = x.len();
    if q >= n {
        return Err(Error::ParameterDomain(format!(
            "bandwidth q={q} must be < n={n}"
        )));
    }
    let mean = sample_mean(x);
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let gammas = (0..=q)
        .map(|h| {
            let s: f64 = (0..n - h).map(|j| centered[j] * centered[j + h]).sum();
            s / n as f64
        })
        .collect();
    Ok(AcvfEstimates { mean, gammas, n, q })
}

/// Bandwidth rule: `ceil(n^{1/3})` for short memory, `ceil(n^{1/(3+4d)})`
/// for `0 < d < 0.25`, `ceil(n^{1/2-d})` for `0.25 <= d < 0.5`, clamped to
/// `[1, floor(sqrt(n))]`.
pub fn bandwidth_q(n: usize, d: f64) -> Result<usize> {
    if n < 8 {
        return Err(Error::ParameterDomain(format!("n must be >= 8, got {n}")));
    }
    if !(0.0..0.5).contains(&d) {
        return Err(Error::ParameterDomain(format!(
            "d must lie in [0, 0.5), got {d}"
        )));
    }
    let nf = n as f64;
    let exponent = if d == 0.0 {
        1.0 / 3.0
    } else if d < 0.25 {
        1.0 / (3.0 + 4.0 * d)
    } else {
        0.5 - d
    };
    let q = nf.powf(exponent).ceil() as usize;
    Ok(q.clamp(1, nf.sqrt().floor() as usize))
}
