//! Local Whittle estimation of the memory parameter d from the low-frequency
//! periodogram.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::process::SampleSeries;

/// Upper end of the search interval; d_hat is always clamped into
/// `[0, D_MAX]` so downstream exponents stay well-defined.
pub const D_MAX: f64 = 0.499;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryEstimate {
    /// Estimated memory parameter, in `[0, 0.499]`.
    pub d_hat: f64,
    /// Number of low Fourier frequencies used.
    pub m: usize,
}

/// Default number of frequencies: `round(n^0.65)`.
pub fn default_m(n: usize) -> usize {
    (n as f64).powf(0.65).round() as usize
}

/// Periodogram `I(lambda_j) = |sum_t X_t e^{-i t lambda_j}|^2 / (2 pi n)` at
/// the Fourier frequencies `lambda_j = 2 pi j / n`, `j = 1..floor((n-1)/2)`.
/// The series is demeaned first; this changes nothing at `j >= 1` beyond
/// rounding, since constants are orthogonal to every nonzero frequency.
pub fn periodogram(x: &SampleSeries) -> Result<Vec<f64>> {
    let n = x.len();
    if n < 8 {
        return Err(Error::ParameterDomain(format!("n must be >= 8, got {n}")));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / (2.0 * std::f64::consts::PI * n as f64);
    Ok(buf[1..=(n - 1) / 2]
        .iter()
        .map(|c| c.norm_sqr() * scale)
        .collect())
}

/// Local Whittle objective:
/// `R(d) = ln( (1/m) sum_{j<=m} j^{2d} I(lambda_j) ) - (2d/m) sum_{j<=m} ln j`,
/// minimized over `[0, 0.499]` by golden-section search to 1e-6.
pub fn local_whittle(x: &SampleSeries, m: usize) -> Result<MemoryEstimate> {
    let n = x.len();
    if n < 8 {
        return Err(Error::ParameterDomain(format!("n must be >= 8, got {n}")));
    }
    let max_m = (n - 1) / 2;
    if m < 8 || m > max_m {
        return Err(Error::ParameterDomain(format!(
            "m must lie in 8..={max_m}, got {m}"
        )));
    }
    let per = periodogram(x)?;
    if per.iter().take(m).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite periodogram ordinate".into()));
    }
    let log_j: Vec<f64> = (1..=m).map(|j| (j as f64).ln()).collect();
    let mean_log_j = log_j.iter().sum::<f64>() / m as f64;
    let objective = |d: f64| -> f64 {
        let mut g = 0.0;
        for j in 1..=m {
            g += (2.0 * d * log_j[j - 1]).exp() * per[j - 1];
        }
        (g / m as f64).ln() - 2.0 * d * mean_log_j
    };
    let d_hat = golden_section_min(objective, 0.0, D_MAX, 1e-6);
    Ok(MemoryEstimate {
        d_hat: d_hat.clamp(0.0, D_MAX),
        m,
    })
}

fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
