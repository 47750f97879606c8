//! Multinomial randomization weights: one draw of
//! `(w_1, ..., w_n) ~ multinomial(n; 1/n, ..., 1/n)`, the centered-weight
//! summaries entering the pivots, and exact small-n moment formulas used as
//! oracles.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// One multinomial weight draw; `counts[i]` is the multiplicity of index `i`
/// among `n` uniform draws with replacement, so the counts always sum to `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightVector {
    counts: Vec<u32>,
}

impl WeightVector {
    pub fn from_counts(counts: Vec<u32>) -> Result<Self> {
        let n = counts.len();
        if n < 2 {
            return Err(Error::ParameterDomain(format!("n must be >= 2, got {n}")));
        }
        let total: u64 = counts.iter().map(|&c| c as u64).sum();
        if total != n as u64 {
            return Err(Error::ParameterDomain(format!(
                "counts must sum to n={n}, got {total}"
            )));
        }
        Ok(Self { counts })
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// All counts equal to 1: every centered-weight sum vanishes and the
    /// randomized pivots are undefined. Probability `n!/n^n`.
    pub fn is_degenerate(&self) -> bool {
        self.counts.iter().all(|&c| c == 1)
    }

    /// `w_i/n - 1/n` for each index.
    pub fn centered(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n() as f64;
        self.counts.iter().map(move |&c| (c as f64 - 1.0) / n)
    }
}

/// Draws one weight vector by resampling indices `0..n` with replacement.
pub fn draw_weights(n: usize, rng: &mut RngStream) -> Result<WeightVector> {
    if n < 2 {
        return Err(Error::ParameterDomain(format!("n must be >= 2, got {n}")));
    }
    let mut counts = vec![0u32; n];
    for _ in 0..n {
        counts[rng.random_range(0..n)] += 1;
    }
    let w = WeightVector { counts };
    debug_assert_eq!(w.counts.iter().map(|&c| c as u64).sum::<u64>(), n as u64);
    Ok(w)
}

/// `sum_j (w_j/n - 1/n)^2`.
pub fn sum_sq_centered(w: &WeightVector) -> f64 {
    let n = w.n() as f64;
    let s: f64 = w
        .counts
        .iter()
        .map(|&c| {
            let d = c as f64 - 1.0;
            d * d
        })
        .sum();
    s / (n * n)
}

/// `sum_{j=1}^{upper-h} |w_j - 1| |w_{j+h} - 1|`, unnormalized; callers apply
/// the n- and q-dependent scale factors. An empty range (`h >= upper`) gives 0.
pub fn abs_lag_product_sum(w: &WeightVector, h: usize, upper: usize) -> Result<f64> {
    if h == 0 {
        return Err(Error::ParameterDomain("lag h must be >= 1".into()));
    }
    if upper > w.n() {
        return Err(Error::ParameterDomain(format!(
            "upper={upper} exceeds n={}",
            w.n()
        )));
    }
    if h >= upper {
        return Ok(0.0);
    }
    let c = &w.counts;
    Ok((0..upper - h)
        .map(|j| {
            let a = (c[j] as f64 - 1.0).abs();
            let b = (c[j + h] as f64 - 1.0).abs();
            a * b
        })
        .sum())
}

/// Centered-weight summaries at all lags `1..=q`, plus the lag-0 sum of
/// squares, computed in one pass over the weight vector.
#[derive(Debug, Clone)]
pub struct CenteredWeightStats {
    /// `sum_j (w_j/n - 1/n)^2`
    pub sum_sq: f64,
    /// `abs_lag_sums[h-1] = sum_{j=1}^{q-h} |w_j - 1| |w_{j+h} - 1|`
    pub abs_lag_sums: Vec<f64>,
}

impl CenteredWeightStats {
    pub fn new(w: &WeightVector, q: usize) -> Result<Self> {
        let mut abs_lag_sums = Vec::with_capacity(q);
        for h in 1..=q {
            abs_lag_sums.push(abs_lag_product_sum(w, h, q)?);
        }
        Ok(Self {
            sum_sq: sum_sq_centered(w),
            abs_lag_sums,
        })
    }
}

fn pow_n(base_one_minus_inv: f64, n: f64) -> f64 {
    // (1 - 1/m)^n evaluated as exp(n ln(1 - 1/m)) for large-n accuracy
    (n * base_one_minus_inv.ln_1p()).exp()
}

/// Exact `E |(w_1 - 1)(w_2 - 1)|` for multinomial(n; 1/n, ..., 1/n):
/// `-1/n + 4 (1 - 1/n)^n [ 1/(n-1) + (1 - 1/(n-1))^n ]`.
///
/// Validated against exhaustive enumeration for n in 2..=5 (see tests).
pub fn exact_abs_cross_moment(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::ParameterDomain(format!("n must be >= 2, got {n}")));
    }
    let nf = n as f64;
    let p0 = pow_n(-1.0 / nf, nf); // (1 - 1/n)^n
    let inner = if n == 2 {
        // (1 - 1/(n-1))^n = 0 exactly; ln_1p(-1) is -inf
        1.0
    } else {
        1.0 / (nf - 1.0) + pow_n(-1.0 / (nf - 1.0), nf)
    };
    Ok(-1.0 / nf + 4.0 * p0 * inner)
}

/// The large-n form of the same moment,
/// `-1/n + 4 (1-1/n)^n (1-1/(n-1))^n`. It omits a `1/(n-1)`
/// term present in the exact expectation and differs from
/// [`exact_abs_cross_moment`] by `O(1/n)`.
pub fn asymptotic_abs_cross_moment(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::ParameterDomain(format!("n must be >= 2, got {n}")));
    }
    let nf = n as f64;
    let p0 = pow_n(-1.0 / nf, nf);
    let p1 = if n == 2 {
        0.0
    } else {
        pow_n(-1.0 / (nf - 1.0), nf)
    };
    Ok(-1.0 / nf + 4.0 * p0 * p1)
}

/// `b_{n,h} = -(n-h)/n^2 + 4 (n-h)/n (1-1/n)^n (1-1/(n-1))^n`.
pub fn asymptotic_moment_b(n: usize, h: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::ParameterDomain(format!("n must be >= 2, got {n}")));
    }
    if h == 0 || h > n - 1 {
        return Err(Error::ParameterDomain(format!(
            "h must lie in 1..={}, got {h}",
            n - 1
        )));
    }
    let nf = n as f64;
    let hf = h as f64;
    Ok((nf - hf) / nf * asymptotic_abs_cross_moment(n)?)
}
