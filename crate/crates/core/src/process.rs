//! Generation of short- and long-memory linear processes
//! `X_t = mu + sum_k a_k zeta_{t-k}` together with their exact theoretical
//! autocovariances, which double as test oracles.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Innovation distribution; both choices are standardized to mean 0 and
/// variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnovationDist {
    /// N(0, 1).
    GaussianStd,
    /// `(e^Z - e^{1/2}) / sqrt(e(e-1))` for Z ~ N(0,1): a heavily skewed
    /// lognormal shifted and scaled to mean 0, variance 1.
    LognormalStd,
}

impl InnovationDist {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        match self {
            InnovationDist::GaussianStd => z,
            InnovationDist::LognormalStd => {
                let e = std::f64::consts::E;
                (z.exp() - e.sqrt()) / (e * (e - 1.0)).sqrt()
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            InnovationDist::GaussianStd => "gaussian",
            InnovationDist::LognormalStd => "lognormal",
        }
    }
}

/// The data-generating model. Innovation variance is fixed at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// `X_t = mu + zeta_t + theta zeta_{t-1}`.
    Ma1 { theta: f64 },
    /// `X_t = mu (1 - phi) + phi X_{t-1} + zeta_t`, `|phi| < 1`.
    Ar1 { phi: f64 },
    /// FARIMA(0, d, 0) via truncated MA(inf), `0 < d < 0.5`.
    Farima { d: f64 },
}

impl Model {
    pub fn label(&self) -> &'static str {
        match self {
            Model::Ma1 { .. } => "ma1",
            Model::Ar1 { .. } => "ar1",
            Model::Farima { .. } => "farima",
        }
    }

    /// The memory parameter implied by the model (0 for short memory).
    pub fn memory_d(&self) -> f64 {
        match self {
            Model::Farima { d } => *d,
            _ => 0.0,
        }
    }
}

/// Full description of the data-generating process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessSpec {
    pub model: Model,
    pub mu: f64,
    pub innovations: InnovationDist,
    /// MA(inf) truncation length for FARIMA; `None` selects
    /// `max(10_000, 50 n)` at simulation time.
    pub truncation_k: Option<usize>,
    /// Burn-in length; `None` selects the model default (1000 for AR(1),
    /// 0 otherwise; MA(1) always uses one pre-sample innovation).
    pub burnin: Option<usize>,
}

impl ProcessSpec {
    pub fn new(model: Model, mu: f64, innovations: InnovationDist) -> Result<Self> {
        match model {
            Model::Ar1 { phi } if phi.abs() >= 1.0 => {
                return Err(Error::ParameterDomain(format!(
                    "AR(1) requires |phi| < 1, got {phi}"
                )));
            }
            Model::Farima { d } if !(d > 0.0 && d < 0.5) => {
                return Err(Error::ParameterDomain(format!(
                    "FARIMA requires 0 < d < 0.5, got {d}"
                )));
            }
            Model::Ma1 { theta } if !theta.is_finite() => {
                return Err(Error::ParameterDomain(format!("non-finite theta {theta}")));
            }
            _ => {}
        }
        Ok(Self {
            model,
            mu,
            innovations,
            truncation_k: None,
            burnin: None,
        })
    }

    pub fn ma1(theta: f64, mu: f64, innovations: InnovationDist) -> Result<Self> {
        Self::new(Model::Ma1 { theta }, mu, innovations)
    }

    pub fn ar1(phi: f64, mu: f64, innovations: InnovationDist) -> Result<Self> {
        Self::new(Model::Ar1 { phi }, mu, innovations)
    }

    pub fn farima(d: f64, mu: f64, innovations: InnovationDist) -> Result<Self> {
        Self::new(Model::Farima { d }, mu, innovations)
    }

    pub fn with_truncation(mut self, k: usize) -> Self {
        self.truncation_k = Some(k);
        self
    }

    pub fn with_burnin(mut self, burnin: usize) -> Self {
        self.burnin = Some(burnin);
        self
    }

    fn effective_truncation(&self, n: usize) -> usize {
        self.truncation_k.unwrap_or_else(|| 10_000.max(50 * n))
    }

    fn effective_burnin(&self) -> usize {
        self.burnin.unwrap_or(match self.model {
            Model::Ar1 { .. } => 1000,
            _ => 0,
        })
    }

    /// Number of innovations consumed to produce `n` observations.
    pub fn required_innovations(&self, n: usize) -> usize {
        match self.model {
            Model::Ma1 { .. } => n + 1,
            Model::Ar1 { .. } => n + self.effective_burnin(),
            Model::Farima { .. } => n + self.effective_truncation(n),
        }
    }
}

/// An observed (or simulated) series of length >= 2.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSeries(Vec<f64>);

impl SampleSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::ParameterDomain(format!(
                "series length must be >= 2, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite series value".into()));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Deref for SampleSeries {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// MA(inf) coefficients of FARIMA(0, d, 0): `psi_0 = 1`,
/// `psi_k = psi_{k-1} (k - 1 + d) / k = Gamma(k+d) / (Gamma(d) Gamma(k+1))`.
pub fn farima_ma_coeffs(d: f64, k_max: usize) -> Result<Vec<f64>> {
    if !(d > 0.0 && d < 0.5) {
        return Err(Error::ParameterDomain(format!(
            "FARIMA requires 0 < d < 0.5, got {d}"
        )));
    }
    let mut psi = Vec::with_capacity(k_max + 1);
    psi.push(1.0);
    for k in 1..=k_max {
        let prev = psi[k - 1];
        psi.push(prev * (k as f64 - 1.0 + d) / k as f64);
    }
    Ok(psi)
}

/// Exact lag-`h` autocovariance of the process (innovation variance 1).
pub fn theoretical_acvf(spec: &ProcessSpec, h: usize) -> Result<f64> {
    Ok(match spec.model {
        Model::Ma1 { theta } => match h {
            0 => 1.0 + theta * theta,
            1 => theta,
            _ => 0.0,
        },
        Model::Ar1 { phi } => phi.powi(h as i32) / (1.0 - phi * phi),
        Model::Farima { d } => {
            // gamma_h = Gamma(1-2d) Gamma(h+d) / (Gamma(d) Gamma(1-d) Gamma(h+1-d))
            let h = h as f64;
            (ln_gamma(1.0 - 2.0 * d) + ln_gamma(h + d)
                - ln_gamma(d)
                - ln_gamma(1.0 - d)
                - ln_gamma(h + 1.0 - d))
            .exp()
        }
    })
}

const FFT_CONVOLUTION_THRESHOLD: usize = 30_000_000;

enum SamplerKind {
    Ma1 {
        theta: f64,
    },
    Ar1 {
        phi: f64,
        burnin: usize,
    },
    FarimaDirect {
        psi: Vec<f64>,
    },
    FarimaFft {
        psi_fft: Vec<Complex<f64>>,
        fwd: Arc<dyn Fft<f64>>,
        inv: Arc<dyn Fft<f64>>,
        len: usize,
        k: usize,
    },
}

/// Reusable sampler for a fixed `(spec, n)`: FARIMA coefficient tables (and
/// their FFT, for long filters) are computed once and shared across
/// replications. `sample` is safe to call from multiple threads with
/// distinct streams.
pub struct Sampler {
    spec: ProcessSpec,
    n: usize,
    kind: SamplerKind,
}

impl Sampler {
    pub fn new(spec: ProcessSpec, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::ParameterDomain(format!("n must be >= 2, got {n}")));
        }
        // re-validate in case the spec was constructed literally
        let spec = ProcessSpec::new(spec.model, spec.mu, spec.innovations)?
            .carry_options(&spec);
        let kind = match spec.model {
            Model::Ma1 { theta } => SamplerKind::Ma1 { theta },
            Model::Ar1 { phi } => SamplerKind::Ar1 {
                phi,
                burnin: spec.effective_burnin(),
            },
            Model::Farima { d } => {
                let k = spec.effective_truncation(n);
                let psi = farima_ma_coeffs(d, k)?;
                if n * (k + 1) <= FFT_CONVOLUTION_THRESHOLD {
                    SamplerKind::FarimaDirect { psi }
                } else {
                    let len = (2 * k + n).next_power_of_two();
                    let mut planner = FftPlanner::new();
                    let fwd = planner.plan_fft_forward(len);
                    let inv = planner.plan_fft_inverse(len);
                    let mut psi_fft = vec![Complex::new(0.0, 0.0); len];
                    for (dst, &p) in psi_fft.iter_mut().zip(&psi) {
                        dst.re = p;
                    }
                    fwd.process(&mut psi_fft);
                    SamplerKind::FarimaFft {
                        psi_fft,
                        fwd,
                        inv,
                        len,
                        k,
                    }
                }
            }
        };
        Ok(Self { spec, n, kind })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn sample(&self, rng: &mut RngStream) -> SampleSeries {
        let m = self.spec.required_innovations(self.n);
        let innov: Vec<f64> = (0..m).map(|_| self.spec.innovations.sample(rng)).collect();
        self.from_innovations(&innov)
    }

    fn from_innovations(&self, innov: &[f64]) -> SampleSeries {
        let n = self.n;
        let mu = self.spec.mu;
        let values = match &self.kind {
            SamplerKind::Ma1 { theta } => (1..=n)
                .map(|t| mu + innov[t] + theta * innov[t - 1])
                .collect(),
            SamplerKind::Ar1 { phi, burnin } => {
                let mut x = mu;
                let mut out = Vec::with_capacity(n);
                for (t, &z) in innov.iter().enumerate() {
                    x = mu * (1.0 - phi) + phi * x + z;
                    if t >= *burnin {
                        out.push(x);
                    }
                }
                out
            }
            SamplerKind::FarimaDirect { psi } => {
                let k = psi.len() - 1;
                (0..n)
                    .map(|i| {
                        // X_i = mu + sum_j psi_j innov[k + i - j]
                        let window = &innov[i..=i + k];
                        let mut acc = 0.0;
                        for (j, &p) in psi.iter().enumerate() {
                            acc += p * window[k - j];
                        }
                        mu + acc
                    })
                    .collect()
            }
            SamplerKind::FarimaFft {
                psi_fft,
                fwd,
                inv,
                len,
                k,
            } => {
                let mut buf = vec![Complex::new(0.0, 0.0); *len];
                for (dst, &z) in buf.iter_mut().zip(innov) {
                    dst.re = z;
                }
                fwd.process(&mut buf);
                for (b, p) in buf.iter_mut().zip(psi_fft) {
                    *b *= p;
                }
                inv.process(&mut buf);
                let scale = 1.0 / *len as f64;
                buf[*k..*k + n].iter().map(|c| mu + c.re * scale).collect()
            }
        };
        SampleSeries(values)
    }
}

impl ProcessSpec {
    fn carry_options(mut self, other: &ProcessSpec) -> Self {
        self.truncation_k = other.truncation_k;
        self.burnin = other.burnin;
        self
    }
}

/// Draws a fresh sample of length `n` from the process.
pub fn simulate(spec: &ProcessSpec, n: usize, rng: &mut RngStream) -> Result<SampleSeries> {
    Ok(Sampler::new(*spec, n)?.sample(rng))
}

/// Deterministic version of [`simulate`] driven by caller-supplied
/// innovations (`spec.required_innovations(n)` values). FARIMA always takes
/// the direct-convolution path here, so results are exact oracles.
pub fn simulate_from_innovations(
    spec: &ProcessSpec,
    n: usize,
    innov: &[f64],
) -> Result<SampleSeries> {
    let need = spec.required_innovations(n);
    if innov.len() != need {
        return Err(Error::ShapeMismatch(format!(
            "expected {need} innovations, got {}",
            innov.len()
        )));
    }
    let sampler = Sampler::new(*spec, n)?;
    match &sampler.kind {
        SamplerKind::FarimaFft { k, .. } => {
            let psi = farima_ma_coeffs(spec.model.memory_d(), *k)?;
            let direct = Sampler {
                spec: sampler.spec,
                n,
                kind: SamplerKind::FarimaDirect { psi },
            };
            Ok(direct.from_innovations(innov))
        }
        _ => Ok(sampler.from_innovations(innov)),
    }
}
