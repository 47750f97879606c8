//! Randomized multinomial-weight pivots for the mean of short and long
//! memory linear processes, with a Monte Carlo harness reproducing the
//! accompanying coverage studies.
//!
//! The library covers:
//! - simulation of MA(1), AR(1) and FARIMA(0, d, 0) sample paths
//!   ([`process`]);
//! - multinomial randomization weights and their exact moments
//!   ([`weights`]);
//! - sample autocovariances and the memory-adaptive bandwidth rule
//!   ([`acvf`]);
//! - local Whittle estimation of the memory parameter ([`whittle`]);
//! - randomized and classical pivot statistics ([`pivots`]);
//! - confidence intervals for the mean and one-sided bounds for monotone
//!   convex functionals of it ([`intervals`]);
//! - deterministic, seed-lineage driven Monte Carlo experiments and CSV
//!   table output ([`harness`]).

pub mod acvf;
pub mod error;
pub mod harness;
pub mod intervals;
pub mod pivots;
pub mod process;
pub mod rng;
pub mod weights;
pub mod whittle;

pub use acvf::{acvf_upto, bandwidth_q, sample_acvf, sample_mean, AcvfEstimates};
pub use error::{Error, Result};
pub use harness::{
    coverage_experiment, proportion_experiment, run_table, table_design, write_table_csv,
    CoverageResult, CsvRow, DMode, ExperimentConfig, PivotSel, ProportionResult, TableOverrides,
};
pub use intervals::{
    ci_mean, functional_lower_bound, z_quantile, FunctionalShape, Interval, IntervalMethod,
};
pub use pivots::{
    g_n, g_n_stu, t_n_stu, t_star, t_star_short, t_star_stu, PivotKind, PivotValue,
    VarianceComponents,
};
pub use process::{
    farima_ma_coeffs, simulate, theoretical_acvf, InnovationDist, Model, ProcessSpec,
    SampleSeries, Sampler,
};
pub use rng::{RngStream, SeedLineage};
pub use weights::{draw_weights, exact_abs_cross_moment, CenteredWeightStats, WeightVector};
pub use whittle::{local_whittle, periodogram, MemoryEstimate, D_MAX};
