//! Monte Carlo experiment harness: empirical coverage runs and
//! proportion-of-coverages runs, deterministic under any number of worker
//! threads, plus the bundled table configurations and CSV output.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::acvf::bandwidth_q;
use crate::error::{Error, Result};
use crate::intervals::z_quantile;
use crate::pivots::{g_n_stu, t_n_stu, t_star, t_star_stu};
use crate::process::{theoretical_acvf, InnovationDist, Model, ProcessSpec, Sampler};
use crate::rng::{purpose, SeedLineage};
use crate::weights::{draw_weights, WeightVector};
use crate::whittle::{default_m, local_whittle};

/// How the memory parameter enters the Studentizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DMode {
    /// Treat the process as short memory: d = 0.
    KnownZero,
    /// Use the true d of the generating model.
    KnownD,
    /// Re-estimate d from each replication's data by local Whittle.
    EstimatedD,
}

impl DMode {
    pub fn label(&self) -> &'static str {
        match self {
            DMode::KnownZero => "known-zero",
            DMode::KnownD => "known-d",
            DMode::EstimatedD => "estimated",
        }
    }
}

/// Pivots the harness can evaluate per replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PivotSel {
    GStu,
    TStu,
    TStar,
    TStarStu,
}

impl PivotSel {
    pub fn label(&self) -> &'static str {
        match self {
            PivotSel::GStu => "g_stu",
            PivotSel::TStu => "t_stu",
            PivotSel::TStar => "t_star",
            PivotSel::TStarStu => "t_star_stu",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub spec: ProcessSpec,
    pub n: usize,
    pub reps: usize,
    pub nominal: f64,
    pub d_mode: DMode,
    pub q_override: Option<usize>,
    pub pivot_set: Vec<PivotSel>,
    pub master_seed: u64,
    /// Tag scoping this experiment's child streams (table id, cell id, ...).
    pub exp_tags: Vec<u64>,
}

impl ExperimentConfig {
    pub fn new(spec: ProcessSpec, n: usize, reps: usize, master_seed: u64) -> Self {
        Self {
            spec,
            n,
            reps,
            nominal: 0.95,
            d_mode: DMode::KnownZero,
            q_override: None,
            pivot_set: vec![PivotSel::GStu, PivotSel::TStu],
            master_seed,
            exp_tags: vec![0],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(Error::ParameterDomain("reps must be >= 1".into()));
        }
        if !(self.nominal > 0.0 && self.nominal < 1.0) {
            return Err(Error::ParameterDomain(format!(
                "nominal must lie in (0,1), got {}",
                self.nominal
            )));
        }
        if self.pivot_set.is_empty() {
            return Err(Error::ParameterDomain("empty pivot set".into()));
        }
        Ok(())
    }
}

/// Outcome of one coverage experiment.
#[derive(Debug, Clone)]
pub struct CoverageResult {
    pub coverage: BTreeMap<PivotSel, f64>,
    /// Fraction of weight draws that came out degenerate (redrawn, counted).
    pub degenerate_rate: f64,
    /// Fraction of pivot evaluations rejected for a nonpositive Studentizer.
    pub nonpositive_rate: f64,
    pub wall_time: Duration,
    pub master_seed: u64,
    pub exp_tags: Vec<u64>,
    pub reps: usize,
}

impl CoverageResult {
    /// Binomial standard error of the coverage estimate for `pivot`.
    pub fn stderr(&self, pivot: PivotSel) -> f64 {
        let p = self.coverage.get(&pivot).copied().unwrap_or(f64::NAN);
        (p * (1.0 - p) / self.reps as f64).sqrt()
    }
}

/// Outcome of one proportion-of-coverages experiment.
#[derive(Debug, Clone)]
pub struct ProportionResult {
    /// Fraction of outer coverage probabilities within 0.01 of nominal.
    pub prop: BTreeMap<PivotSel, f64>,
    pub outer: usize,
    pub inner: usize,
    pub degenerate_rate: f64,
    pub nonpositive_rate: f64,
    pub wall_time: Duration,
}

const MAX_WEIGHT_REDRAWS: usize = 100;

#[derive(Default, Clone)]
struct RepTally {
    hits: Vec<u32>,
    valid: Vec<u32>,
    nonpositive: u64,
    evals: u64,
    degenerate_draws: u64,
    total_draws: u64,
}

fn run_one_rep(
    cfg: &ExperimentConfig,
    sampler: &Sampler,
    lineage: &SeedLineage,
    rep: u64,
    z: f64,
) -> RepTally {
    let mut tags = cfg.exp_tags.clone();
    tags.push(rep);
    tags.push(purpose::DATA);
    let mut data_rng = lineage.stream(&tags);
    *tags.last_mut().unwrap() = purpose::WEIGHTS;
    let mut weight_rng = lineage.stream(&tags);

    let x = sampler.sample(&mut data_rng);
    let n = cfg.n;

    let mut tally = RepTally {
        hits: vec![0; cfg.pivot_set.len()],
        valid: vec![0; cfg.pivot_set.len()],
        ..Default::default()
    };

    // redraw degenerate weight vectors, counting every draw
    let mut w: Option<WeightVector> = None;
    for _ in 0..MAX_WEIGHT_REDRAWS {
        tally.total_draws += 1;
        let cand = draw_weights(n, &mut weight_rng).expect("n >= 2");
        if cand.is_degenerate() {
            tally.degenerate_draws += 1;
        } else {
            w = Some(cand);
            break;
        }
    }
    let w = match w {
        Some(w) => w,
        // astronomically unlikely past n = 2; drop the replication
        None => return tally,
    };

    let d_used = match cfg.d_mode {
        DMode::KnownZero => 0.0,
        DMode::KnownD => cfg.spec.model.memory_d(),
        DMode::EstimatedD => match local_whittle(&x, default_m(n).clamp(8, (n - 1) / 2)) {
            Ok(est) => est.d_hat,
            Err(_) => {
                tally.nonpositive += cfg.pivot_set.len() as u64;
                tally.evals += cfg.pivot_set.len() as u64;
                return tally;
            }
        },
    };
    let q = cfg
        .q_override
        .unwrap_or_else(|| bandwidth_q(n, d_used).expect("validated n, d"));

    let mu = cfg.spec.mu;
    let needs_theory_gamma = cfg.pivot_set.contains(&PivotSel::TStar);
    let gamma: Vec<f64> = if needs_theory_gamma {
        (0..n)
            .map(|h| theoretical_acvf(&cfg.spec, h).expect("valid spec"))
            .collect()
    } else {
        Vec::new()
    };

    for (i, pivot) in cfg.pivot_set.iter().enumerate() {
        let value = match pivot {
            PivotSel::GStu => g_n_stu(&x, &w, q, d_used, mu).map(|p| p.value),
            PivotSel::TStu => t_n_stu(&x, q, d_used, mu).map(|p| p.value),
            PivotSel::TStar => t_star(&x, &w, &gamma).map(|p| p.value),
            PivotSel::TStarStu => t_star_stu(&x, &w).map(|p| p.value),
        };
        tally.evals += 1;
        match value {
            Ok(v) if v.is_finite() => {
                tally.valid[i] += 1;
                if v.abs() <= z {
                    tally.hits[i] += 1;
                }
            }
            Ok(_) | Err(Error::NonpositiveStudentizer(_)) | Err(Error::Numeric(_)) => {
                tally.nonpositive += 1;
            }
            Err(e) => panic!("unexpected pivot error: {e}"),
        }
    }
    tally
}

fn merge(mut a: RepTally, b: RepTally) -> RepTally {
    if a.hits.is_empty() {
        return b;
    }
    if b.hits.is_empty() {
        return a;
    }
    for (x, y) in a.hits.iter_mut().zip(&b.hits) {
        *x += y;
    }
    for (x, y) in a.valid.iter_mut().zip(&b.valid) {
        *x += y;
    }
    a.nonpositive += b.nonpositive;
    a.evals += b.evals;
    a.degenerate_draws += b.degenerate_draws;
    a.total_draws += b.total_draws;
    a
}

/// Runs one coverage experiment. Replications are scheduled with rayon but
/// every stream is derived from `(master_seed, exp_tags, rep, purpose)`, so
/// the result is bit-identical for any thread count.
pub fn coverage_experiment(cfg: &ExperimentConfig) -> Result<CoverageResult> {
    cfg.validate()?;
    let start = Instant::now();
    let z = z_quantile(1.0 - (1.0 - cfg.nominal) / 2.0)?;
    let sampler = Sampler::new(cfg.spec, cfg.n)?;
    let lineage = SeedLineage::new(cfg.master_seed);

    let tally = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|rep| run_one_rep(cfg, &sampler, &lineage, rep, z))
        .reduce(RepTally::default, merge);

    let mut coverage = BTreeMap::new();
    for (i, pivot) in cfg.pivot_set.iter().enumerate() {
        let v = tally.valid[i];
        coverage.insert(
            *pivot,
            if v == 0 {
                f64::NAN
            } else {
                tally.hits[i] as f64 / v as f64
            },
        );
    }
    Ok(CoverageResult {
        coverage,
        degenerate_rate: tally.degenerate_draws as f64 / tally.total_draws.max(1) as f64,
        nonpositive_rate: tally.nonpositive as f64 / tally.evals.max(1) as f64,
        wall_time: start.elapsed(),
        master_seed: cfg.master_seed,
        exp_tags: cfg.exp_tags.clone(),
        reps: cfg.reps,
    })
}

/// Runs `outer` coverage experiments of `cfg.reps` replications each and
/// reports, per pivot, the fraction of coverage estimates within 0.01 of
/// the nominal level.
pub fn proportion_experiment(cfg: &ExperimentConfig, outer: usize) -> Result<ProportionResult> {
    cfg.validate()?;
    if outer < 1 {
        return Err(Error::ParameterDomain("outer must be >= 1".into()));
    }
    let start = Instant::now();
    let results: Vec<CoverageResult> = (0..outer as u64)
        .into_par_iter()
        .map(|o| {
            let mut sub = cfg.clone();
            sub.exp_tags.push(o);
            coverage_experiment(&sub)
        })
        .collect::<Result<_>>()?;

    let mut prop = BTreeMap::new();
    for pivot in &cfg.pivot_set {
        let within = results
            .iter()
            .filter(|r| (r.coverage[pivot] - cfg.nominal).abs() <= 0.01)
            .count();
        prop.insert(*pivot, within as f64 / outer as f64);
    }
    let deg = results.iter().map(|r| r.degenerate_rate).sum::<f64>() / outer as f64;
    let nonpos = results.iter().map(|r| r.nonpositive_rate).sum::<f64>() / outer as f64;
    Ok(ProportionResult {
        prop,
        outer,
        inner: cfg.reps,
        degenerate_rate: deg,
        nonpositive_rate: nonpos,
        wall_time: start.elapsed(),
    })
}

/// One CSV output row of [`run_table`].
#[derive(Debug, Clone)]
pub struct CsvRow {
    pub table: u32,
    pub model: String,
    pub innovation: String,
    pub n: usize,
    pub q: usize,
    pub d_mode: String,
    pub pivot: String,
    pub value: f64,
    pub stderr: f64,
    pub degenerate_rate: f64,
    pub nonpositive_rate: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct TableOverrides {
    pub seed: u64,
    /// Multiplies the replication counts (1.0 = the published design:
    /// 1000 reps for coverage tables, 500 x 500 for proportion tables).
    pub scale: f64,
    pub q_override: Option<usize>,
}

impl Default for TableOverrides {
    fn default() -> Self {
        Self {
            seed: 0,
            scale: 1.0,
            q_override: None,
        }
    }
}

/// Design of one published table.
pub struct TableDesign {
    pub id: u32,
    pub model: Model,
    pub innovations: InnovationDist,
    pub d_mode: DMode,
    pub sample_sizes: [usize; 2],
    /// Coverage table (1-6) or proportion table (7-12).
    pub proportion: bool,
}

pub fn table_design(table_id: u32) -> Result<TableDesign> {
    let (model, d_mode, sizes) = match table_id {
        1 | 7 => (Model::Ma1 { theta: -0.5 }, DMode::KnownZero, match table_id {
            1 => [20, 30],
            _ => [20, 30],
        }),
        2 | 8 => (Model::Ar1 { phi: 0.5 }, DMode::KnownZero, match table_id {
            2 => [20, 30],
            _ => [70, 80],
        }),
        3 => (Model::Farima { d: 0.2 }, DMode::KnownD, [30, 50]),
        4 => (Model::Farima { d: 0.2 }, DMode::EstimatedD, [200, 300]),
        5 => (Model::Farima { d: 0.4 }, DMode::KnownD, [300, 400]),
        6 => (Model::Farima { d: 0.4 }, DMode::EstimatedD, [500, 1000]),
        9 => (Model::Farima { d: 0.2 }, DMode::KnownD, [150, 250]),
        10 => (Model::Farima { d: 0.2 }, DMode::EstimatedD, [400, 500]),
        11 => (Model::Farima { d: 0.4 }, DMode::KnownD, [300, 400]),
        12 => (Model::Farima { d: 0.4 }, DMode::EstimatedD, [1500, 2000]),
        _ => {
            return Err(Error::ParameterDomain(format!(
                "table id must lie in 1..=12, got {table_id}"
            )))
        }
    };
    Ok(TableDesign {
        id: table_id,
        model,
        innovations: if table_id <= 6 {
            InnovationDist::GaussianStd
        } else {
            InnovationDist::LognormalStd
        },
        d_mode,
        sample_sizes: sizes,
        proportion: table_id > 6,
    })
}

/// Runs every cell of the named table and returns one row per
/// (sample size, pivot).
pub fn run_table(table_id: u32, overrides: &TableOverrides) -> Result<Vec<CsvRow>> {
    let design = table_design(table_id)?;
    let mut rows = Vec::new();
    for (cell, &n) in design.sample_sizes.iter().enumerate() {
        let spec = ProcessSpec::new(design.model, 0.0, design.innovations)?;
        let mut cfg = ExperimentConfig::new(spec, n, 0, overrides.seed);
        cfg.d_mode = design.d_mode;
        cfg.q_override = overrides.q_override;
        cfg.exp_tags = vec![table_id as u64, cell as u64];
        // nominal design q for the cell (per-replication for EstimatedD)
        let design_d = match design.d_mode {
            DMode::KnownZero => 0.0,
            _ => design.model.memory_d(),
        };
        let q = overrides.q_override.unwrap_or(bandwidth_q(n, design_d)?);
        if design.proportion {
            cfg.reps = scaled(500, overrides.scale);
            let outer = scaled(500, overrides.scale);
            let res = proportion_experiment(&cfg, outer)?;
            for pivot in &cfg.pivot_set {
                let p = res.prop[pivot];
                rows.push(CsvRow {
                    table: table_id,
                    model: design.model.label().to_string(),
                    innovation: design.innovations.label().to_string(),
                    n,
                    q,
                    d_mode: design.d_mode.label().to_string(),
                    pivot: format!("prop_{}", pivot.label()),
                    value: p,
                    stderr: (p * (1.0 - p) / outer as f64).sqrt(),
                    degenerate_rate: res.degenerate_rate,
                    nonpositive_rate: res.nonpositive_rate,
                    seed: overrides.seed,
                });
            }
        } else {
            cfg.reps = scaled(1000, overrides.scale);
            let res = coverage_experiment(&cfg)?;
            for pivot in &cfg.pivot_set {
                rows.push(CsvRow {
                    table: table_id,
                    model: design.model.label().to_string(),
                    innovation: design.innovations.label().to_string(),
                    n,
                    q,
                    d_mode: design.d_mode.label().to_string(),
                    pivot: pivot.label().to_string(),
                    value: res.coverage[pivot],
                    stderr: res.stderr(*pivot),
                    degenerate_rate: res.degenerate_rate,
                    nonpositive_rate: res.nonpositive_rate,
                    seed: overrides.seed,
                });
            }
        }
    }
    Ok(rows)
}

fn scaled(base: usize, scale: f64) -> usize {
    ((base as f64 * scale).round() as usize).max(1)
}

/// Writes table rows as CSV (RFC 4180, UTF-8, header row), preceded by
/// `#`-comment lines recording the resolved configuration. Re-running with
/// the same configuration and seed reproduces the file bit-exactly.
pub fn write_table_csv<W: Write>(
    out: &mut W,
    table_id: u32,
    overrides: &TableOverrides,
    rows: &[CsvRow],
) -> std::io::Result<()> {
    writeln!(
        out,
        "# table={} seed={} scale={} q_override={}",
        table_id,
        overrides.seed,
        overrides.scale,
        overrides
            .q_override
            .map_or("none".to_string(), |q| q.to_string())
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "table",
        "model",
        "innovation",
        "n",
        "q",
        "d_mode",
        "pivot",
        "value",
        "stderr",
        "degenerate_rate",
        "nonpositive_rate",
        "seed",
    ])?;
    for r in rows {
        w.write_record([
            r.table.to_string(),
            r.model.clone(),
            r.innovation.clone(),
            r.n.to_string(),
            r.q.to_string(),
            r.d_mode.clone(),
            r.pivot.clone(),
            format!("{:.6}", r.value),
            format!("{:.6}", r.stderr),
            format!("{:.6}", r.degenerate_rate),
            format!("{:.6}", r.nonpositive_rate),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ma1_cfg(n: usize, reps: usize, seed: u64) -> ExperimentConfig {
        let spec =
            ProcessSpec::ma1(-0.5, 0.0, InnovationDist::GaussianStd).expect("valid spec");
        ExperimentConfig::new(spec, n, reps, seed)
    }

    #[test]
    fn coverage_deterministic_across_thread_counts() {
        let cfg = ma1_cfg(30, 200, 99);
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = pool1.install(|| coverage_experiment(&cfg)).unwrap();
        let b = pool4.install(|| coverage_experiment(&cfg)).unwrap();
        assert_eq!(a.coverage, b.coverage);
        assert_eq!(a.degenerate_rate, b.degenerate_rate);
        assert_eq!(a.nonpositive_rate, b.nonpositive_rate);
    }

    #[test]
    fn degenerate_rate_matches_combinatorics_n5() {
        // P(all counts 1) = 5!/5^5 = 0.0384
        let cfg = ma1_cfg(5, 100_000, 7);
        let mut cfg = cfg;
        cfg.q_override = Some(2);
        let res = coverage_experiment(&cfg).unwrap();
        let p = 120.0 / 3125.0;
        let se = (p * (1.0 - p) / res.reps as f64).sqrt();
        assert!(
            (res.degenerate_rate - p).abs() < 3.0 * se,
            "rate={} expect={p}",
            res.degenerate_rate
        );
    }

    #[test]
    fn proportion_degenerate_config() {
        let mut cfg = ma1_cfg(30, 1, 3);
        cfg.reps = 1;
        let res = proportion_experiment(&cfg, 1).unwrap();
        for (_, &p) in &res.prop {
            assert!(p == 0.0 || p == 1.0);
        }
    }

    #[test]
    fn run_table_layout() {
        let rows = run_table(
            1,
            &TableOverrides {
                seed: 5,
                scale: 0.05,
                q_override: None,
            },
        )
        .unwrap();
        // 2 sample sizes x 2 pivots
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.table == 1 && r.model == "ma1"));
        let design = table_design(5).unwrap();
        assert_eq!(design.sample_sizes, [300, 400]);
        assert!(matches!(design.d_mode, DMode::KnownD));
        assert!(table_design(13).is_err());
    }

    #[test]
    fn csv_round_trip_is_stable() {
        let overrides = TableOverrides {
            seed: 11,
            scale: 0.02,
            q_override: None,
        };
        let rows = run_table(1, &overrides).unwrap();
        let mut buf_a = Vec::new();
        write_table_csv(&mut buf_a, 1, &overrides, &rows).unwrap();
        let rows2 = run_table(1, &overrides).unwrap();
        let mut buf_b = Vec::new();
        write_table_csv(&mut buf_b, 1, &overrides, &rows2).unwrap();
        assert_eq!(buf_a, buf_b);
        assert!(std::str::from_utf8(&buf_a).unwrap().starts_with("# table=1"));
    }
}
