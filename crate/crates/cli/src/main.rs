//! `randpivot` — generation, memory estimation, randomized-pivot inference
//! and Monte Carlo table reproduction from the command line.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use randpivot::{
    bandwidth_q, ci_mean, coverage_experiment, draw_weights, g_n_stu, local_whittle,
    proportion_experiment, run_table, t_n_stu, t_star_stu, write_table_csv,
    DMode, Error, ExperimentConfig, InnovationDist, PivotSel, ProcessSpec, SampleSeries,
    Sampler, SeedLineage, TableOverrides,
};
use randpivot::whittle::default_m;

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "randpivot", version, about)]
struct Cli {
    /// Optional key=value config file ('#' comments); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; drawn from system entropy and printed when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo commands; default: available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a series and write it as a one-column CSV.
    Generate(GenerateArgs),
    /// Estimate the memory parameter d by local Whittle.
    EstimateD(SeriesInput),
    /// Randomized confidence interval for the mean of an observed series.
    Ci(CiArgs),
    /// Evaluate a pivot statistic on an observed series at a hypothesized mean.
    Pivot(PivotArgs),
    /// Empirical coverage experiment for a chosen model.
    Coverage(CoverageArgs),
    /// Proportion-of-coverages experiment (outer x inner replications).
    Proportion(ProportionArgs),
    /// Reproduce one of the bundled Monte Carlo tables (1-12) as CSV.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: ModelName,
    /// MA(1) coefficient (model = ma1).
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// AR(1) coefficient (model = ar1).
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<f64>,
    /// Memory parameter in [0, 0.5) (model = farima).
    #[arg(long)]
    d: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, value_enum, default_value_t = Innovation::Gaussian)]
    innovation: Innovation,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelName {
    Ma1,
    Ar1,
    Farima,
}

#[derive(Clone, Copy, ValueEnum)]
enum Innovation {
    Gaussian,
    Lognormal,
}

#[derive(Clone, Copy, ValueEnum)]
enum DModeArg {
    /// Short memory: d = 0.
    KnownZero,
    /// Use the value passed via --d.
    Known,
    /// Local Whittle estimate from the data.
    Estimate,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SeriesInput {
    /// Input CSV with one column "x" ('#' comment lines ignored).
    #[arg(long)]
    input: PathBuf,
    /// Number of periodogram ordinates; default round(n^0.65).
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Args)]
struct CiArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum)]
    d_mode: Option<DModeArg>,
    /// Memory parameter for --d-mode known.
    #[arg(long)]
    d: Option<f64>,
    /// Bandwidth override.
    #[arg(long)]
    q: Option<usize>,
}

#[derive(Args)]
struct PivotArgs {
    #[arg(long)]
    input: PathBuf,
    /// Hypothesized mean.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, value_enum, default_value_t = PivotName::GStu)]
    pivot: PivotName,
    #[arg(long, value_enum)]
    d_mode: Option<DModeArg>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    q: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PivotName {
    GStu,
    TStu,
    TStarStu,
}

#[derive(Args)]
struct CoverageArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum)]
    d_mode: Option<DModeArg>,
    #[arg(long)]
    q: Option<usize>,
}

#[derive(Args)]
struct ProportionArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    outer: Option<usize>,
    #[arg(long)]
    inner: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum)]
    d_mode: Option<DModeArg>,
    #[arg(long)]
    q: Option<usize>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Table id in 1..=12.
    #[arg(long)]
    table: u32,
    /// Multiplies replication counts (1.0 = published design).
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

/// Values read from the key=value config file. Precedence: flag > file >
/// built-in default.
#[derive(Default)]
struct FileConfig(HashMap<String, String>);

impl FileConfig {
    fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut map = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key=value", lineno + 1))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self(map))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| format!("config key {key}: cannot parse {v:?}")),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(AppError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}

enum AppError {
    Usage(String),
    Numeric(String),
}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        match e {
            Error::ParameterDomain(_) | Error::ShapeMismatch(_) => AppError::Usage(e.to_string()),
            Error::DegenerateWeights | Error::NonpositiveStudentizer(_) | Error::Numeric(_) => {
                AppError::Numeric(e.to_string())
            }
        }
    }
}

impl From<String> for AppError {
    fn from(msg: String) -> Self {
        AppError::Usage(msg)
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Usage(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let seed = match cli.seed.or(file.get("seed")?) {
        Some(s) => s,
        None => {
            let s: u64 = rand::random();
            println!("# seed drawn from entropy: {s}");
            s
        }
    };
    if let Some(t) = cli.threads.or(file.get("threads")?) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| AppError::Usage(format!("thread pool: {e}")))?;
    }

    match cli.command {
        Command::Generate(a) => cmd_generate(a, &file, seed),
        Command::EstimateD(a) => cmd_estimate_d(a, &file),
        Command::Ci(a) => cmd_ci(a, &file, seed),
        Command::Pivot(a) => cmd_pivot(a, &file, seed),
        Command::Coverage(a) => cmd_coverage(a, &file, seed),
        Command::Proportion(a) => cmd_proportion(a, &file, seed),
        Command::Reproduce(a) => cmd_reproduce(a, &file, seed),
    }
}

fn build_spec(a: &ModelArgs) -> Result<ProcessSpec, AppError> {
    let innov = match a.innovation {
        Innovation::Gaussian => InnovationDist::GaussianStd,
        Innovation::Lognormal => InnovationDist::LognormalStd,
    };
    let spec = match a.model {
        ModelName::Ma1 => {
            let theta = a
                .theta
                .ok_or_else(|| AppError::Usage("--theta is required for model ma1".into()))?;
            ProcessSpec::ma1(theta, a.mu, innov)?
        }
        ModelName::Ar1 => {
            let phi = a
                .phi
                .ok_or_else(|| AppError::Usage("--phi is required for model ar1".into()))?;
            ProcessSpec::ar1(phi, a.mu, innov)?
        }
        ModelName::Farima => {
            let d = a
                .d
                .ok_or_else(|| AppError::Usage("--d is required for model farima".into()))?;
            ProcessSpec::farima(d, a.mu, innov)?
        }
    };
    Ok(spec)
}

fn model_label(a: &ModelArgs) -> String {
    match a.model {
        ModelName::Ma1 => format!("ma1 theta={}", a.theta.unwrap_or(f64::NAN)),
        ModelName::Ar1 => format!("ar1 phi={}", a.phi.unwrap_or(f64::NAN)),
        ModelName::Farima => format!("farima d={}", a.d.unwrap_or(f64::NAN)),
    }
}

fn read_series(path: &Path) -> Result<SampleSeries, AppError> {
    let text = fs::read_to_string(path)
        .map_err(|e| AppError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line == "x" {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| AppError::Usage(format!("bad value in {}: {line:?}", path.display())))?;
        values.push(v);
    }
    Ok(SampleSeries::new(values)?)
}

/// Resolves (d, q) for inference on observed data.
fn resolve_d_q(
    x: &SampleSeries,
    d_mode: DModeArg,
    d_flag: Option<f64>,
    q_flag: Option<usize>,
) -> Result<(f64, usize), AppError> {
    let d = match d_mode {
        DModeArg::KnownZero => 0.0,
        DModeArg::Known => {
            d_flag.ok_or_else(|| AppError::Usage("--d is required for --d-mode known".into()))?
        }
        DModeArg::Estimate => {
            let m = default_m(x.len()).clamp(8, (x.len().saturating_sub(1)) / 2);
            local_whittle(x, m)?.d_hat
        }
    };
    let q = match q_flag {
        Some(q) => q,
        None => bandwidth_q(x.len(), d)?,
    };
    Ok((d, q))
}

fn parse_d_mode(file: &FileConfig, flag: Option<DModeArg>) -> Result<DModeArg, AppError> {
    if let Some(m) = flag {
        return Ok(m);
    }
    match file.0.get("d_mode").map(String::as_str) {
        None => Ok(DModeArg::KnownZero),
        Some("known-zero") => Ok(DModeArg::KnownZero),
        Some("known") => Ok(DModeArg::Known),
        Some("estimate") => Ok(DModeArg::Estimate),
        Some(other) => Err(AppError::Usage(format!("config d_mode: unknown {other:?}"))),
    }
}

fn cmd_generate(a: GenerateArgs, file: &FileConfig, seed: u64) -> Result<(), AppError> {
    let n = a
        .n
        .or(file.get("n")?)
        .ok_or_else(|| AppError::Usage("--n is required".into()))?;
    let spec = build_spec(&a.model)?;
    let sampler = Sampler::new(spec, n)?;
    let mut rng = SeedLineage::new(seed).stream(&[randpivot::rng::purpose::DATA]);
    let x = sampler.sample(&mut rng);
    let mut out = fs::File::create(&a.out)?;
    writeln!(
        out,
        "# generate model={} innovation={} n={n} mu={} seed={seed}",
        model_label(&a.model),
        spec.innovations.label(),
        a.model.mu
    )?;
    writeln!(out, "x")?;
    for v in x.iter() {
        writeln!(out, "{v}")?;
    }
    println!("wrote {} values to {}", n, a.out.display());
    Ok(())
}

fn cmd_estimate_d(a: SeriesInput, file: &FileConfig) -> Result<(), AppError> {
    let x = read_series(&a.input)?;
    let n = x.len();
    let m = a
        .m
        .or(file.get("m")?)
        .unwrap_or_else(|| default_m(n).clamp(8, n.saturating_sub(1) / 2));
    let est = local_whittle(&x, m)?;
    println!("# estimate-d input={} n={n} m={}", a.input.display(), est.m);
    println!("d_hat = {:.6}", est.d_hat);
    Ok(())
}

fn cmd_ci(a: CiArgs, file: &FileConfig, seed: u64) -> Result<(), AppError> {
    let x = read_series(&a.input)?;
    if x.len() < 8 {
        return Err(AppError::Usage(format!(
            "input series must have length >= 8, got {}",
            x.len()
        )));
    }
    let alpha = a.alpha.or(file.get("alpha")?).unwrap_or(0.05);
    let d_mode = parse_d_mode(file, a.d_mode)?;
    let q_flag = match a.q {
        Some(q) => Some(q),
        None => file.get("q")?,
    };
    let (d, q) = resolve_d_q(&x, d_mode, a.d.or(file.get("d")?), q_flag)?;
    let mut rng = SeedLineage::new(seed).stream(&[randpivot::rng::purpose::WEIGHTS]);
    let mut w = None;
    for _ in 0..100 {
        let cand = draw_weights(x.len(), &mut rng)?;
        if !cand.is_degenerate() {
            w = Some(cand);
            break;
        }
    }
    let w = w.ok_or_else(|| AppError::Numeric("degenerate weights after 100 redraws".into()))?;
    let iv = ci_mean(&x, &w, q, d, alpha)?;
    let z = randpivot::z_quantile(1.0 - alpha / 2.0)?;
    println!(
        "# ci input={} n={} alpha={alpha} d={d:.6} q={q} z={z:.6} seed={seed}",
        a.input.display(),
        x.len()
    );
    println!("lower = {:.6}", iv.lower);
    println!("upper = {:.6}", iv.upper);
    println!("d_hat = {d:.6}");
    println!("q = {q}");
    Ok(())
}

fn cmd_pivot(a: PivotArgs, file: &FileConfig, seed: u64) -> Result<(), AppError> {
    let x = read_series(&a.input)?;
    let d_mode = parse_d_mode(file, a.d_mode)?;
    let q_flag = match a.q {
        Some(q) => Some(q),
        None => file.get("q")?,
    };
    let (d, q) = resolve_d_q(&x, d_mode, a.d.or(file.get("d")?), q_flag)?;
    let mut rng = SeedLineage::new(seed).stream(&[randpivot::rng::purpose::WEIGHTS]);
    let mut w = None;
    for _ in 0..100 {
        let cand = draw_weights(x.len(), &mut rng)?;
        if !cand.is_degenerate() {
            w = Some(cand);
            break;
        }
    }
    let w = w.ok_or_else(|| AppError::Numeric("degenerate weights after 100 redraws".into()))?;
    let (label, value) = match a.pivot {
        PivotName::GStu => ("g_stu", g_n_stu(&x, &w, q, d, a.mu)?.value),
        PivotName::TStu => ("t_stu", t_n_stu(&x, q, d, a.mu)?.value),
        PivotName::TStarStu => ("t_star_stu", t_star_stu(&x, &w)?.value),
    };
    println!(
        "# pivot input={} n={} mu={} d={d:.6} q={q} seed={seed}",
        a.input.display(),
        x.len(),
        a.mu
    );
    println!("{label} = {value:.6}");
    Ok(())
}

fn experiment_config(
    model: &ModelArgs,
    n: usize,
    reps: usize,
    alpha: f64,
    d_mode: DModeArg,
    q: Option<usize>,
    seed: u64,
) -> Result<ExperimentConfig, AppError> {
    let spec = build_spec(model)?;
    let mut cfg = ExperimentConfig::new(spec, n, reps, seed);
    cfg.nominal = 1.0 - alpha;
    cfg.q_override = q;
    cfg.d_mode = match d_mode {
        DModeArg::KnownZero => DMode::KnownZero,
        DModeArg::Known => DMode::KnownD,
        DModeArg::Estimate => DMode::EstimatedD,
    };
    cfg.pivot_set = vec![PivotSel::GStu, PivotSel::TStu];
    Ok(cfg)
}

fn cmd_coverage(a: CoverageArgs, file: &FileConfig, seed: u64) -> Result<(), AppError> {
    let n = a
        .n
        .or(file.get("n")?)
        .ok_or_else(|| AppError::Usage("--n is required".into()))?;
    let reps = a.reps.or(file.get("reps")?).unwrap_or(1000);
    let alpha = a.alpha.or(file.get("alpha")?).unwrap_or(0.05);
    let d_mode = parse_d_mode(file, a.d_mode)?;
    let q = match a.q {
        Some(q) => Some(q),
        None => file.get("q")?,
    };
    let cfg = experiment_config(&a.model, n, reps, alpha, d_mode, q, seed)?;
    let res = coverage_experiment(&cfg)?;
    println!(
        "# coverage model={} n={n} reps={reps} alpha={alpha} d_mode={} seed={seed}",
        model_label(&a.model),
        cfg.d_mode.label()
    );
    for (pivot, cov) in &res.coverage {
        println!(
            "{} = {:.4} (se {:.4})",
            pivot.label(),
            cov,
            res.stderr(*pivot)
        );
    }
    println!("degenerate_rate = {:.6}", res.degenerate_rate);
    println!("nonpositive_rate = {:.6}", res.nonpositive_rate);
    println!("wall_time_s = {:.2}", res.wall_time.as_secs_f64());
    Ok(())
}

fn cmd_proportion(a: ProportionArgs, file: &FileConfig, seed: u64) -> Result<(), AppError> {
    let n = a
        .n
        .or(file.get("n")?)
        .ok_or_else(|| AppError::Usage("--n is required".into()))?;
    let outer = a.outer.or(file.get("outer")?).unwrap_or(500);
    let inner = a.inner.or(file.get("inner")?).unwrap_or(500);
    let alpha = a.alpha.or(file.get("alpha")?).unwrap_or(0.05);
    let d_mode = parse_d_mode(file, a.d_mode)?;
    let q = match a.q {
        Some(q) => Some(q),
        None => file.get("q")?,
    };
    let cfg = experiment_config(&a.model, n, inner, alpha, d_mode, q, seed)?;
    let res = proportion_experiment(&cfg, outer)?;
    println!(
        "# proportion model={} n={n} outer={outer} inner={inner} alpha={alpha} d_mode={} seed={seed}",
        model_label(&a.model),
        cfg.d_mode.label()
    );
    for (pivot, p) in &res.prop {
        println!("prop_{} = {:.4}", pivot.label(), p);
    }
    println!("degenerate_rate = {:.6}", res.degenerate_rate);
    println!("nonpositive_rate = {:.6}", res.nonpositive_rate);
    println!("wall_time_s = {:.2}", res.wall_time.as_secs_f64());
    Ok(())
}

fn cmd_reproduce(a: ReproduceArgs, file: &FileConfig, seed: u64) -> Result<(), AppError> {
    let overrides = TableOverrides {
        seed,
        scale: a.scale.or(file.get("scale")?).unwrap_or(1.0),
        q_override: match a.q {
            Some(q) => Some(q),
            None => file.get("q")?,
        },
    };
    let rows = run_table(a.table, &overrides)?;
    let mut out = fs::File::create(&a.out)?;
    write_table_csv(&mut out, a.table, &overrides, &rows)?;
    println!("wrote {} rows to {}", rows.len(), a.out.display());
    Ok(())
}
