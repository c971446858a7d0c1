//! Command-line front end.
//!
//! Exit status: 0 on success, 2 on a usage error, 3 on a data error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::cone::{parse_numbers, ConeFamily, PolyhedralCone};
use crate::dist::{exact_weights, mc_weights, ChiBarMixture};
use crate::error::{ConeTestError, Result};
use crate::fmt::sig;
use crate::project::CovarianceSpec;
use crate::sim::{self, Grid, MeanParam, PowerSetup};
use crate::testkit::{
    alpha_adjustment_with_cov, type_a_adjustment_for, AdjustmentMode, AlphaAdjustment,
    PreparedTest, TestKind, TestOutcome,
};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "conetest",
    version,
    about = "Likelihood-ratio tests for polyhedral cone hypotheses"
)]
pub struct RunConfig {
    /// Worker threads for simulations (default: available parallelism).
    #[arg(long, global = true, env = "CONETEST_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test one observation vector.
    Test(TestArgs),
    /// Chi-bar-squared mixture weights as `df,weight` CSV.
    Weights(WeightsArgs),
    /// Rejection rate of a test at a null mean.
    Level(LevelArgs),
    /// Power of the adaptive and mixture tests over a grid of means.
    Power(PowerArgs),
    /// Largest number of violated constraints for which the adaptive critical
    /// value is below the mixture quantile.
    Crossover(CrossoverArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("cone_source").required(true).args(["cone", "orthant", "isotonic"])))]
pub struct ConeArgs {
    /// Cone file: `p k` then `k` rows of the constraint matrix.
    #[arg(long)]
    pub cone: Option<PathBuf>,
    /// Orthant `μ ≤ 0` in dimension p.
    #[arg(long, value_name = "P")]
    pub orthant: Option<usize>,
    /// Isotonic cone `μ₁ ≤ … ≤ μₚ`.
    #[arg(long, value_name = "P")]
    pub isotonic: Option<usize>,
    /// Covariance file (`p` rows of `p` numbers); identity if omitted.
    #[arg(long)]
    pub cov: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Adjust {
    /// Exact bound when the cone admits one, otherwise none.
    Auto,
    None,
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Adaptive,
    Mixture,
    TypeA,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long)]
    pub nsim: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub cone: ConeArgs,
    /// Observation vector, whitespace or comma separated.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Adjust::Auto)]
    pub adjust: Adjust,
    #[arg(long, value_enum, default_value_t = MethodArg::Adaptive)]
    pub method: MethodArg,
    /// Mixture weights CSV for `--method mixture`.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Variance estimate; switches to the unknown-variance test.
    #[arg(long, requires = "m")]
    pub sigma_hat2: Option<f64>,
    /// Degrees of freedom of the variance estimate.
    #[arg(long, requires = "sigma_hat2")]
    pub m: Option<u32>,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Write the outcome as CSV.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[command(flatten)]
    pub cone: ConeArgs,
    /// Estimate by simulation even when exact weights exist.
    #[arg(long)]
    pub mc: bool,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LevelArgs {
    #[command(flatten)]
    pub cone: ConeArgs,
    /// Null mean, comma separated (default: the origin).
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Adjust::Auto)]
    pub adjust: Adjust,
    #[arg(long, value_enum, default_value_t = MethodArg::Adaptive)]
    pub method: MethodArg,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[command(flatten)]
    pub cone: ConeArgs,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Adjust::Auto)]
    pub adjust: Adjust,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Lower grid bound on both axes.
    #[arg(long, allow_hyphen_values = true)]
    pub grid_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub grid_max: Option<f64>,
    /// Points per axis.
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("family").required(true).args(["orthant", "isotonic"])))]
pub struct CrossoverArgs {
    #[arg(long)]
    pub orthant: bool,
    #[arg(long)]
    pub isotonic: bool,
    #[arg(long, default_value_t = 2)]
    pub pmin: usize,
    #[arg(long)]
    pub pmax: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl ConeTestError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            ConeTestError::Usage(_)
            | ConeTestError::InvalidProbability(_)
            | ConeTestError::AlphaOverflow { .. }
            | ConeTestError::TooFewSimulations { .. }
            | ConeTestError::UnsupportedFamily(_)
            | ConeTestError::MuOutsideNull => EXIT_USAGE,
            _ => EXIT_DATA,
        }
    }
}

/// Parse `args` (including the program name), run, and return the exit status.
/// Reports go to `stdout`, diagnostics to `stderr`.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(&config, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(config: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        if n == 0 {
            return Err(ConeTestError::Usage("--threads must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| ConeTestError::Usage(format!("cannot start worker pool: {e}")))?;
    let buf = pool.install(|| {
        let mut buf = Vec::new();
        match &config.command {
            Command::Test(a) => run_test(a, &mut buf),
            Command::Weights(a) => run_weights(a, &mut buf),
            Command::Level(a) => run_level(a, &mut buf),
            Command::Power(a) => run_power(a, &mut buf),
            Command::Crossover(a) => run_crossover(a, &mut buf),
        }
        .map(|()| buf)
    })?;
    stdout.write_all(&buf)?;
    stdout.flush()?;
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(ConeTestError::InvalidProbability(alpha))
    }
}

fn load_cone(args: &ConeArgs) -> Result<(PolyhedralCone, CovarianceSpec)> {
    let cone = match (&args.cone, args.orthant, args.isotonic) {
        (Some(path), _, _) => PolyhedralCone::from_file(path)?,
        (_, Some(p), _) => {
            PolyhedralCone::orthant(p).map_err(|_| usage("--orthant needs p ≥ 1"))?
        }
        (_, _, Some(p)) => {
            PolyhedralCone::isotonic(p).map_err(|_| usage("--isotonic needs p ≥ 2"))?
        }
        _ => return Err(usage("one of --cone, --orthant, --isotonic is required")),
    };
    let cov = match &args.cov {
        Some(path) => CovarianceSpec::from_file(path)?,
        None => CovarianceSpec::identity(cone.dim()),
    };
    cone.check_dim(cov.dim())?;
    Ok((cone, cov))
}

fn usage(msg: &str) -> ConeTestError {
    ConeTestError::Usage(msg.to_string())
}

fn require_seed(sim: &SimArgs, what: &str) -> Result<(usize, u64)> {
    match (sim.nsim, sim.seed) {
        (Some(n), Some(s)) => Ok((n, s)),
        _ => Err(ConeTestError::Usage(format!(
            "{what} needs --nsim and --seed"
        ))),
    }
}

/// Read one vector from a text file, skipping blank and `#` lines.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums =
            parse_numbers(line).map_err(|m| ConeTestError::parse(i + 1, m).with_path(path))?;
        values.extend(nums);
    }
    if values.is_empty() {
        return Err(ConeTestError::parse(1, "no values").with_path(path));
    }
    Ok(values)
}

fn parse_mu(text: &str) -> Result<Vec<f64>> {
    parse_numbers(text).map_err(|m| ConeTestError::Usage(format!("--mu: {m}")))
}

fn adjustment(
    mode: Adjust,
    method: MethodArg,
    cone: &PolyhedralCone,
    cov: &CovarianceSpec,
    sim: &SimArgs,
) -> Result<AlphaAdjustment> {
    let adjust = |m| match method {
        MethodArg::TypeA => type_a_adjustment_for(cone, cov, m),
        _ => alpha_adjustment_with_cov(cone, cov, m),
    };
    match mode {
        Adjust::None => Ok(AlphaAdjustment::none()),
        Adjust::Exact => adjust(AdjustmentMode::ExactBound),
        Adjust::Auto => match adjust(AdjustmentMode::ExactBound) {
            Err(ConeTestError::UnsupportedFamily(_)) => Ok(AlphaAdjustment::none()),
            other => other,
        },
        Adjust::Mc => {
            let (nsim, seed) = require_seed(sim, "--adjust mc")?;
            adjust(AdjustmentMode::MonteCarloEstimate { nsim, seed })
        }
    }
}

fn mixture(
    cone: &PolyhedralCone,
    cov: &CovarianceSpec,
    weights: Option<&Path>,
    sim: &SimArgs,
) -> Result<ChiBarMixture> {
    if let Some(path) = weights {
        let file = File::open(path)?;
        return ChiBarMixture::read_csv(file).map_err(|e| e.with_path(path));
    }
    if let Some(mix) = exact_weights(cone, cov) {
        return Ok(mix);
    }
    let (nsim, seed) = require_seed(sim, "mixture weights for this cone")?;
    mc_weights(cone, cov, nsim, seed)
}

fn prepare(
    method: MethodArg,
    cone: &PolyhedralCone,
    cov: &CovarianceSpec,
    alpha: f64,
    adj: AlphaAdjustment,
    weights: Option<&Path>,
    sim: &SimArgs,
) -> Result<PreparedTest> {
    let kind = match method {
        MethodArg::Adaptive => TestKind::AdaptiveB,
        MethodArg::Mixture => TestKind::MixtureB(mixture(cone, cov, weights, sim)?),
        MethodArg::TypeA => TestKind::AdaptiveA,
    };
    PreparedTest::new(kind, cone, cov, alpha, adj)
}

/// Open `--output`, or fall back to `stdout`.
fn with_output(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

fn run_test(a: &TestArgs, stdout: &mut dyn Write) -> Result<()> {
    check_alpha(a.alpha)?;
    let (cone, cov) = load_cone(&a.cone)?;
    let y = read_vector(&a.data)?;
    cone.check_dim(y.len())?;
    let outcome = match (a.sigma_hat2, a.m) {
        (Some(s2), Some(m)) => {
            if a.method != MethodArg::Adaptive {
                return Err(usage("--sigma-hat2/--m apply only to the adaptive method"));
            }
            if m == 0 {
                return Err(usage("--m must be positive"));
            }
            let adj = adjustment(a.adjust, a.method, &cone, &cov, &a.sim)?;
            PreparedTest::new(
                TestKind::AdaptiveBUnknownVar { m },
                &cone,
                &cov,
                a.alpha,
                adj,
            )?
            .evaluate_unknown_var(&y, s2)?
        }
        _ => {
            let adj = match a.method {
                MethodArg::Mixture => AlphaAdjustment::none(),
                m => adjustment(a.adjust, m, &cone, &cov, &a.sim)?,
            };
            prepare(
                a.method,
                &cone,
                &cov,
                a.alpha,
                adj,
                a.weights.as_deref(),
                &a.sim,
            )?
            .evaluate(&y)?
        }
    };
    write_report(&outcome, stdout)?;
    if let Some(path) = &a.output {
        with_output(Some(path), stdout, |w| outcome.write_csv(w))?;
    }
    Ok(())
}

fn write_report(o: &TestOutcome, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "method={}", o.method)?;
    writeln!(out, "statistic={}", sig(o.statistic, 10))?;
    writeln!(out, "df={}", o.df)?;
    writeln!(out, "critical_value={}", sig(o.critical_value, 10))?;
    writeln!(out, "effective_alpha={}", sig(o.effective_alpha, 10))?;
    writeln!(out, "informal_p_value={}", sig(o.informal_p_value, 10))?;
    writeln!(out, "reject={}", o.reject)?;
    if o.level_warning {
        writeln!(
            out,
            "warning=simulated adjustment; the level may exceed alpha"
        )?;
    }
    Ok(())
}

fn run_weights(a: &WeightsArgs, stdout: &mut dyn Write) -> Result<()> {
    let (cone, cov) = load_cone(&a.cone)?;
    let mix = match exact_weights(&cone, &cov) {
        Some(mix) if !a.mc => mix,
        _ => {
            let (nsim, seed) = require_seed(&a.sim, "simulated weights")?;
            mc_weights(&cone, &cov, nsim, seed)?
        }
    };
    with_output(a.output.as_deref(), stdout, |w| mix.write_csv(w))
}

fn run_level(a: &LevelArgs, stdout: &mut dyn Write) -> Result<()> {
    check_alpha(a.alpha)?;
    let (cone, cov) = load_cone(&a.cone)?;
    let (nsim, seed) = require_seed(&a.sim, "level")?;
    let mu = match &a.mu {
        Some(text) => parse_mu(text)?,
        None => vec![0.0; cone.dim()],
    };
    let adj = match a.method {
        MethodArg::Mixture => AlphaAdjustment::none(),
        m => adjustment(a.adjust, m, &cone, &cov, &a.sim)?,
    };
    let test = prepare(
        a.method,
        &cone,
        &cov,
        a.alpha,
        adj,
        a.weights.as_deref(),
        &a.sim,
    )?;
    let est = sim::estimate_level(&test, &mu, nsim, seed)?;
    with_output(a.output.as_deref(), stdout, |w| {
        let mu: Vec<String> = est.mu.iter().map(|v| sig(*v, 10)).collect();
        writeln!(
            w,
            "# seed={seed} nsim={nsim} alpha={} family={} mu={}",
            sig(a.alpha, 10),
            cone.family(),
            mu.join(";")
        )?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "method",
            "rejections",
            "rate",
            "half_width",
            "effective_alpha",
        ])?;
        csv.write_record([
            test.method().to_string(),
            est.rejections.to_string(),
            sig(est.rate, 10),
            sig(est.half_width, 10),
            sig(test.effective_alpha(), 10),
        ])?;
        csv.flush()?;
        Ok(())
    })
}

fn run_power(a: &PowerArgs, stdout: &mut dyn Write) -> Result<()> {
    check_alpha(a.alpha)?;
    let (cone, cov) = load_cone(&a.cone)?;
    let (nsim, seed) = require_seed(&a.sim, "power")?;
    let param = MeanParam::for_cone(&cone).map_err(|_| {
        usage("power grids need a 2-dimensional cone or an isotonic cone with p = 3")
    })?;
    let default = Grid::default_for(param);
    let lo = a.grid_min.unwrap_or(default.xs[0]);
    let hi = a.grid_max.unwrap_or(default.xs[default.xs.len() - 1]);
    let grid = Grid::square(lo, hi, a.grid_n.unwrap_or(default.xs.len()));
    let adj = adjustment(a.adjust, MethodArg::Adaptive, &cone, &cov, &a.sim)?;
    let mix = mixture(&cone, &cov, a.weights.as_deref(), &a.sim)?;
    let setup = PowerSetup::new(&cone, &cov, a.alpha, adj, mix)?;
    let report = sim::power_grid_with(&setup, param, &grid, nsim, seed)?;
    with_output(a.output.as_deref(), stdout, |w| report.write_csv(w))
}

fn run_crossover(a: &CrossoverArgs, stdout: &mut dyn Write) -> Result<()> {
    check_alpha(a.alpha)?;
    let family = if a.orthant {
        ConeFamily::Orthant
    } else {
        ConeFamily::Isotonic
    };
    if a.pmin > a.pmax {
        return Err(usage("--pmin exceeds --pmax"));
    }
    if a.pmax > 200 {
        return Err(usage("--pmax is limited to 200"));
    }
    let pmin = match family {
        ConeFamily::Isotonic => a.pmin.max(2),
        _ => a.pmin.max(1),
    };
    let curve = sim::crossover_curve(family, pmin..=a.pmax, a.alpha)?;
    with_output(a.output.as_deref(), stdout, |w| curve.write_csv(w))
}
