//! Command-line pipeline for heavy-tailed return analysis.
//!
//! Subcommands mirror the analysis stages: `returns` extracts normalized
//! log-returns from a price CSV, `density` bins them, `fit` / `compare`
//! estimate the parametric families, `simulate` runs the Langevin models,
//! `stationary` solves for their stationary densities, and `reconcile`
//! reports the measured tail exponent of the naive product-form t pair.
//!
//! Conventions: data goes to `--output` (stdout when omitted), diagnostics
//! to stderr; exit status 0 on success, 2 for usage errors and missing
//! inputs, 1 for runtime failures. All commands are deterministic given
//! their arguments; `HEAVYTAIL_SEED` overrides the default seed when
//! `--seed` is not passed.

mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use heavytail::density::{estimate_density, log_density_points, DensitySpec, RangeSpec};
use heavytail::distributions::{
    compare_fits, fit_gaussian, fit_student_t, ks_statistic, pdf, q_of_nu, DistParams, FitResult,
};
use heavytail::fokker_planck::{stationary_density, Grid};
use heavytail::sde::{reconcile_naive_t, simulate_thinned, GFamily, SdeSpec};
use heavytail::timeseries::{
    load_prices, log_returns, normalize, resample, volatility, NormalizeMode, TimeFormat,
    TimeseriesError,
};

use io::{Output, ReportValue};

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "heavytail",
    about = "Log-return extraction, heavy-tailed distribution fitting, and Langevin/Fokker-Planck cross-validation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract log-returns from a price CSV (load, resample, normalize)
    Returns(ReturnsArgs),
    /// Bin a returns file into a normalized density (log10 plot points)
    Density(DensityArgs),
    /// Fit one parametric family to a returns file
    Fit(FitArgs),
    /// Fit Gaussian and Student-t, report both with goodness of fit
    Compare(CompareArgs),
    /// Simulate a Langevin model by Euler-Maruyama
    Simulate(SimulateArgs),
    /// Stationary density of a Langevin model by quadrature
    Stationary(StationaryArgs),
    /// Measure the stationary tail exponent of the naive product-form t pair
    Reconcile(ReconcileArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TimeFormatArg {
    Epoch,
    Iso8601,
}

#[derive(Args)]
struct ReturnsArgs {
    /// Input price CSV (timestamp,price)
    #[arg(long, short = 'i')]
    input: PathBuf,
    /// Output returns file (stdout when omitted)
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    /// Bar interval in seconds
    #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u64).range(1..))]
    interval: u64,
    /// Normalization: "unit", "raw", or "ref:<vol>"
    #[arg(long, default_value = "unit", value_parser = parse_normalize)]
    normalize: NormalizeArg,
    /// Timestamp format of the input
    #[arg(long, value_enum, default_value_t = TimeFormatArg::Epoch)]
    time_format: TimeFormatArg,
    /// Instrument name override (defaults to the input file stem)
    #[arg(long)]
    instrument: Option<String>,
}

#[derive(Clone, Copy)]
enum NormalizeArg {
    Raw,
    Unit,
    Reference(f64),
}

fn parse_normalize(s: &str) -> Result<NormalizeArg, String> {
    match s {
        "raw" => Ok(NormalizeArg::Raw),
        "unit" => Ok(NormalizeArg::Unit),
        _ => {
            let vol = s
                .strip_prefix("ref:")
                .ok_or_else(|| format!("expected 'unit', 'raw' or 'ref:<vol>', got '{s}'"))?
                .parse::<f64>()
                .map_err(|_| format!("bad reference volatility in '{s}'"))?;
            if !(vol.is_finite() && vol > 0.0) {
                return Err(format!("reference volatility must be positive, got {vol}"));
            }
            Ok(NormalizeArg::Reference(vol))
        }
    }
}

#[derive(Clone, Copy)]
enum RangeArg {
    Auto,
    Explicit(f64, f64),
}

fn parse_range(s: &str) -> Result<RangeArg, String> {
    if s == "auto" {
        return Ok(RangeArg::Auto);
    }
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected 'auto' or '<lo>,<hi>', got '{s}'"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad range bound '{lo}'"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad range bound '{hi}'"))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("range must satisfy lo < hi, got {lo},{hi}"));
    }
    Ok(RangeArg::Explicit(lo, hi))
}

impl From<RangeArg> for RangeSpec {
    fn from(r: RangeArg) -> Self {
        match r {
            RangeArg::Auto => RangeSpec::Auto,
            RangeArg::Explicit(lo, hi) => RangeSpec::Explicit { lo, hi },
        }
    }
}

#[derive(Args)]
struct DensityArgs {
    /// Input returns file
    #[arg(long, short = 'i')]
    input: PathBuf,
    /// Output plot data (stdout when omitted)
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    /// Number of bins
    #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u64).range(1..))]
    bins: u64,
    /// Bin range: "auto" (+-8 sigma) or "<lo>,<hi>"
    #[arg(long, default_value = "auto", value_parser = parse_range, allow_hyphen_values = true)]
    range: RangeArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    StudentT,
    Gaussian,
}

#[derive(Args)]
struct FitArgs {
    /// Input returns file
    #[arg(long, short = 'i')]
    input: PathBuf,
    /// Output report (stdout when omitted)
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    /// Family to fit
    #[arg(long, value_enum, default_value_t = FamilyArg::StudentT)]
    family: FamilyArg,
}

#[derive(Args)]
struct CompareArgs {
    /// Input returns file
    #[arg(long, short = 'i')]
    input: PathBuf,
    /// Output report (stdout when omitted)
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    /// Also write a three-block plot file (empirical density, Student-t
    /// curve, Gaussian curve, all as x vs log10 p)
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Number of bins for the empirical density
    #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u64).range(1..))]
    bins: u64,
    /// Bin range: "auto" (+-8 sigma) or "<lo>,<hi>"
    #[arg(long, default_value = "auto", value_parser = parse_range, allow_hyphen_values = true)]
    range: RangeArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    CaseGaussian,
    CaseLambda,
    NaiveT,
    CanonicalT,
}

#[derive(Clone, Copy, ValueEnum)]
enum GFamilyArg {
    Rational,
    SqrtRational,
}

#[derive(Args)]
struct ModelOpts {
    /// Drift/diffusion model
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Tail parameter nu (required by all models except case-gaussian)
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
    /// Drift prefactor lambda (case-lambda only)
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Diffusion family for case-lambda
    #[arg(long, value_enum, default_value_t = GFamilyArg::SqrtRational)]
    g_family: GFamilyArg,
    /// Noise strength D
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    d: f64,
}

impl ModelOpts {
    fn build(&self) -> Result<SdeSpec, CliError> {
        let need_nu = || {
            self.nu
                .ok_or_else(|| CliError::usage("--nu is required for this model"))
        };
        let spec = match self.model {
            ModelArg::CaseGaussian => SdeSpec::case_gaussian(self.d),
            ModelArg::CaseLambda => {
                let lambda = self
                    .lambda
                    .ok_or_else(|| CliError::usage("--lambda is required for case-lambda"))?;
                let nu = need_nu()?;
                let g = match self.g_family {
                    GFamilyArg::Rational => GFamily::Rational { nu },
                    GFamilyArg::SqrtRational => GFamily::SqrtRational { nu },
                };
                SdeSpec::case_lambda(lambda, g, self.d)
            }
            ModelArg::NaiveT => SdeSpec::case_naive_t(need_nu()?, self.d),
            ModelArg::CanonicalT => SdeSpec::canonical_t(need_nu()?, self.d),
        };
        spec.map_err(|e| CliError::usage(e.to_string()))
    }

    fn describe(&self) -> String {
        let name = match self.model {
            ModelArg::CaseGaussian => "case-gaussian",
            ModelArg::CaseLambda => "case-lambda",
            ModelArg::NaiveT => "naive-t",
            ModelArg::CanonicalT => "canonical-t",
        };
        let mut s = format!("model: {name}, d: {}", self.d);
        if let Some(nu) = self.nu {
            s.push_str(&format!(", nu: {nu}"));
        }
        if let Some(lambda) = self.lambda {
            s.push_str(&format!(", lambda: {lambda}"));
        }
        s
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelOpts,
    /// Integration step
    #[arg(long, default_value_t = 1e-3, allow_hyphen_values = true)]
    dt: f64,
    /// Retained steps per path (accepts scientific notation, e.g. 2e6)
    #[arg(long, default_value = "1e6", value_parser = parse_count)]
    steps: u64,
    /// Burn-in steps discarded before recording
    #[arg(long, default_value = "1e5", value_parser = parse_count_zero)]
    burn_in: u64,
    /// Record every k-th step (decorrelates the retained sample)
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    thin: u64,
    /// Seed (default: HEAVYTAIL_SEED env var, else 42)
    #[arg(long)]
    seed: Option<u64>,
    /// Initial state
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    x0: f64,
    /// Number of independent paths (seeds seed, seed+1, ...), concatenated
    /// in seed order
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    paths: u64,
    /// Output path values, one per line (stdout when omitted)
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    /// Also write a synthetic price CSV (values treated as log-returns)
    #[arg(long)]
    emit_prices: Option<PathBuf>,
    /// Bar interval for the synthetic price CSV
    #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u64).range(1..))]
    price_interval: u64,
    /// Starting price for the synthetic price CSV
    #[arg(long, default_value_t = 100.0)]
    price_start: f64,
    /// Volatility the emitted returns are rescaled to before exponentiating
    /// (stationary path values are O(1); bar returns are not)
    #[arg(long, default_value_t = 1e-3)]
    price_vol: f64,
}

fn parse_count(s: &str) -> Result<u64, String> {
    let v: f64 = s.parse().map_err(|_| format!("bad count '{s}'"))?;
    if !((1.0..=9e15).contains(&v) && v.fract() == 0.0) {
        return Err(format!("count must be a positive integer, got '{s}'"));
    }
    Ok(v as u64)
}

fn parse_count_zero(s: &str) -> Result<u64, String> {
    let v: f64 = s.parse().map_err(|_| format!("bad count '{s}'"))?;
    if !((0.0..=9e15).contains(&v) && v.fract() == 0.0) {
        return Err(format!("count must be a non-negative integer, got '{s}'"));
    }
    Ok(v as u64)
}

#[derive(Args)]
struct GridOpts {
    #[arg(long, default_value_t = -8.0, allow_hyphen_values = true)]
    grid_lo: f64,
    #[arg(long, default_value_t = 8.0, allow_hyphen_values = true)]
    grid_hi: f64,
    #[arg(long, default_value_t = 2001, value_parser = clap::value_parser!(u64).range(3..))]
    grid_n: u64,
}

impl GridOpts {
    fn build(&self) -> Result<Grid, CliError> {
        Grid::new(self.grid_lo, self.grid_hi, self.grid_n as usize)
            .map_err(|e| CliError::usage(e.to_string()))
    }
}

#[derive(Args)]
struct StationaryArgs {
    #[command(flatten)]
    model: ModelOpts,
    #[command(flatten)]
    grid: GridOpts,
    /// Output two-column density data (stdout when omitted)
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReconcileArgs {
    /// Tail parameter of the naive product-form t pair
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    nu: f64,
    /// Noise strength D
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    d: f64,
    #[command(flatten)]
    grid: GridOpts,
    /// Output report (stdout when omitted)
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

/// Errors carrying their exit status: 2 for usage problems and missing
/// inputs, 1 for runtime failures.
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn runtime(msg: impl ToString) -> Self {
        CliError::Runtime(msg.to_string())
    }

    /// Missing input files are usage errors (exit 2) so scripts can tell
    /// them apart from computation failures.
    fn usage_if_missing(path: &std::path::Path) -> impl Fn(String) -> CliError + '_ {
        move |msg: String| {
            if path.exists() {
                CliError::Runtime(msg)
            } else {
                CliError::Usage(msg)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Returns(args) => cmd_returns(args),
        Command::Density(args) => cmd_density(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Stationary(args) => cmd_stationary(args),
        Command::Reconcile(args) => cmd_reconcile(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn default_seed() -> u64 {
    std::env::var("HEAVYTAIL_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

fn map_ts_error(e: TimeseriesError) -> CliError {
    match &e {
        TimeseriesError::Open { .. } => CliError::usage(e.to_string()),
        _ => CliError::runtime(e),
    }
}

fn cmd_returns(args: ReturnsArgs) -> Result<(), CliError> {
    let format = match args.time_format {
        TimeFormatArg::Epoch => TimeFormat::EpochSeconds,
        TimeFormatArg::Iso8601 => TimeFormat::Iso8601,
    };
    let mut prices = load_prices(&args.input, format).map_err(map_ts_error)?;
    if let Some(name) = args.instrument {
        prices.instrument = name;
    }
    let resampled = resample(&prices, args.interval).map_err(CliError::runtime)?;
    let raw = log_returns(&resampled).map_err(CliError::runtime)?;
    let raw_volatility = volatility(&raw).unwrap_or(0.0);
    let out_series = match args.normalize {
        NormalizeArg::Raw => raw,
        NormalizeArg::Unit => {
            normalize(&raw, NormalizeMode::UnitVariance).map_err(CliError::runtime)?
        }
        NormalizeArg::Reference(vol) => {
            normalize(&raw, NormalizeMode::ReferenceScaled(vol)).map_err(CliError::runtime)?
        }
    };
    let output = Output::from_option(args.output);
    let mut w = output.writer().map_err(CliError::runtime)?;
    io::write_returns(&mut w, &out_series, raw_volatility).map_err(CliError::runtime)?;
    eprintln!(
        "wrote {} returns ({}s bars) to {}",
        out_series.values.len(),
        out_series.interval_seconds,
        output.describe()
    );
    Ok(())
}

fn cmd_density(args: DensityArgs) -> Result<(), CliError> {
    let returns =
        io::read_returns(&args.input).map_err(CliError::usage_if_missing(&args.input))?;
    let spec = DensitySpec {
        n_bins: args.bins as usize,
        range: args.range.into(),
    };
    let density = estimate_density(&returns, spec).map_err(CliError::runtime)?;
    let points = log_density_points(&density);
    let output = Output::from_option(args.output);
    let mut w = output.writer().map_err(CliError::runtime)?;
    use std::io::Write;
    (|| -> std::io::Result<()> {
        writeln!(w, "# instrument: {}", returns.instrument)?;
        writeln!(w, "# samples: {}", density.total_count)?;
        writeln!(w, "# out_of_range: {}", density.out_of_range)?;
        writeln!(w, "# integral: {}", density.integral())?;
        io::write_block_header(&mut w, "empirical log10 density")?;
        io::write_xy(&mut w, &points)
    })()
    .map_err(CliError::runtime)
}

fn fit_report_pairs<'a>(fit: &FitResult, ks: f64) -> Vec<(&'a str, ReportValue)> {
    let mut pairs: Vec<(&str, ReportValue)> = vec![("n", (fit.n as u64).into())];
    match fit.params {
        DistParams::Gaussian(p) => {
            pairs.push(("family", "gaussian".into()));
            pairs.push(("d_hat", p.d.into()));
        }
        DistParams::StudentT(p) => {
            pairs.push(("family", "student_t".into()));
            pairs.push(("nu_hat", p.nu.into()));
            pairs.push(("scale_hat", p.scale.into()));
            pairs.push(("q_hat", q_of_nu(p.nu).expect("nu in range").into()));
        }
        DistParams::QExponential(p) => {
            pairs.push(("family", "q_exponential".into()));
            pairs.push(("q_hat", p.q.into()));
            pairs.push(("scale_hat", p.scale.into()));
        }
    }
    pairs.push(("log_likelihood", fit.log_likelihood.into()));
    pairs.push(("ks", ks.into()));
    pairs.push(("converged", fit.converged.into()));
    pairs.push(("iterations", (fit.iterations as u64).into()));
    pairs
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let returns =
        io::read_returns(&args.input).map_err(CliError::usage_if_missing(&args.input))?;
    let fit = match args.family {
        FamilyArg::StudentT => fit_student_t(&returns).map_err(CliError::runtime)?,
        FamilyArg::Gaussian => fit_gaussian(&returns).map_err(CliError::runtime)?,
    };
    let ks = ks_statistic(&returns, &fit.params).map_err(CliError::runtime)?;
    let output = Output::from_option(args.output);
    let mut w = output.writer().map_err(CliError::runtime)?;
    io::write_report(&mut w, &fit_report_pairs(&fit, ks)).map_err(CliError::runtime)
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let returns =
        io::read_returns(&args.input).map_err(CliError::usage_if_missing(&args.input))?;
    let report = compare_fits(&returns).map_err(CliError::runtime)?;
    let (nu_hat, scale_hat) = match report.student_t.fit.params {
        DistParams::StudentT(p) => (p.nu, p.scale),
        _ => unreachable!("student_t fit carries student-t params"),
    };
    let d_hat = match report.gaussian.fit.params {
        DistParams::Gaussian(p) => p.d,
        _ => unreachable!("gaussian fit carries gaussian params"),
    };

    if let Some(plot_path) = &args.plot {
        let spec = DensitySpec {
            n_bins: args.bins as usize,
            range: args.range.into(),
        };
        let density = estimate_density(&returns, spec).map_err(CliError::runtime)?;
        let empirical = log_density_points(&density);
        let centers = density.bin_centers();
        let t_curve: Vec<(f64, f64)> = centers
            .iter()
            .map(|&x| (x, pdf(x, &report.student_t.fit.params).log10()))
            .collect();
        let g_curve: Vec<(f64, f64)> = centers
            .iter()
            .map(|&x| (x, pdf(x, &report.gaussian.fit.params).log10()))
            .collect();
        let mut w = Output::File(plot_path.clone())
            .writer()
            .map_err(CliError::runtime)?;
        use std::io::Write;
        (|| -> std::io::Result<()> {
            io::write_block_header(&mut w, "empirical log10 density")?;
            io::write_xy(&mut w, &empirical)?;
            writeln!(w)?;
            io::write_block_header(&mut w, &format!("student-t fit (nu = {nu_hat:.4})"))?;
            io::write_xy(&mut w, &t_curve)?;
            writeln!(w)?;
            io::write_block_header(&mut w, &format!("gaussian fit (D = {d_hat:.4})"))?;
            io::write_xy(&mut w, &g_curve)
        })()
        .map_err(CliError::runtime)?;
    }

    let preferred = format!("{}", report.preferred);
    let pairs: Vec<(&str, ReportValue)> = vec![
        ("n", (report.student_t.fit.n as u64).into()),
        ("interval_seconds", returns.interval_seconds.into()),
        ("preferred", preferred.as_str().into()),
        ("nu_hat", nu_hat.into()),
        ("scale_hat", scale_hat.into()),
        ("q_hat", q_of_nu(nu_hat).expect("nu in range").into()),
        ("d_hat", d_hat.into()),
        ("loglik_student_t", report.student_t.fit.log_likelihood.into()),
        ("loglik_gaussian", report.gaussian.fit.log_likelihood.into()),
        ("ks_student_t", report.student_t.ks.into()),
        ("ks_gaussian", report.gaussian.ks.into()),
        ("converged_student_t", report.student_t.fit.converged.into()),
        (
            "iterations_student_t",
            (report.student_t.fit.iterations as u64).into(),
        ),
    ];
    let output = Output::from_option(args.output);
    let mut w = output.writer().map_err(CliError::runtime)?;
    io::write_report(&mut w, &pairs).map_err(CliError::runtime)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let spec = args.model.build()?;
    if !(args.dt.is_finite() && args.dt > 0.0) {
        return Err(CliError::usage(format!("--dt must be positive, got {}", args.dt)));
    }
    if !args.x0.is_finite() {
        return Err(CliError::usage(format!("--x0 must be finite, got {}", args.x0)));
    }
    let seed = args.seed.unwrap_or_else(default_seed);
    let mut values = Vec::with_capacity((args.paths * args.steps) as usize);
    for k in 0..args.paths {
        let path = simulate_thinned(
            &spec,
            args.x0,
            args.dt,
            args.steps as usize,
            args.burn_in as usize,
            args.thin as usize,
            seed + k,
        )
        .map_err(CliError::runtime)?;
        values.extend_from_slice(&path.values);
    }

    let output = Output::from_option(args.output);
    let mut w = output.writer().map_err(CliError::runtime)?;
    use std::io::Write;
    (|| -> std::io::Result<()> {
        writeln!(w, "# {}", args.model.describe())?;
        writeln!(
            w,
            "# dt: {}, steps: {}, burn_in: {}, thin: {}, seed: {}, paths: {}",
            args.dt, args.steps, args.burn_in, args.thin, seed, args.paths
        )?;
        for v in &values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    })()
    .map_err(CliError::runtime)?;
    drop(w);

    if let Some(price_path) = &args.emit_prices {
        if !(args.price_vol.is_finite() && args.price_vol > 0.0) {
            return Err(CliError::usage(format!(
                "--price-vol must be positive, got {}",
                args.price_vol
            )));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (n - 1.0).max(1.0))
        .sqrt();
        if sd == 0.0 {
            return Err(CliError::runtime(
                "cannot emit prices: simulated values have zero variance",
            ));
        }
        let scale = args.price_vol / sd;
        let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
        let mut w = Output::File(price_path.clone())
            .writer()
            .map_err(CliError::runtime)?;
        io::write_prices_from_returns(&mut w, &scaled, args.price_interval, args.price_start)
            .map_err(CliError::runtime)?;
        eprintln!(
            "wrote {} synthetic prices to {}",
            scaled.len() + 1,
            price_path.display()
        );
    }
    Ok(())
}

fn cmd_stationary(args: StationaryArgs) -> Result<(), CliError> {
    let spec = args.model.build()?;
    let grid = args.grid.build()?;
    let density = stationary_density(&spec, &grid).map_err(CliError::runtime)?;
    let output = Output::from_option(args.output);
    let mut w = output.writer().map_err(CliError::runtime)?;
    use std::io::Write;
    (|| -> std::io::Result<()> {
        writeln!(w, "# {}", args.model.describe())?;
        io::write_block_header(&mut w, "stationary density")?;
        let points: Vec<(f64, f64)> = density
            .values()
            .iter()
            .enumerate()
            .map(|(i, &p)| (grid.node(i), p))
            .collect();
        io::write_xy(&mut w, &points)
    })()
    .map_err(CliError::runtime)
}

fn cmd_reconcile(args: ReconcileArgs) -> Result<(), CliError> {
    let grid = args.grid.build()?;
    let report = reconcile_naive_t(args.nu, args.d, &grid).map_err(CliError::runtime)?;
    let pairs: Vec<(&str, ReportValue)> = vec![
        ("nu", args.nu.into()),
        ("d", args.d.into()),
        ("exponent_measured", report.exponent_measured.into()),
        ("exponent_claimed", report.exponent_claimed.into()),
        ("agrees", report.agrees.into()),
    ];
    let output = Output::from_option(args.output);
    let mut w = output.writer().map_err(CliError::runtime)?;
    io::write_report(&mut w, &pairs).map_err(CliError::runtime)
}
