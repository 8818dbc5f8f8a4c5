//! Command-line front end.
//!
//! Every command echoes its resolved arguments to `<command>.config.json` in the output
//! directory. Wall-clock details go to a `<command>.log` sidecar so that the numeric
//! artifacts of two identical runs compare equal byte for byte.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::baseline::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::check::{run_suite, Suite};
use crate::dataset::{fmt_f64, load_csv, parse_kinds, CsvSchema};
use crate::error::{Error, Result};
use crate::estimator::{predict, IsotonicEstimator, IsotonicFit};
use crate::evaluate::{
    compare_study, mape_pipeline, rate_experiment, write_json, BaselineOptions, EvalOptions,
    Measure, RateOptions, DEFAULT_COMPARE_NS,
};
use crate::grid::QueryGrid;
use crate::lattice::{build_lattice, occupancy, trim_to_data, LatticeSummary};
use crate::simulate::{
    design_stream, simulate_poisson_trend_with, DgpKind, IidParams, Noise, RegressionFn,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RECTISO_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "rectiso",
    version,
    about = "Rectangle-restricted multivariate isotonic regression"
)]
struct Cli {
    /// Flat `key = value` file of flags; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; defaults to all cores. Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory for outputs; relative output paths resolve against it.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a synthetic sample.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Fit lower, upper and midpoint surfaces on a grid.
    #[command(args_override_self = true)]
    Fit(FitArgs),
    /// Midpoint predictions at query points from a saved fit.
    #[command(args_override_self = true)]
    Predict(PredictArgs),
    /// In-sample MAPE of both estimators and the mean on a count series.
    #[command(args_override_self = true)]
    Eval(EvalArgs),
    /// Integrated L1 error across sample sizes and its log-log slope.
    #[command(args_override_self = true)]
    Rate(RateArgs),
    /// Midpoint estimator against the least-squares baseline on repeated paths.
    #[command(args_override_self = true)]
    Compare(CompareArgs),
    /// Seeded property suites; exits 2 on any violation.
    #[command(args_override_self = true)]
    Check(CheckArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Fit(_) => "fit",
            Command::Predict(_) => "predict",
            Command::Eval(_) => "eval",
            Command::Rate(_) => "rate",
            Command::Compare(_) => "compare",
            Command::Check(_) => "check",
        }
    }
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum Dgp {
    /// Poisson autoregression with a time trend.
    PoissonTrend,
    /// i.i.d. design on [0,1] (same as `iid --d 1`).
    #[value(name = "iid-1d")]
    Iid1d,
    /// i.i.d. design on [0,1]^d.
    Iid,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum FnChoice {
    Square,
    CoordSum,
    Step,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum MeasureChoice {
    Lebesgue,
    Nu,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum SuiteChoice {
    Sandwich,
    Isotonicity,
    Pava,
    LemmaA1,
    Occupancy,
    All,
}

#[derive(Args, Serialize, Debug)]
struct IidArgs {
    /// Dimension of the i.i.d. design.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Regression function.
    #[arg(long, value_enum, default_value_t = FnChoice::Square)]
    f: FnChoice,
    /// Standard deviation of the Gaussian noise.
    #[arg(long, default_value_t = 0.3)]
    noise_sd: f64,
}

impl IidArgs {
    fn kind(&self, dgp: Dgp) -> Result<DgpKind> {
        let d = match dgp {
            Dgp::PoissonTrend => return Ok(DgpKind::PoissonTrend),
            Dgp::Iid1d => 1,
            Dgp::Iid => self.d,
        };
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidArgument(
                "noise sd must be finite and nonnegative".into(),
            ));
        }
        let f = match self.f {
            FnChoice::Square => RegressionFn::Square,
            FnChoice::CoordSum => RegressionFn::CoordSum,
            FnChoice::Step => RegressionFn::Step,
        };
        let noise = if self.noise_sd == 0.0 {
            Noise::None
        } else {
            Noise::Gaussian { sd: self.noise_sd }
        };
        Ok(DgpKind::IidRegression(IidParams::new(d, f, noise)))
    }
}

#[derive(Args, Serialize, Debug)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Dgp::PoissonTrend)]
    dgp: Dgp,
    /// Sample size (number of regression rows).
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replicate index; together with `n` and the seed it selects the random stream.
    #[arg(long, default_value_t = 0)]
    replicate: u64,
    #[command(flatten)]
    iid: IidArgs,
    #[arg(short, long, default_value = "series.csv")]
    output: PathBuf,
}

#[derive(Args, Serialize, Debug)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "y")]
    response: String,
    /// Covariate columns, comma separated; default: all other columns.
    #[arg(long)]
    columns: Option<String>,
    /// Kind per covariate: d (discrete), c (continuous) or t (trend), comma separated.
    #[arg(long)]
    kinds: String,
    /// Equidistant grid points per dimension.
    #[arg(long, default_value_t = 21)]
    grid: usize,
    /// Keep the full grid instead of trimming it to the data.
    #[arg(long)]
    no_trim: bool,
    /// Constant of the box occupancy check.
    #[arg(long, default_value_t = 0.5)]
    occupancy_c: f64,
    #[arg(short, long, default_value = "fit.csv")]
    output: PathBuf,
    /// Lattice summary path; default: next to the fit, with extension `.lattice.json`.
    #[arg(long)]
    lattice: Option<PathBuf>,
}

#[derive(Args, Serialize, Debug)]
struct PredictArgs {
    /// Fit written by `fit`.
    #[arg(long)]
    fit: PathBuf,
    /// Query points; must contain the fit's covariate columns.
    #[arg(long)]
    input: PathBuf,
    #[arg(short, long, default_value = "predictions.csv")]
    output: PathBuf,
}

#[derive(Args, Serialize, Debug)]
struct BaselineArgs {
    /// Equidistant grid points per dimension.
    #[arg(long, default_value_t = 21)]
    grid: usize,
    /// Dykstra tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Dykstra sweep limit.
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
}

impl BaselineArgs {
    fn options(&self) -> BaselineOptions {
        BaselineOptions {
            grid_size: self.grid,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Args, Serialize, Debug)]
struct EvalArgs {
    /// CSV holding the series in one column.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "y")]
    column: String,
    #[command(flatten)]
    baseline: BaselineArgs,
    #[arg(short, long, default_value = "eval.json")]
    output: PathBuf,
}

#[derive(Args, Serialize, Debug)]
struct RateArgs {
    #[arg(long, value_enum, default_value_t = Dgp::Iid1d)]
    dgp: Dgp,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set)]
    ns: Vec<usize>,
    /// Replicates per sample size.
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluation points per box along smoothed dimensions.
    #[arg(long)]
    sub: Option<usize>,
    #[arg(long, value_enum)]
    measure: Option<MeasureChoice>,
    /// Levels of the lagged count to evaluate on, as `lo:hi` or a comma list.
    #[arg(long)]
    levels: Option<String>,
    #[command(flatten)]
    iid: IidArgs,
    #[arg(short, long, default_value = "rate.json")]
    output: PathBuf,
}

impl RateArgs {
    /// Fills unset options with the defaults of the chosen process.
    fn resolve(&mut self) {
        let poisson = self.dgp == Dgp::PoissonTrend;
        if self.ns.is_empty() {
            self.ns = if poisson {
                vec![250, 500, 1000, 2000, 4000]
            } else {
                (7..=13).map(|k| 1 << k).collect()
            };
        }
        self.reps.get_or_insert(if poisson { 30 } else { 50 });
        self.sub.get_or_insert(if poisson { 1 } else { 4 });
        self.measure.get_or_insert(if poisson {
            MeasureChoice::Nu
        } else {
            MeasureChoice::Lebesgue
        });
        if poisson && self.levels.is_none() {
            self.levels = Some("10:20".into());
        }
    }
}

#[derive(Args, Serialize, Debug)]
struct CompareArgs {
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set)]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    baseline: BaselineArgs,
    /// Report path; the per-replicate CSV goes next to it.
    #[arg(short, long, default_value = "compare.json")]
    output: PathBuf,
}

#[derive(Args, Serialize, Debug)]
struct CheckArgs {
    #[arg(long, value_enum, default_value_t = SuiteChoice::All)]
    suite: SuiteChoice,
    /// Cases per suite.
    #[arg(long, default_value_t = 100)]
    cases: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Corrupt the first fitted surface of each fit-based suite; the run must exit 2.
    #[arg(long)]
    inject_violation: bool,
    #[arg(short, long, default_value = "check.json")]
    output: PathBuf,
}

#[derive(Serialize)]
struct Echo<'a, T: Serialize> {
    command: &'a str,
    version: &'a str,
    args: &'a T,
}

/// Where a command's outputs go.
struct Ctx {
    out_dir: PathBuf,
}

impl Ctx {
    fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.out_dir.join(p)
        }
    }

    fn echo<T: Serialize>(&self, command: &str, args: &T) -> Result<()> {
        let echo = Echo {
            command,
            version: env!("CARGO_PKG_VERSION"),
            args,
        };
        write_json(&echo, self.out_dir.join(format!("{command}.config.json")))
    }
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match with_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USER;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USER } else { EXIT_OK };
        }
    };
    let started = unix_seconds();
    let name = cli.command.name();
    let ctx = Ctx {
        out_dir: cli.out_dir,
    };
    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let outcome = std::fs::create_dir_all(&ctx.out_dir)
        .map_err(|e| Error::io(&ctx.out_dir, e))
        .and_then(|_| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("cannot start {jobs} workers: {e}")))
        })
        .and_then(|pool| pool.install(|| dispatch(cli.command, &ctx)));
    let code = match &outcome {
        Ok(code) => *code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_invariant() {
                EXIT_INVARIANT
            } else {
                EXIT_USER
            }
        }
    };
    let log = format!(
        "command={name}\nstarted_unix={started}\nfinished_unix={}\njobs={jobs}\nexit={code}\n",
        unix_seconds()
    );
    if let Err(e) = std::fs::write(ctx.out_dir.join(format!("{name}.log")), log) {
        log::warn!("cannot write log sidecar: {e}");
    }
    code
}

fn unix_seconds() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

const VALUE_FLAGS: [&str; 3] = ["--config", "--jobs", "--out-dir"];

/// Splices the entries of `--config FILE` in right after the subcommand, so flags given
/// later on the command line override them.
fn with_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = argv
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut extra = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidArgument(format!(
                "{path}:{}: expected `key = value`",
                lineno + 1
            )));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key == "config" {
            return Err(Error::InvalidArgument(format!(
                "{path}: config files cannot nest"
            )));
        }
        match value {
            "true" => extra.push(format!("--{key}")),
            "false" => {}
            _ => {
                extra.push(format!("--{key}"));
                extra.push(value.to_string());
            }
        }
    }
    let mut i = 1;
    while i < strs.len() {
        let a = &strs[i];
        if VALUE_FLAGS.contains(&a.as_str()) {
            i += 2;
        } else if a.starts_with('-') {
            i += 1;
        } else {
            break;
        }
    }
    let mut out = argv;
    let at = (i + 1).min(out.len());
    out.splice(at..at, extra.into_iter().map(OsString::from));
    Ok(out)
}

fn dispatch(command: Command, ctx: &Ctx) -> Result<i32> {
    let name = command.name();
    match command {
        Command::Simulate(a) => {
            ctx.echo(name, &a)?;
            simulate(a, ctx)
        }
        Command::Fit(a) => {
            ctx.echo(name, &a)?;
            fit(a, ctx)
        }
        Command::Predict(a) => {
            ctx.echo(name, &a)?;
            predict_cmd(a, ctx)
        }
        Command::Eval(a) => {
            ctx.echo(name, &a)?;
            eval(a, ctx)
        }
        Command::Rate(mut a) => {
            a.resolve();
            ctx.echo(name, &a)?;
            rate(a, ctx)
        }
        Command::Compare(mut a) => {
            if a.ns.is_empty() {
                a.ns = DEFAULT_COMPARE_NS.to_vec();
            }
            ctx.echo(name, &a)?;
            compare(a, ctx)
        }
        Command::Check(a) => {
            ctx.echo(name, &a)?;
            check(a, ctx)
        }
    }
}

fn simulate(a: SimulateArgs, ctx: &Ctx) -> Result<i32> {
    let out = ctx.path(&a.output);
    match a.dgp {
        Dgp::PoissonTrend => {
            let mut rng = design_stream(a.seed, a.n, a.replicate);
            let path = simulate_poisson_trend_with(a.n, &mut rng)?;
            let mut w = csv::Writer::from_path(&out)?;
            w.write_record(["t", "y", "lambda"])?;
            for (t, (y, l)) in path.series.iter().zip(&path.intensities).enumerate() {
                w.write_record([t.to_string(), fmt_f64(*y), fmt_f64(*l)])?;
            }
            w.flush().map_err(|e| Error::io(&out, e))?;
        }
        dgp => {
            let data = a.iid.kind(dgp)?.sample(a.n, a.seed, a.replicate)?;
            data.write_csv(&out)?;
        }
    }
    println!("simulate: {} rows -> {}", a.n, out.display());
    Ok(EXIT_OK)
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.{ext}"))
}

fn fit(a: FitArgs, ctx: &Ctx) -> Result<i32> {
    let mut schema = CsvSchema::new(a.response.clone(), parse_kinds(&a.kinds)?);
    schema.covariates = a
        .columns
        .as_ref()
        .map(|c| c.split(',').map(|s| s.trim().to_string()).collect());
    let data = load_csv(&a.input, &schema)?;
    let full = QueryGrid::equidistant(&data, a.grid)?;
    let grid = if a.no_trim {
        full
    } else {
        trim_to_data(&full, &data)?.grid
    };
    let fit = IsotonicEstimator::new(&data)?.fit(&grid)?;
    let out = ctx.path(&a.output);
    fit.write_csv(&out, data.names())?;
    let lattice = build_lattice(&data)?;
    let occ = occupancy(&data, &lattice, a.occupancy_c)?;
    let summary = LatticeSummary::new(&lattice, &occ, a.occupancy_c);
    let lat_path = match &a.lattice {
        Some(p) => ctx.path(p),
        None => sibling(&out, "lattice.json"),
    };
    write_json(&summary, &lat_path)?;
    println!(
        "fit: {} grid points -> {}; lattice M = {}, occupancy passed = {} -> {}",
        fit.len(),
        out.display(),
        lattice.m,
        occ.passed,
        lat_path.display()
    );
    Ok(EXIT_OK)
}

fn predict_cmd(a: PredictArgs, ctx: &Ctx) -> Result<i32> {
    let (fit, names) = IsotonicFit::read_csv(&a.fit)?;
    let mut rdr = csv::Reader::from_path(&a.input)?;
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    let cols = names
        .iter()
        .map(|n| {
            header
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| Error::Schema(format!("query file lacks column `{n}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let out = ctx.path(&a.output);
    let mut w = csv::Writer::from_path(&out)?;
    let mut head = names.clone();
    head.push("mid".into());
    w.write_record(&head)?;
    let mut rows = 0;
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let x = cols
            .iter()
            .zip(&names)
            .map(|(&c, n)| {
                let s = rec.get(c).unwrap_or("").trim();
                s.parse::<f64>().map_err(|_| Error::Parse {
                    row: r + 1,
                    column: n.clone(),
                    value: s.to_string(),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut line: Vec<String> = x.iter().map(|v| fmt_f64(*v)).collect();
        line.push(fmt_f64(predict(&fit, &x)?));
        w.write_record(&line)?;
        rows += 1;
    }
    w.flush().map_err(|e| Error::io(&out, e))?;
    println!("predict: {rows} points -> {}", out.display());
    Ok(EXIT_OK)
}

fn read_series(path: &Path, column: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    let c = header
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::Schema(format!("{} lacks column `{column}`", path.display())))?;
    rdr.records()
        .enumerate()
        .map(|(r, rec)| {
            let rec = rec?;
            let s = rec.get(c).unwrap_or("").trim();
            s.parse::<f64>().map_err(|_| Error::Parse {
                row: r + 1,
                column: column.to_string(),
                value: s.to_string(),
            })
        })
        .collect()
}

fn eval(a: EvalArgs, ctx: &Ctx) -> Result<i32> {
    let series = read_series(&a.input, &a.column)?;
    let report = mape_pipeline(&series, &a.baseline.options())?;
    let out = ctx.path(&a.output);
    write_json(&report, &out)?;
    println!(
        "eval: MAPE mid {:.6}, baseline {:.6}, mean {:.6} -> {}",
        report.mape_mid,
        report.mape_baseline,
        report.mape_mean,
        out.display()
    );
    Ok(EXIT_OK)
}

fn parse_levels(s: &str) -> Result<Vec<f64>> {
    let bad = || {
        Error::InvalidArgument(format!(
            "cannot read levels `{s}`; use `lo:hi` or a comma list"
        ))
    };
    if let Some((lo, hi)) = s.split_once(':') {
        let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).map(|v| v as f64).collect());
    }
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

fn rate(a: RateArgs, ctx: &Ctx) -> Result<i32> {
    let kind = a.iid.kind(a.dgp)?;
    let d = match &kind {
        DgpKind::IidRegression(p) => p.d,
        _ => 2,
    };
    let measure = match a.measure.unwrap_or(MeasureChoice::Nu) {
        MeasureChoice::Lebesgue => Measure::Lebesgue,
        MeasureChoice::Nu => Measure::Nu,
    };
    let mut eval = EvalOptions::new(d, a.sub.unwrap_or(1), measure);
    if let Some(l) = &a.levels {
        if a.dgp != Dgp::PoissonTrend {
            return Err(Error::InvalidArgument(
                "levels apply to the lagged count only".into(),
            ));
        }
        eval.levels[0] = Some(parse_levels(l)?);
    }
    let opts = RateOptions {
        eval,
        reps: a.reps.unwrap_or(30),
        seed: a.seed,
    };
    let record = rate_experiment(&kind, &a.ns, &opts)?;
    let out = ctx.path(&a.output);
    write_json(&record, &out)?;
    let csv_path = sibling(&out, "csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["n", "replicate", "l1"])?;
    for row in &record.rows {
        for (r, v) in row.l1.iter().enumerate() {
            w.write_record([row.n.to_string(), r.to_string(), fmt_f64(*v)])?;
        }
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;
    println!(
        "rate: slope {:.4}, r2 {:.4} -> {}",
        record.rate.slope,
        record.rate.r2,
        out.display()
    );
    Ok(EXIT_OK)
}

fn compare(a: CompareArgs, ctx: &Ctx) -> Result<i32> {
    let report = compare_study(&a.ns, a.reps, a.seed, &a.baseline.options())?;
    let out = ctx.path(&a.output);
    report.write_json(&out)?;
    report.write_csv(sibling(&out, "csv"))?;
    for s in &report.summary {
        println!(
            "compare: n = {}: median L1 mid {:.4}, baseline {:.4}; wins {}/{}; sign test p = {:.4}",
            s.n, s.l1_mid.median, s.l1_baseline.median, s.wins, s.replicates, s.sign_test_p
        );
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CheckReport {
    seed: u64,
    cases: usize,
    inject_violation: bool,
    suites: Vec<crate::check::SuiteReport>,
}

fn check(a: CheckArgs, ctx: &Ctx) -> Result<i32> {
    let suites: Vec<Suite> = match a.suite {
        SuiteChoice::All => Suite::ALL.to_vec(),
        SuiteChoice::Sandwich => vec![Suite::Sandwich],
        SuiteChoice::Isotonicity => vec![Suite::Isotonicity],
        SuiteChoice::Pava => vec![Suite::Pava],
        SuiteChoice::LemmaA1 => vec![Suite::LemmaA1],
        SuiteChoice::Occupancy => vec![Suite::Occupancy],
    };
    if a.inject_violation && !suites.iter().any(|s| s.injectable()) {
        return Err(Error::InvalidArgument(
            "--inject-violation needs the sandwich, isotonicity or pava suite".into(),
        ));
    }
    let mut reports = Vec::new();
    for s in suites {
        let inject = a.inject_violation && s.injectable();
        let r = run_suite(s, a.cases, a.seed, inject)?;
        println!(
            "check {}: {}/{} {}",
            s.name(),
            r.passed,
            r.cases,
            if r.ok() { "pass" } else { "FAIL" }
        );
        for f in &r.failures {
            eprintln!("  {}: {f}", s.name());
        }
        reports.push(r);
    }
    let ok = reports.iter().all(|r| r.ok());
    write_json(
        &CheckReport {
            seed: a.seed,
            cases: a.cases,
            inject_violation: a.inject_violation,
            suites: reports,
        },
        ctx.path(&a.output),
    )?;
    Ok(if ok { EXIT_OK } else { EXIT_INVARIANT })
}
