//! Command-line front end: `generate`, `fit`, `bench` and `lb-demo`.
//!
//! Every command is deterministic for fixed flags and seed. The environment
//! variable `ROBREG_SEED` overrides `--seed`. Failures print a JSON object
//! with an `error` field to stderr and give a nonzero exit code.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::adversary::{corrupt, AdversaryKind, AdversarySpec};
use crate::datagen::{generate, random_unit, Family, GenerativeSpec};
use crate::dataset::{Dataset, GroundTruth};
use crate::error::{Error, Result};
use crate::linalg::median;
use crate::lower_bound::{self, LowerBoundCase, LowerBoundPair};
use crate::regress::{fit_ht, fit_ols, FitReport, HtConfig};
use crate::rng::{derive_seed, substream};
use crate::subgauss::{fit_sg, SgConfig};

pub const SEED_ENV: &str = "ROBREG_SEED";

#[derive(Debug, Parser)]
#[command(name = "robreg", version, about = "Robust linear regression under adversarial corruption")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a dataset, corrupt it, and write the CSV plus a truth sidecar.
    Generate(GenerateArgs),
    /// Fit one dataset and write a JSON report.
    Fit(FitArgs),
    /// Sweep corruption levels and sample sizes; long-form CSV plus summary.
    Bench(BenchArgs),
    /// Print a lower-bound pair with its exact TV distance and gap.
    LbDemo(LbDemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Ht,
    Sg,
    Ols,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Ht => "ht",
            Algo::Sg => "sg",
            Algo::Ols => "ols",
        }
    }
}

/// Data-generation flags shared by `generate` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[arg(long, value_enum, default_value = "gaussian-identity")]
    pub family: Family,
    #[arg(long, default_value_t = 10)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Condition number of the geometric spectrum (gaussian-with-spectrum).
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Degrees of freedom (student-t).
    #[arg(long, default_value_t = 5.0)]
    pub dof: f64,
    /// `‖w*‖`; the direction is drawn from the seed.
    #[arg(long, default_value_t = 1.0)]
    pub w_norm: f64,
    #[arg(long, value_enum, default_value = "mean-shift")]
    pub adversary: AdversaryKind,
    #[arg(long, default_value_t = 10.0)]
    pub magnitude: f64,
    /// Let the adversary choose which samples to replace.
    #[arg(long)]
    pub inspecting: bool,
}

impl DataArgs {
    fn spec(&self, seed: u64) -> Result<GenerativeSpec> {
        if self.d == 0 {
            return Err(Error::invalid("d must be positive"));
        }
        if !(self.w_norm >= 0.0 && self.w_norm.is_finite()) {
            return Err(Error::invalid("w-norm must be finite and nonnegative"));
        }
        let mut rng = substream(seed, u64::MAX - 1);
        let w_star: Vec<f64> = random_unit(self.d, &mut rng).iter().map(|v| v * self.w_norm).collect();
        let mut spec = GenerativeSpec::new(self.family, w_star, self.sigma);
        match self.family {
            Family::GaussianWithSpectrum => {
                spec.spectrum = Some(GenerativeSpec::geometric_spectrum(self.d, self.kappa));
            }
            Family::StudentT => spec.dof = Some(self.dof),
            _ => {}
        }
        spec.validate()?;
        Ok(spec)
    }

    fn adversary(&self, eta: f64) -> AdversarySpec {
        let kind = if eta == 0.0 { AdversaryKind::Idle } else { self.adversary };
        let mut adv = AdversarySpec::new(kind, eta, self.magnitude);
        adv.inspecting = self.inspecting;
        adv
    }

    /// Clean sample from `seed`, corrupted with `derive_seed(seed, 1)`.
    pub fn sample(&self, n: usize, eta: f64, seed: u64) -> Result<Dataset> {
        let spec = self.spec(seed)?;
        let clean = generate(&spec, n, seed)?;
        corrupt(&clean, &self.adversary(eta), derive_seed(seed, 1))
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "data.csv")]
    pub out: PathBuf,
    #[arg(long, default_value = "truth.json")]
    pub truth: PathBuf,
}

/// Estimator flags shared by `fit` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct FitFlags {
    /// Noise level hint; MAD of the responses when absent.
    #[arg(long = "sigma-hint")]
    pub sigma_hint: Option<f64>,
    /// Condition number hint; 1 when absent.
    #[arg(long = "kappa-hint")]
    pub kappa_hint: Option<f64>,
    /// `‖w*‖` hint; trimmed OLS when absent.
    #[arg(long = "w-norm-hint")]
    pub w_norm_hint: Option<f64>,
    /// Fixed iteration count instead of the contraction-based one.
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub auto_rescale: bool,
}

impl FitFlags {
    fn ht_config(&self, eta: f64, seed: u64) -> HtConfig {
        let mut cfg = HtConfig::new(eta).with_seed(seed);
        cfg.sigma_hint = self.sigma_hint;
        cfg.w_norm_hint = self.w_norm_hint;
        cfg.kappa_hint = self.kappa_hint.unwrap_or(1.0);
        cfg.t_override = self.iterations;
        cfg.restarts = self.restarts;
        cfg.auto_rescale = self.auto_rescale;
        cfg
    }

    pub fn fit(&self, algo: Algo, data: &Dataset, eta: Option<f64>, seed: u64) -> Result<FitReport> {
        let need_eta = || eta.ok_or_else(|| Error::invalid(format!("--eta is required for {}", algo.name())));
        let mut report = match algo {
            Algo::Ols => fit_ols(data)?,
            Algo::Ht => fit_ht(data, &self.ht_config(need_eta()?, seed))?,
            Algo::Sg => {
                let eta = need_eta()?;
                let mut cfg = SgConfig::new(eta).with_seed(seed);
                cfg.sigma_hint = self.sigma_hint;
                cfg.ht = self.ht_config(eta, seed);
                fit_sg(data, &cfg)?
            }
        };
        if algo != Algo::Ols && self.kappa_hint.is_none() {
            report.hints_defaulted.push("kappa".into());
        }
        Ok(report)
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Alias for `--sigma-hint`.
    #[arg(long, conflicts_with = "sigma_hint")]
    pub sigma: Option<f64>,
    /// Alias for `--kappa-hint`.
    #[arg(long, conflicts_with = "kappa_hint")]
    pub kappa: Option<f64>,
    #[command(flatten)]
    pub flags: FitFlags,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value = "report.json")]
    pub report: PathBuf,
    /// Keep the per-iteration trace in the report.
    #[arg(long)]
    pub trace: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ht")]
    pub algo: Vec<Algo>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub eta: Vec<f64>,
    /// Sample sizes; `⌈20 d ln d / η⌉` per η when absent.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub flags: FitFlags,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "bench.csv")]
    pub out: PathBuf,
    /// Summary JSON path; stdout when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    Ht,
    Sg,
    Cond,
}

#[derive(Debug, Args)]
pub struct LbDemoArgs {
    #[arg(long, value_enum)]
    pub case: CaseArg,
    #[arg(long)]
    pub eta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Also write the JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `ROBREG_SEED` when set, else the flag.
pub fn effective_seed(flag: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

fn distinct_paths(paths: &[&Path]) -> Result<()> {
    for (i, a) in paths.iter().enumerate() {
        if paths[..i].contains(a) {
            return Err(Error::invalid(format!("path {} is used twice", a.display())));
        }
    }
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn print_json(value: &impl Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<GroundTruth> {
    distinct_paths(&[&args.out, &args.truth])?;
    let seed = effective_seed(args.seed)?;
    let data = args.data.sample(args.n, args.eta, seed)?;
    let truth = data.truth.clone().ok_or_else(|| Error::invalid("generated data has no truth"))?;
    data.save_csv(&args.out)?;
    truth.save_json(&args.truth)?;
    Ok(truth)
}

pub fn cmd_fit(args: &FitArgs) -> Result<FitReport> {
    let mut paths = vec![args.input.as_path(), args.report.as_path()];
    if let Some(t) = &args.truth {
        paths.push(t);
    }
    distinct_paths(&paths)?;
    let seed = effective_seed(args.seed)?;
    let mut data = Dataset::load_csv(&args.input)?;
    if let Some(t) = &args.truth {
        data = data.with_truth(GroundTruth::load_json(t)?)?;
    }
    let mut flags = args.flags.clone();
    flags.sigma_hint = flags.sigma_hint.or(args.sigma);
    flags.kappa_hint = flags.kappa_hint.or(args.kappa);
    let mut report = flags.fit(args.algo, &data, args.eta, seed)?;
    if !args.trace {
        report.trace.clear();
    }
    write_json(&args.report, &report)?;
    Ok(report)
}

/// One line of the bench CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub algo: Algo,
    pub eta: f64,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub error: Option<f64>,
    pub seconds: Option<f64>,
    /// Failure message; empty on success.
    pub failure: String,
    #[serde(skip)]
    rep: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub algo: Algo,
    pub eta: f64,
    pub n: usize,
    pub ok: usize,
    pub failed: usize,
    pub median_error: Option<f64>,
    pub median_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slope {
    pub algo: Algo,
    /// `eta` (error against η at fixed n rule) or `n` (time against n).
    pub against: String,
    /// Fixed n for error slopes with explicit sizes, fixed η for time slopes.
    pub at: Option<f64>,
    pub points: usize,
    pub slope: f64,
    /// Largest over smallest median, in the order of the swept variable.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub groups: Vec<GroupSummary>,
    pub error_slopes: Vec<Slope>,
    pub time_slopes: Vec<Slope>,
    pub failures: usize,
}

/// `⌈20 d ln d / η⌉`, with `ln 2` standing in for `d = 1`.
pub fn default_n(d: usize, eta: f64) -> usize {
    (20.0 * d as f64 * (d.max(2) as f64).ln() / eta).ceil() as usize
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn run_bench(args: &BenchArgs) -> Result<(Vec<BenchRow>, BenchSummary)> {
    if args.reps == 0 {
        return Err(Error::invalid("reps must be at least 1"));
    }
    if args.algo.is_empty() {
        return Err(Error::invalid("no algorithms requested"));
    }
    for &eta in &args.eta {
        if !(eta > 0.0 && eta < 1.0 / 3.0) {
            return Err(Error::invalid(format!("eta {eta} outside (0, 1/3)")));
        }
    }
    let master = effective_seed(args.seed)?;
    let mut algos = args.algo.clone();
    algos.sort();
    algos.dedup();

    let mut cells = Vec::new();
    for &eta in &args.eta {
        let ns = if args.n.is_empty() {
            vec![default_n(args.data.d, eta)]
        } else {
            args.n.clone()
        };
        for n in ns {
            for rep in 0..args.reps {
                cells.push((eta, n, rep));
            }
        }
    }
    let mut rows: Vec<BenchRow> = cells
        .par_iter()
        .flat_map_iter(|&(eta, n, rep)| {
            let seed = derive_seed(master, rep as u64);
            let data = args.data.sample(n, eta, seed);
            algos
                .iter()
                .map(|&algo| {
                    let fit = data
                        .as_ref()
                        .map_err(|e| e.to_string())
                        .and_then(|ds| args.flags.fit(algo, ds, Some(eta), derive_seed(seed, 2)).map_err(|e| e.to_string()));
                    let (error, seconds, failure) = match fit {
                        Ok(r) => (r.error_vs_truth, Some(r.seconds), String::new()),
                        Err(e) => (None, None, e),
                    };
                    BenchRow {
                        algo,
                        eta,
                        n,
                        d: args.data.d,
                        seed,
                        error,
                        seconds,
                        failure,
                        rep,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    rows.sort_by(|a, b| {
        a.algo
            .cmp(&b.algo)
            .then(a.eta.total_cmp(&b.eta))
            .then(a.n.cmp(&b.n))
            .then(a.rep.cmp(&b.rep))
    });
    let summary = summarize(&rows, !args.n.is_empty());
    Ok((rows, summary))
}

fn summarize(rows: &[BenchRow], explicit_n: bool) -> BenchSummary {
    let mut groups: BTreeMap<(Algo, u64, usize), Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.algo, r.eta.to_bits(), r.n)).or_default().push(r);
    }
    let groups: Vec<GroupSummary> = groups
        .into_values()
        .map(|g| {
            let errors: Vec<f64> = g.iter().filter_map(|r| r.error).collect();
            let secs: Vec<f64> = g.iter().filter_map(|r| r.seconds).collect();
            GroupSummary {
                algo: g[0].algo,
                eta: g[0].eta,
                n: g[0].n,
                ok: g.iter().filter(|r| r.failure.is_empty()).count(),
                failed: g.iter().filter(|r| !r.failure.is_empty()).count(),
                median_error: median(&errors),
                median_seconds: median(&secs),
            }
        })
        .collect();

    let slope = |algo: Algo, against: &str, at: Option<f64>, pts: Vec<(f64, f64)>| {
        let s = log_log_slope(&pts)?;
        let first = pts.first()?.1;
        let last = pts.last()?.1;
        Some(Slope {
            algo,
            against: against.into(),
            at,
            points: pts.len(),
            slope: s,
            ratio: last / first,
        })
    };
    let mut by_n: BTreeMap<(Algo, Option<usize>), Vec<(f64, f64)>> = BTreeMap::new();
    let mut by_eta: BTreeMap<(Algo, u64), Vec<(f64, f64)>> = BTreeMap::new();
    for g in &groups {
        if let Some(e) = g.median_error {
            let key = (g.algo, explicit_n.then_some(g.n));
            by_n.entry(key).or_default().push((g.eta, e));
        }
        if let Some(t) = g.median_seconds {
            by_eta.entry((g.algo, g.eta.to_bits())).or_default().push((g.n as f64, t));
        }
    }
    let error_slopes = by_n
        .into_iter()
        .filter_map(|((algo, n), mut pts)| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            slope(algo, "eta", n.map(|v| v as f64), pts)
        })
        .collect();
    let time_slopes = by_eta
        .into_iter()
        .filter_map(|((algo, eta), mut pts)| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            slope(algo, "n", Some(f64::from_bits(eta)), pts)
        })
        .collect();
    BenchSummary {
        failures: rows.iter().filter(|r| !r.failure.is_empty()).count(),
        groups,
        error_slopes,
        time_slopes,
    }
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["algo", "eta", "n", "d", "seed", "error", "seconds", "failure"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        wtr.write_record([
            r.algo.name().to_string(),
            r.eta.to_string(),
            r.n.to_string(),
            r.d.to_string(),
            r.seed.to_string(),
            opt(r.error),
            opt(r.seconds),
            r.failure.clone(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs) -> Result<BenchSummary> {
    let mut paths = vec![args.out.as_path()];
    if let Some(s) = &args.summary {
        paths.push(s);
    }
    distinct_paths(&paths)?;
    let (rows, summary) = run_bench(args)?;
    write_bench_csv(&rows, BufWriter::new(File::create(&args.out)?))?;
    match &args.summary {
        Some(p) => write_json(p, &summary)?,
        None => print_json(&summary)?,
    }
    Ok(summary)
}

/// Pair plus the moment and TV checks, as printed by `lb-demo`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LbDemo {
    #[serde(flatten)]
    pub pair: LowerBoundPair,
    pub noise_mean: f64,
    pub noise_variance: f64,
    pub variance_ok: bool,
    pub tv_bound: f64,
    pub tv_ok: bool,
}

pub fn lb_demo(case: LowerBoundCase, eta: f64, sigma: f64, kappa: f64, d: usize) -> Result<LbDemo> {
    let pair = match case {
        LowerBoundCase::Ht => lower_bound::lower_bound_pair_ht(sigma, eta)?,
        LowerBoundCase::Sg => lower_bound::lower_bound_pair_sg(sigma, eta)?,
        LowerBoundCase::Cond => lower_bound::lower_bound_pair_cond(sigma, eta, kappa, d)?,
    };
    let noise_mean = pair.d2.noise_mean();
    let noise_variance = pair.d2.noise_variance();
    Ok(LbDemo {
        noise_mean,
        noise_variance,
        variance_ok: noise_variance <= sigma * sigma + 1e-9,
        tv_bound: eta / 2.0,
        tv_ok: pair.tv <= eta / 2.0 + 1e-12,
        pair,
    })
}

pub fn cmd_lb_demo(args: &LbDemoArgs) -> Result<LbDemo> {
    let case = match args.case {
        CaseArg::Ht => LowerBoundCase::Ht,
        CaseArg::Sg => LowerBoundCase::Sg,
        CaseArg::Cond => LowerBoundCase::Cond,
    };
    let demo = lb_demo(case, args.eta, args.sigma, args.kappa, args.d)?;
    print_json(&demo)?;
    if let Some(p) = &args.out {
        write_json(p, &demo)?;
    }
    Ok(demo)
}

/// Machine-readable form of an error.
pub fn error_object(err: &Error) -> Value {
    let mut v = json!({ "error": err.to_string() });
    match err {
        Error::Diverged { iteration, trace } => {
            v["iteration"] = json!(iteration);
            v["trace"] = serde_json::to_value(trace).unwrap_or(Value::Null);
        }
        Error::NoConvergence { matvecs, best } => {
            v["matvecs"] = json!(matvecs);
            v["best_lambda"] = json!(best.lambda);
        }
        Error::Stage1Shortfall { n1, survivors, required } => {
            v["n1"] = json!(n1);
            v["survivors"] = json!(survivors);
            v["required"] = json!(required);
        }
        _ => {}
    }
    v
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match &cli.command {
        Command::Generate(a) => cmd_generate(a).map(|_| 0),
        Command::Fit(a) => cmd_fit(a).map(|_| 0),
        Command::Bench(a) => cmd_bench(a).map(|s| i32::from(s.failures > 0)),
        Command::LbDemo(a) => cmd_lb_demo(a).map(|_| 0),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", error_object(&e));
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let pts: Vec<(f64, f64)> = [0.01, 0.04, 0.09].iter().map(|&x: &f64| (x, 3.0 * x.sqrt())).collect();
        assert!((log_log_slope(&pts).unwrap() - 0.5).abs() < 1e-12);
        assert!(log_log_slope(&pts[..1]).is_none());
    }

    #[test]
    fn default_n_formula() {
        assert_eq!(default_n(10, 0.04), (200.0 * 10f64.ln() / 0.04).ceil() as usize);
    }

    #[test]
    fn repeated_paths_are_rejected() {
        let a = PathBuf::from("x.csv");
        assert!(distinct_paths(&[&a, &a]).is_err());
        assert!(distinct_paths(&[&a, Path::new("y.json")]).is_ok());
    }

    #[test]
    fn lb_demo_reports_the_ht_pair() {
        let demo = lb_demo(LowerBoundCase::Ht, 0.04, 1.0, 1.0, 2).unwrap();
        assert!((demo.pair.gap - 0.102041).abs() < 1e-6);
        assert!((demo.pair.tv - 0.02).abs() < 1e-12);
        assert!(demo.noise_mean.abs() < 1e-12);
        assert!(demo.variance_ok && demo.tv_ok);
        let cond = lb_demo(LowerBoundCase::Cond, 0.04, 1.0, 4.0, 2).unwrap();
        assert!((cond.pair.gap - 0.204082).abs() < 1e-6);
    }

    #[test]
    fn bench_summary_groups_and_fails_softly() {
        let row = |algo, eta: f64, rep, error: Option<f64>| BenchRow {
            algo,
            eta,
            n: 100,
            d: 2,
            seed: rep as u64,
            error,
            seconds: Some(0.1),
            failure: if error.is_some() { String::new() } else { "boom".into() },
            rep,
        };
        let rows = vec![
            row(Algo::Ht, 0.01, 0, Some(0.1)),
            row(Algo::Ht, 0.01, 1, Some(0.3)),
            row(Algo::Ht, 0.04, 0, Some(0.4)),
            row(Algo::Ht, 0.04, 1, None),
        ];
        let s = summarize(&rows, false);
        assert_eq!(s.failures, 1);
        assert_eq!(s.groups.len(), 2);
        assert_eq!(s.groups[0].median_error, Some(0.2));
        assert!((s.error_slopes[0].slope - 0.5).abs() < 1e-12);
    }
}
