//! Command-line front end: `gen`, `solve` and `exp`.
//!
//! Exit status is 0 on success, 1 for usage or input errors and 2 when an
//! exact solver is asked for more points than its cap. Machine-readable output
//! goes to the paths named by `-o/--out` and `--summary`, or to standard output
//! when no path is given; diagnostics go to standard error.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{exact_pa, exact_pa_boundary, oracle_enumerate, Region, DEFAULT_BUDGET};
use crate::experiments::output::{render_csv, render_summary, write_file};
use crate::experiments::{
    probe_additivity, probe_closeness, probe_cone, probe_empty_ball, probe_longest_edge,
    probe_smoothness, probe_tail, run_d1, run_gamma, run_ratio, ExperimentConfig, Functional,
    TrialRecord,
};
use crate::geometry::{HyperRect, Params};
use crate::graphs::{build_mst, pt_from_mst, Instance};
use crate::instances::{
    gen_uniform, instance_to_json, load_instance, star_instance, Seed, StarSpec,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CAPACITY: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "palab",
    version,
    about = "Power assignment solvers and Monte Carlo experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a uniform random instance, or the symmetric star with --m.
    Gen(GenArgs),
    /// Solve one instance file.
    Solve(SolveArgs),
    /// Run a seeded experiment and write a results CSV.
    Exp(ExpArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, env = "PALAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Trial stream to draw from.
    #[arg(long, default_value_t = 0)]
    pub trial: u64,
    /// Star instance with 2m+1 points on the line instead of uniform points.
    #[arg(long)]
    pub m: Option<usize>,
    /// Magnitude ratio of the star instance.
    #[arg(long, default_value_t = StarSpec::DEFAULT_RATIO)]
    pub ratio: f64,
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Alg {
    Mst,
    Pt,
    PaExact,
    PabExact,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMode {
    Interior,
    Boundary,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub alg: Alg,
    #[arg(short = 'i', long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Functional the oracle enumerates.
    #[arg(long, value_enum, default_value_t = OracleMode::Interior)]
    pub mode: OracleMode,
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Node cap of the exact solvers.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    /// Confirms a --budget above the default.
    #[arg(long)]
    pub force: bool,
}

impl BudgetArgs {
    fn resolve(&self) -> Result<usize> {
        if self.budget > DEFAULT_BUDGET && !self.force {
            return Err(Error::input(format!(
                "--budget {} exceeds the default {DEFAULT_BUDGET}; pass --force to confirm",
                self.budget
            )));
        }
        Ok(self.budget)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExpKind {
    Gamma,
    Ratio,
    D1,
    Smooth,
    Close,
    Tail,
    Emptyball,
    Longestedge,
    Cone,
    Additivity,
}

impl ExpKind {
    fn name(self) -> &'static str {
        match self {
            ExpKind::Gamma => "gamma",
            ExpKind::Ratio => "ratio",
            ExpKind::D1 => "d1",
            ExpKind::Smooth => "smooth",
            ExpKind::Close => "close",
            ExpKind::Tail => "tail",
            ExpKind::Emptyball => "emptyball",
            ExpKind::Longestedge => "longestedge",
            ExpKind::Cone => "cone",
            ExpKind::Additivity => "additivity",
        }
    }

    fn default_n(self) -> Vec<usize> {
        match self {
            ExpKind::Close => vec![4, 6, 8],
            ExpKind::Additivity => vec![8],
            _ => vec![1000],
        }
    }
}

#[derive(Debug, Args)]
pub struct ExpArgs {
    #[arg(value_enum)]
    pub kind: ExpKind,
    /// Comma-separated sizes; for `additivity` the largest is the point cap.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, env = "PALAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Functional for gamma, smooth and tail.
    #[arg(long, default_value = "mst")]
    pub functional: String,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Replacement grid points per axis.
    #[arg(long, default_value_t = 8)]
    pub grid: usize,
    /// Cone half-angle in radians.
    #[arg(long, default_value_t = PI / 6.0)]
    pub alpha: f64,
    /// Cone triples to draw.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Empty-ball radius constant.
    #[arg(long, default_value_t = 2.0)]
    pub cball: f64,
    /// Tail thresholds as fractions of the mean.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub thresholds: Vec<f64>,
    /// Confidence exponent recorded with the run.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Fill the wall_ms column.
    #[arg(long)]
    pub timing: bool,
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
    /// Summary JSON path.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

/// Parses `argv` and runs it, returning the exit status.
pub fn run_from<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => EXIT_INPUT,
            };
        }
    };
    match run(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_capacity() {
        EXIT_CAPACITY
    } else {
        EXIT_INPUT
    }
}

pub fn run(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Gen(a) => gen(a, stdout, stderr),
        Command::Solve(a) => solve(a, stdout),
        Command::Exp(a) => exp(a, stdout, stderr),
    }
}

fn emit(path: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn gen(a: GenArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let inst = match a.m {
        Some(m) => {
            let spec = StarSpec::new(m, a.ratio, a.p)?;
            writeln!(stderr, "# gen star m={m} ratio={} p={}", a.ratio, a.p)?;
            star_instance(spec)?
        }
        None => {
            let params = Params::new(a.d, a.p)?;
            writeln!(
                stderr,
                "# gen uniform n={} d={} p={} seed={} trial={}",
                a.n, a.d, a.p, a.seed, a.trial
            )?;
            gen_uniform(Seed(a.seed), a.trial, a.n, params)?
        }
    };
    emit(&a.out, &instance_to_json(&inst), stdout)
}

#[derive(Serialize)]
struct SolveOutput {
    functional: &'static str,
    n: usize,
    d: usize,
    p: f64,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    powers: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<(usize, usize)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundary_links: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    budget: Option<usize>,
}

fn solve(a: SolveArgs, stdout: &mut dyn Write) -> Result<()> {
    let budget = a.budget.resolve()?;
    let inst: Instance<f64> = load_instance(&a.input)?;
    let unit = HyperRect::unit(inst.d());
    let mut out = SolveOutput {
        functional: "",
        n: inst.n(),
        d: inst.d(),
        p: inst.p(),
        value: 0.0,
        powers: None,
        edges: None,
        boundary_links: None,
        budget: None,
    };
    match a.alg {
        Alg::Mst => {
            let mst = build_mst(&inst);
            out.functional = "MST";
            out.value = mst.total;
            out.edges = Some(mst.edge_pairs());
        }
        Alg::Pt => {
            let mst = build_mst(&inst);
            let pt = pt_from_mst(&inst, &mst);
            out.functional = "PT";
            out.value = pt.value;
            out.powers = Some(pt.powers.as_slice().to_vec());
            out.edges = Some(mst.edge_pairs());
        }
        Alg::PaExact => {
            let s = exact_pa(&inst, budget)?;
            out.functional = "PA";
            out.value = s.value;
            out.powers = Some(s.powers.as_slice().to_vec());
            out.budget = Some(budget);
        }
        Alg::PabExact => {
            let s = exact_pa_boundary(&inst, &unit, budget)?;
            out.functional = "PA_B";
            out.value = s.value;
            out.powers = Some(s.powers.as_slice().to_vec());
            out.boundary_links = Some(s.boundary_links);
            out.budget = Some(budget);
        }
        Alg::Oracle => {
            let region = match a.mode {
                OracleMode::Interior => Region::Interior,
                OracleMode::Boundary => Region::Boundary(&unit),
            };
            let s = oracle_enumerate(&inst, region)?;
            out.functional = match a.mode {
                OracleMode::Interior => "PA",
                OracleMode::Boundary => "PA_B",
            };
            out.value = s.value();
            out.powers = Some(s.powers().as_slice().to_vec());
        }
    }
    let mut text = serde_json::to_string(&out).map_err(|e| Error::input(e.to_string()))?;
    text.push('\n');
    emit(&a.out, &text, stdout)
}

fn exp(a: ExpArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let budget = a.budget.resolve()?;
    let params = Params::new(a.d, a.p)?;
    let n_values = a.n.clone().unwrap_or_else(|| a.kind.default_n());
    if let Some(&bad) = n_values.iter().find(|&&n| n < 1) {
        return Err(Error::input(format!("n must be >= 1, got {bad}")));
    }
    if a.trials < 1 {
        return Err(Error::input("trials must be >= 1"));
    }
    let functional: Functional = match a.kind {
        ExpKind::Gamma | ExpKind::Smooth | ExpKind::Tail => a.functional.parse()?,
        ExpKind::Ratio | ExpKind::D1 => Functional::Pt,
        ExpKind::Close => Functional::PaExact,
        _ => Functional::Mst,
    };
    let mut cfg = ExperimentConfig::new(functional, a.d, a.p, n_values.clone(), a.trials, a.seed);
    cfg.budget = budget;
    cfg.beta = a.beta;
    cfg.workers = a.workers;

    let mut echo: Vec<(String, String)> = vec![
        ("experiment".into(), a.kind.name().into()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("d".into(), a.d.to_string()),
        ("p".into(), a.p.to_string()),
        ("seed".into(), a.seed.to_string()),
    ];
    let mut kv = |k: &str, v: String| echo.push((k.to_string(), v));
    let list = |v: &[usize]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    match a.kind {
        ExpKind::Cone => {
            kv("samples", a.samples.to_string());
            kv("alpha", a.alpha.to_string());
        }
        ExpKind::Additivity => {
            kv("n_max", n_values.iter().max().unwrap().to_string());
            kv("trials", a.trials.to_string());
            kv("budget", budget.to_string());
        }
        _ => {
            kv("functional", functional.label().into());
            kv("n", list(&cfg.sorted_n()));
            kv("trials", a.trials.to_string());
            kv("budget", budget.to_string());
            kv("beta", a.beta.to_string());
        }
    }
    match a.kind {
        ExpKind::Smooth => kv("grid", a.grid.to_string()),
        ExpKind::Emptyball => kv("cball", a.cball.to_string()),
        ExpKind::Tail => kv(
            "thresholds",
            a.thresholds
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
        _ => {}
    }
    kv("timing", a.timing.to_string());
    for (k, v) in &echo {
        writeln!(stderr, "# {k}={v}")?;
    }
    match a.workers {
        Some(w) => writeln!(stderr, "# workers={w}")?,
        None => writeln!(stderr, "# workers=auto")?,
    }

    let (records, summary): (Vec<TrialRecord>, serde_json::Value) = match a.kind {
        ExpKind::Gamma => {
            let r = run_gamma(&cfg)?;
            (r.records.clone(), to_value(&r)?)
        }
        ExpKind::Ratio => {
            let r = run_ratio(&cfg)?;
            (r.records.clone(), to_value(&r)?)
        }
        ExpKind::D1 => {
            let r = run_d1(&cfg)?;
            (r.records.clone(), to_value(&r)?)
        }
        ExpKind::Smooth => {
            let r = probe_smoothness(&cfg, a.grid)?;
            (r.records.clone(), to_value(&r)?)
        }
        ExpKind::Close => {
            let r = probe_closeness(&cfg)?;
            (r.records.clone(), to_value(&r)?)
        }
        ExpKind::Tail => {
            let r = probe_tail(&cfg, &a.thresholds)?;
            (r.records.clone(), to_value(&r)?)
        }
        ExpKind::Emptyball => {
            let r = probe_empty_ball(&cfg, a.cball)?;
            (r.records.clone(), to_value(&r)?)
        }
        ExpKind::Longestedge => {
            let r = probe_longest_edge(&cfg)?;
            (r.records.clone(), to_value(&r)?)
        }
        ExpKind::Cone => {
            let r = probe_cone(a.samples, a.alpha, Seed(a.seed), params, a.workers)?;
            (r.records.clone(), to_value(&r)?)
        }
        ExpKind::Additivity => {
            let n_max = *n_values.iter().max().unwrap();
            let r = probe_additivity(a.trials, n_max, Seed(a.seed), params, budget, a.workers)?;
            (r.records.clone(), to_value(&r)?)
        }
    };

    emit(&a.out, &render_csv(&echo, &records, a.timing)?, stdout)?;
    if let Some(path) = &a.summary {
        let config: serde_json::Map<String, serde_json::Value> = echo
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        write_file(path, &render_summary(&config, &summary)?)?;
    }
    Ok(())
}

fn to_value<S: Serialize>(s: &S) -> Result<serde_json::Value> {
    serde_json::to_value(s).map_err(|e| Error::input(format!("cannot serialize summary: {e}")))
}
