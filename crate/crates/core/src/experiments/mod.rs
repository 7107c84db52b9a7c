//! Seeded Monte Carlo experiments over uniform random instances.
//!
//! Every trial is a pure function of `(master seed, trial index, n)`. Trials
//! run on a worker pool and are collected in `(n, trial)` order, so records
//! and aggregates do not depend on the number of workers.

mod d1;
mod gamma;
mod lemmas;
pub mod output;
mod probes;
mod ratio;

pub use d1::{
    interval_expectations, interval_mean_m, line_ratio, run_d1, run_d1_decomposition, D1Report,
    D1Stats, IntervalCheck, OneDimDecomposition,
};
pub use gamma::{run_gamma, GammaEstimate, NStats};
pub use lemmas::{
    probe_additivity, probe_cone, star_degree_check, AdditivityReport, ConeReport, StarCheck,
};
pub use probes::{
    probe_closeness, probe_empty_ball, probe_longest_edge, probe_smoothness, probe_tail,
    replacement_delta, ClosenessReport, EmptyBallReport, LongestEdgeReport, SmoothnessReport,
    TailReport,
};
pub use ratio::{run_ratio, RatioReport, RatioStats};

use std::time::Instant;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{exact_pa, exact_pa_boundary, DEFAULT_BUDGET};
use crate::geometry::{HyperRect, Params};
use crate::graphs::{build_mst, pt_from_mst, Instance};
use crate::instances::{gen_uniform, Seed};

/// The functional a trial evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Functional {
    #[serde(rename = "MST")]
    Mst,
    #[serde(rename = "PT")]
    Pt,
    #[serde(rename = "PA")]
    PaExact,
    #[serde(rename = "PA_B")]
    PaBExact,
}

impl Functional {
    pub fn label(self) -> &'static str {
        match self {
            Functional::Mst => "MST",
            Functional::Pt => "PT",
            Functional::PaExact => "PA",
            Functional::PaBExact => "PA_B",
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Functional::PaExact | Functional::PaBExact)
    }

    /// Value of the functional; the boundary variant uses the unit cube.
    pub fn evaluate(self, inst: &Instance<f64>, budget: usize) -> Result<f64> {
        Ok(match self {
            Functional::Mst => build_mst(inst).total,
            Functional::Pt => pt_from_mst(inst, &build_mst(inst)).value,
            Functional::PaExact => exact_pa(inst, budget)?.value,
            Functional::PaBExact => {
                exact_pa_boundary(inst, &HyperRect::unit(inst.d()), budget)?.value
            }
        })
    }
}

impl std::str::FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mst" => Ok(Functional::Mst),
            "pt" => Ok(Functional::Pt),
            "pa" | "pa-exact" | "pa_exact" => Ok(Functional::PaExact),
            "pab" | "pa_b" | "pab-exact" | "pa_b_exact" => Ok(Functional::PaBExact),
            other => Err(Error::input(format!("unknown functional {other:?}"))),
        }
    }
}

/// Description of one experiment run.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub functional: Functional,
    pub d: usize,
    pub p: f64,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub seed: Seed,
    /// Confidence exponent; recorded with the run, it only names which
    /// high-probability regime a probe constant refers to.
    pub beta: f64,
    /// Node cap for the exact solvers.
    pub budget: usize,
    /// Worker threads; `None` uses the available parallelism. Never affects
    /// results.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(
        functional: Functional,
        d: usize,
        p: f64,
        n_values: Vec<usize>,
        trials: usize,
        seed: u64,
    ) -> Self {
        ExperimentConfig {
            functional,
            d,
            p,
            n_values,
            trials,
            seed: Seed(seed),
            beta: 1.0,
            budget: DEFAULT_BUDGET,
            workers: None,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn params(&self) -> Result<Params<f64>> {
        Params::new(self.d, self.p)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if self.trials < 1 {
            return Err(Error::input("trials must be >= 1"));
        }
        if self.n_values.is_empty() {
            return Err(Error::input("need at least one n value"));
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n < 1) {
            return Err(Error::input(format!("n must be >= 1, got {n}")));
        }
        if self.functional.is_exact() {
            self.check_budget(self.functional.label())?;
        }
        Ok(())
    }

    pub(crate) fn check_budget(&self, solver: &'static str) -> Result<()> {
        let max_n = self.n_values.iter().copied().max().unwrap_or(0);
        if max_n > self.budget {
            return Err(Error::Capacity {
                solver,
                n: max_n,
                budget: self.budget,
            });
        }
        Ok(())
    }

    pub(crate) fn instance(&self, n: usize, trial: u64) -> Result<Instance<f64>> {
        gen_uniform(self.seed, trial, n, self.params()?)
    }

    /// Distinct `n` values, ascending.
    pub fn sorted_n(&self) -> Vec<usize> {
        let mut ns = self.n_values.clone();
        ns.sort_unstable();
        ns.dedup();
        ns
    }

    /// `(n, trial)` keys in output order.
    pub(crate) fn tasks(&self) -> Vec<(usize, u64)> {
        self.sorted_n()
            .into_iter()
            .flat_map(|n| (0..self.trials as u64).map(move |t| (n, t)))
            .collect()
    }
}

/// One trial's measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub experiment: &'static str,
    pub functional: String,
    pub d: usize,
    pub p: f64,
    pub n: usize,
    pub trial: u64,
    pub seed: u64,
    pub value: f64,
    pub normalized: f64,
    pub wall_ms: f64,
}

/// Summary statistics of a sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleStats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator); zero for one value.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl SampleStats {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return SampleStats {
                count,
                mean: f64::NAN,
                sd: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let sd = if count > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64)
                .sqrt()
        } else {
            0.0
        };
        SampleStats {
            count,
            mean,
            sd,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Exponent `(d - p) / d` of the growth normalization, formed exactly.
pub fn normalization_exponent(d: usize, p: f64) -> f64 {
    let d_r = BigRational::from_integer((d as i64).into());
    let p_r = BigRational::from_float(p).expect("p is finite");
    ((&d_r - p_r) / d_r)
        .to_f64()
        .expect("representable exponent")
}

/// `n^((d - p)/d)`.
pub fn growth_scale(n: usize, d: usize, p: f64) -> f64 {
    (n as f64).powf(normalization_exponent(d, p))
}

/// `(ln n / n)^(q / d)`; zero for `n = 1`.
pub fn log_scale(n: usize, d: usize, q: f64) -> f64 {
    let n = n as f64;
    (n.ln() / n).powf(q / d as f64)
}

/// `x / scale`, treating a zero scale (single point) as zero.
pub(crate) fn ratio_or_zero(x: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        x / scale
    } else {
        0.0
    }
}

/// Runs `f` over `tasks` on `workers` threads and returns results in task order.
pub(crate) fn run_parallel<K, R, F>(workers: Option<usize>, tasks: &[K], f: F) -> Result<Vec<R>>
where
    K: Sync,
    R: Send,
    F: Fn(&K) -> Result<R> + Sync + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w < 1 {
            return Err(Error::input("workers must be >= 1"));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::input(format!("cannot start worker pool: {e}")))?;
    pool.install(|| tasks.par_iter().map(&f).collect())
}

/// Times `f` in milliseconds.
pub(crate) fn timed<R>(f: impl FnOnce() -> Result<R>) -> Result<(R, f64)> {
    let start = Instant::now();
    let r = f()?;
    Ok((r, start.elapsed().as_secs_f64() * 1e3))
}

/// Per-`n` grouping of records, preserving order.
pub(crate) fn by_n(records: &[TrialRecord]) -> Vec<(usize, Vec<&TrialRecord>)> {
    let mut out: Vec<(usize, Vec<&TrialRecord>)> = Vec::new();
    for r in records {
        match out.last_mut() {
            Some((n, v)) if *n == r.n => v.push(r),
            _ => out.push((r.n, vec![r])),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_is_exact_for_simple_cases() {
        assert_eq!(normalization_exponent(2, 1.0), 0.5);
        assert_eq!(normalization_exponent(1, 1.0), 0.0);
        assert_eq!(normalization_exponent(2, 2.0), 0.0);
        assert_eq!(normalization_exponent(3, 1.0), 2.0 / 3.0);
        assert_eq!(normalization_exponent(1, 2.0), -1.0);
        assert_eq!(growth_scale(1, 2, 1.0), 1.0);
    }

    #[test]
    fn stats_basics() {
        let s = SampleStats::of(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.sd, 1.0);
        assert_eq!((s.min, s.max), (1.0, 3.0));
        assert_eq!(SampleStats::of(&[4.0]).sd, 0.0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::new(Functional::PaExact, 2, 1.0, vec![13], 1, 0);
        assert!(matches!(cfg.validate(), Err(Error::Capacity { .. })));
        cfg.n_values = vec![4];
        assert!(cfg.validate().is_ok());
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let bad_p = ExperimentConfig::new(Functional::Mst, 2, 0.0, vec![4], 1, 0);
        assert!(bad_p.validate().is_err());
    }

    #[test]
    fn functional_parsing() {
        assert_eq!(
            "pa-exact".parse::<Functional>().unwrap(),
            Functional::PaExact
        );
        assert_eq!("MST".parse::<Functional>().unwrap(), Functional::Mst);
        assert!("tsp".parse::<Functional>().is_err());
    }

    #[test]
    fn parallel_results_keep_task_order() {
        let tasks: Vec<u64> = (0..100).collect();
        let one = run_parallel(Some(1), &tasks, |&t| Ok(t * t)).unwrap();
        let many = run_parallel(Some(7), &tasks, |&t| Ok(t * t)).unwrap();
        assert_eq!(one, many);
    }
}
