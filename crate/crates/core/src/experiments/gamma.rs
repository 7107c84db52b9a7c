use serde::Serialize;

use super::{by_n, growth_scale, run_parallel, timed, ExperimentConfig, SampleStats, TrialRecord};
use crate::error::Result;

/// Statistics of one `n` value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NStats {
    pub n: usize,
    #[serde(flatten)]
    pub stats: SampleStats,
}

/// Per-`n` statistics of `F(n) / n^((d-p)/d)`.
#[derive(Debug, Clone, Serialize)]
pub struct GammaEstimate {
    pub per_n: Vec<NStats>,
    /// `(n, mean)` in ascending `n`.
    pub trend: Vec<(usize, f64)>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

impl GammaEstimate {
    pub fn stats_for(&self, n: usize) -> Option<&SampleStats> {
        self.per_n.iter().find(|s| s.n == n).map(|s| &s.stats)
    }
}

pub(crate) fn summarize(records: &[TrialRecord]) -> Vec<NStats> {
    let mut out: Vec<NStats> = by_n(records)
        .into_iter()
        .map(|(n, rs)| {
            let v: Vec<f64> = rs.iter().map(|r| r.normalized).collect();
            NStats {
                n,
                stats: SampleStats::of(&v),
            }
        })
        .collect();
    out.sort_by_key(|s| s.n);
    out
}

/// One record per `(n, trial)` of the configured functional.
pub(crate) fn functional_records(
    cfg: &ExperimentConfig,
    experiment: &'static str,
) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let tasks = cfg.tasks();
    run_parallel(cfg.workers, &tasks, |&(n, trial)| {
        let (value, wall_ms) = timed(|| {
            let inst = cfg.instance(n, trial)?;
            cfg.functional.evaluate(&inst, cfg.budget)
        })?;
        Ok(TrialRecord {
            experiment,
            functional: cfg.functional.label().to_string(),
            d: cfg.d,
            p: cfg.p,
            n,
            trial,
            seed: cfg.seed.trial_seed(trial),
            value,
            normalized: value / growth_scale(n, cfg.d, cfg.p),
            wall_ms,
        })
    })
}

/// Estimates the growth constant of the configured functional.
pub fn run_gamma(cfg: &ExperimentConfig) -> Result<GammaEstimate> {
    let records = functional_records(cfg, "gamma")?;
    let per_n = summarize(&records);
    let trend = per_n.iter().map(|s| (s.n, s.stats.mean)).collect();
    Ok(GammaEstimate {
        per_n,
        trend,
        records,
    })
}
