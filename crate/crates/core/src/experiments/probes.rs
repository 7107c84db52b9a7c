use serde::Serialize;

use super::{
    by_n, growth_scale, log_scale, ratio_or_zero, run_parallel, timed, ExperimentConfig,
    Functional, SampleStats, TrialRecord,
};
use crate::error::{Error, Result};
use crate::exact::{exact_pa, exact_pa_boundary};
use crate::geometry::{powered_from_sq, HyperRect, Point};
use crate::graphs::{
    build_mst, kruskal_with_extra_point, mst_sq_edges, pt_from_mst, Instance, SqEdge,
};
use crate::kdtree::KdTree;

/// Victims per trial in the replacement probe.
pub const SMOOTH_VICTIMS: usize = 32;
/// Largest centre grid the empty-ball probe will scan.
pub const EMPTY_BALL_GRID_CAP: usize = 10_000_000;

fn record(
    cfg: &ExperimentConfig,
    experiment: &'static str,
    functional: &str,
    (n, trial): (usize, u64),
    value: f64,
    normalized: f64,
    wall_ms: f64,
) -> TrialRecord {
    TrialRecord {
        experiment,
        functional: functional.to_string(),
        d: cfg.d,
        p: cfg.p,
        n,
        trial,
        seed: cfg.seed.trial_seed(trial),
        value,
        normalized,
        wall_ms,
    }
}

fn per_n_stats(
    records: &[TrialRecord],
    f: impl Fn(&TrialRecord) -> f64,
) -> Vec<(usize, SampleStats)> {
    by_n(records)
        .into_iter()
        .map(|(n, rs)| {
            (
                n,
                SampleStats::of(&rs.iter().map(|r| f(r)).collect::<Vec<_>>()),
            )
        })
        .collect()
}

/// Largest replacement effect per `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessRow {
    pub n: usize,
    /// Largest `|F(X - v + z) - F(X)|` over trials, victims and grid points.
    pub max_delta: f64,
    /// `max_delta / (ln n / n)^(p/d)`; zero for `n = 1`.
    pub normalized_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothnessReport {
    pub grid: usize,
    pub victims_per_trial: usize,
    pub per_n: Vec<SmoothnessRow>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// Replacement grid: `g` points per axis at `k / (g - 1)`, corners included.
fn grid_points(d: usize, g: usize) -> Vec<Vec<f64>> {
    let total = g.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            (0..d)
                .map(|_| {
                    let k = idx % g;
                    idx /= g;
                    k as f64 / (g - 1) as f64
                })
                .collect()
        })
        .collect()
}

/// Functional value of a spanning tree given as keyed edges.
fn tree_functional(edges: &mut [SqEdge<f64>], n: usize, p: f64, f: Functional) -> f64 {
    edges.sort_by_key(|a| (a.u, a.v));
    match f {
        Functional::Pt => {
            let mut psi = vec![0.0f64; n];
            for e in edges.iter() {
                let w = powered_from_sq(e.d2, p);
                psi[e.u] = psi[e.u].max(w);
                psi[e.v] = psi[e.v].max(w);
            }
            psi.into_iter().sum()
        }
        _ => edges.iter().map(|e| powered_from_sq(e.d2, p)).sum(),
    }
}

/// `F(X with point i moved to z) - F(X)`, both evaluated from scratch.
pub fn replacement_delta(
    inst: &Instance<f64>,
    f: Functional,
    i: usize,
    z: &[f64],
    budget: usize,
) -> Result<f64> {
    let moved = inst.with_replaced(i, Point::new(z.to_vec())?)?;
    Ok(f.evaluate(&moved, budget)? - f.evaluate(inst, budget)?)
}

/// Largest `|ΔF|` of one trial under single-point replacement.
///
/// For tree functionals the tree of `X - v` is built once per victim and every
/// grid point is merged in with one Kruskal pass, which is exact.
fn max_replacement_effect(
    inst: &Instance<f64>,
    f: Functional,
    grid: &[Vec<f64>],
    budget: usize,
) -> Result<f64> {
    let n = inst.n();
    if n == 1 {
        return Ok(0.0);
    }
    let victims = n.min(SMOOTH_VICTIMS);
    let mut worst = 0.0f64;
    if f.is_exact() {
        let base = f.evaluate(inst, budget)?;
        for v in 0..victims {
            for z in grid {
                let moved = inst.with_replaced(v, Point::new(z.clone())?)?;
                worst = worst.max((f.evaluate(&moved, budget)? - base).abs());
            }
        }
        return Ok(worst);
    }

    let (d, p) = (inst.d(), inst.p());
    let base = tree_functional(&mut mst_sq_edges(inst), n, p, f);
    let coords = inst.flat_coords();
    for v in 0..victims {
        let keep: Vec<usize> = (0..n).filter(|&j| j != v).collect();
        let rest = inst.subset(&keep).expect("n >= 2");
        let mut without: Vec<SqEdge<f64>> = mst_sq_edges(&rest)
            .into_iter()
            .map(|e| SqEdge::new(keep[e.u], keep[e.v], e.d2))
            .collect();
        without.sort_by(|a, b| a.key_cmp(b));
        for z in grid {
            let mut edges = kruskal_with_extra_point(&coords, d, &without, v, z);
            worst = worst.max((tree_functional(&mut edges, n, p, f) - base).abs());
        }
    }
    Ok(worst)
}

/// Single-point replacement effect, normalized by `(ln n / n)^(p/d)`.
pub fn probe_smoothness(cfg: &ExperimentConfig, grid: usize) -> Result<SmoothnessReport> {
    cfg.validate()?;
    if grid < 2 {
        return Err(Error::input("grid must have at least 2 points per axis"));
    }
    if grid
        .checked_pow(cfg.d as u32)
        .is_none_or(|g| g > EMPTY_BALL_GRID_CAP)
    {
        return Err(Error::input("replacement grid too large"));
    }
    let points = grid_points(cfg.d, grid);
    let tasks = cfg.tasks();
    let records = run_parallel(cfg.workers, &tasks, |&(n, trial)| {
        let (delta, wall_ms) = timed(|| {
            max_replacement_effect(
                &cfg.instance(n, trial)?,
                cfg.functional,
                &points,
                cfg.budget,
            )
        })?;
        let normalized = ratio_or_zero(delta, log_scale(n, cfg.d, cfg.p));
        Ok(record(
            cfg,
            "smooth",
            cfg.functional.label(),
            (n, trial),
            delta,
            normalized,
            wall_ms,
        ))
    })?;
    let per_n = by_n(&records)
        .into_iter()
        .map(|(n, rs)| SmoothnessRow {
            n,
            max_delta: rs.iter().map(|r| r.value).fold(0.0, f64::max),
            normalized_max: rs.iter().map(|r| r.normalized).fold(0.0, f64::max),
        })
        .collect();
    Ok(SmoothnessReport {
        grid,
        victims_per_trial: SMOOTH_VICTIMS,
        per_n,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosenessRow {
    pub n: usize,
    /// Statistics of `(PA - PA_B) / n^((d-p)/d)`.
    #[serde(flatten)]
    pub stats: SampleStats,
    /// Trials with `PA_B > PA` beyond the value tolerance.
    pub violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosenessReport {
    pub per_n: Vec<ClosenessRow>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// Gap between the exact optimum and its boundary relaxation in the unit cube.
pub fn probe_closeness(cfg: &ExperimentConfig) -> Result<ClosenessReport> {
    cfg.validate()?;
    cfg.check_budget("PA")?;
    let tasks = cfg.tasks();
    let cube = HyperRect::unit(cfg.d);
    let records = run_parallel(cfg.workers, &tasks, |&(n, trial)| {
        let (diff, wall_ms) = timed(|| {
            let inst = cfg.instance(n, trial)?;
            Ok(exact_pa(&inst, cfg.budget)?.value
                - exact_pa_boundary(&inst, &cube, cfg.budget)?.value)
        })?;
        let normalized = diff / growth_scale(n, cfg.d, cfg.p);
        Ok(record(
            cfg,
            "close",
            "PA-PA_B",
            (n, trial),
            diff,
            normalized,
            wall_ms,
        ))
    })?;
    let per_n = per_n_stats(&records, |r| r.normalized)
        .into_iter()
        .map(|(n, stats)| ClosenessRow {
            n,
            stats,
            violations: records
                .iter()
                .filter(|r| r.n == n && r.value < -1e-9)
                .count(),
        })
        .collect();
    Ok(ClosenessReport { per_n, records })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailRow {
    pub n: usize,
    /// Threshold as a fraction of the sample mean at this `n`.
    pub t: f64,
    /// `t * mean`.
    pub t_abs: f64,
    pub mean: f64,
    /// Fraction of trials with `|F - mean| >= t_abs`.
    pub frequency: f64,
    /// `exp(-t_abs^2 n^(2p/d - 1) / (C (ln n)^(2p/d)))` with the fitted `C`.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    /// Smallest `C` for which the bound shape dominates every measured
    /// frequency strictly between 0 and 1.
    pub fitted_c: Option<f64>,
    pub rows: Vec<TailRow>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

impl TailReport {
    pub fn frequency(&self, n: usize, t: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.t == t)
            .map(|r| r.frequency)
    }
}

fn tail_exponent(t_abs: f64, n: usize, d: usize, p: f64) -> Option<f64> {
    let (nf, q) = (n as f64, 2.0 * p / d as f64);
    let ln = nf.ln();
    (ln > 0.0).then(|| t_abs * t_abs * nf.powf(q - 1.0) / ln.powf(q))
}

/// Empirical deviation frequencies around the per-`n` sample mean.
pub fn probe_tail(cfg: &ExperimentConfig, thresholds: &[f64]) -> Result<TailReport> {
    if thresholds.is_empty() || thresholds.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::input("thresholds must be finite and >= 0"));
    }
    let records = super::gamma::functional_records(cfg, "tail")?;
    let mut rows = Vec::new();
    for (n, rs) in by_n(&records) {
        let mean = rs.iter().map(|r| r.value).sum::<f64>() / rs.len() as f64;
        for &t in thresholds {
            let t_abs = t * mean;
            let hits = rs
                .iter()
                .filter(|r| (r.value - mean).abs() >= t_abs)
                .count();
            rows.push(TailRow {
                n,
                t,
                t_abs,
                mean,
                frequency: hits as f64 / rs.len() as f64,
                bound: None,
            });
        }
    }
    let fitted_c = rows
        .iter()
        .filter(|r| r.frequency > 0.0 && r.frequency < 1.0)
        .filter_map(|r| tail_exponent(r.t_abs, r.n, cfg.d, cfg.p).map(|x| x / -r.frequency.ln()))
        .fold(None, |acc: Option<f64>, c| {
            Some(acc.map_or(c, |a| a.max(c)))
        });
    if let Some(c) = fitted_c {
        for r in &mut rows {
            r.bound = tail_exponent(r.t_abs, r.n, cfg.d, cfg.p).map(|x| (-x / c).exp());
        }
    }
    Ok(TailReport {
        fitted_c,
        rows,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmptyBallRow {
    pub n: usize,
    /// `c_ball (ln n / n)^(1/d)`.
    pub radius: f64,
    /// Fraction of trials with an empty ball at some grid centre.
    pub fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmptyBallReport {
    pub c_ball: f64,
    /// Centres lie on a grid of pitch `radius / 2`; a ball counts as empty when
    /// no point lies in its open interior.
    pub grid_pitch_over_radius: f64,
    pub per_n: Vec<EmptyBallRow>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

fn has_empty_ball(inst: &Instance<f64>, radius: f64) -> Result<bool> {
    let d = inst.d();
    let h = radius / 2.0;
    let per_axis = (1.0 / h).ceil() as usize + 1;
    if per_axis
        .checked_pow(d as u32)
        .is_none_or(|g| g > EMPTY_BALL_GRID_CAP)
    {
        return Err(Error::input(format!(
            "empty-ball grid of {per_axis}^{d} centres exceeds the cap of {EMPTY_BALL_GRID_CAP}"
        )));
    }
    let tree = KdTree::build(inst.flat_coords(), d);
    let r2 = radius * radius;
    let mut idx = vec![0usize; d];
    let mut centre = vec![0.0; d];
    loop {
        for k in 0..d {
            centre[k] = (idx[k] as f64 * h).min(1.0);
        }
        if tree.nearest(&centre).is_some_and(|(d2, _)| d2 >= r2) {
            return Ok(true);
        }
        // Odometer over the centre grid.
        let mut k = 0;
        while k < d {
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == d {
            return Ok(false);
        }
    }
}

/// Fraction of trials leaving a ball of radius `c_ball (ln n / n)^(1/d)` empty.
pub fn probe_empty_ball(cfg: &ExperimentConfig, c_ball: f64) -> Result<EmptyBallReport> {
    cfg.validate()?;
    if !(c_ball > 0.0 && c_ball.is_finite()) {
        return Err(Error::input("cball must be > 0"));
    }
    if cfg.n_values.iter().any(|&n| n < 2) {
        return Err(Error::input("the empty-ball probe needs n >= 2"));
    }
    let tasks = cfg.tasks();
    let records = run_parallel(cfg.workers, &tasks, |&(n, trial)| {
        let radius = c_ball * log_scale(n, cfg.d, 1.0);
        let (empty, wall_ms) = timed(|| has_empty_ball(&cfg.instance(n, trial)?, radius))?;
        let v = if empty { 1.0 } else { 0.0 };
        Ok(record(
            cfg,
            "emptyball",
            "empty_ball",
            (n, trial),
            v,
            v,
            wall_ms,
        ))
    })?;
    let per_n = per_n_stats(&records, |r| r.value)
        .into_iter()
        .map(|(n, s)| EmptyBallRow {
            n,
            radius: c_ball * log_scale(n, cfg.d, 1.0),
            fraction: s.mean,
        })
        .collect();
    Ok(EmptyBallReport {
        c_ball,
        grid_pitch_over_radius: 0.5,
        per_n,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LongestEdgeRow {
    pub n: usize,
    /// Longest tree edge over `(ln n / n)^(1/d)`.
    pub edge: SampleStats,
    /// Largest heuristic power over `(ln n / n)^(p/d)`.
    pub power: SampleStats,
    pub max_degree: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LongestEdgeReport {
    pub per_n: Vec<LongestEdgeRow>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// Longest spanning-tree edge, largest heuristic power and tree degree.
/// Records carry the longest edge.
pub fn probe_longest_edge(cfg: &ExperimentConfig) -> Result<LongestEdgeReport> {
    cfg.validate()?;
    let tasks = cfg.tasks();
    let rows = run_parallel(cfg.workers, &tasks, |&(n, trial)| {
        let ((edge, power, degree), wall_ms) = timed(|| {
            let inst = cfg.instance(n, trial)?;
            let mst = build_mst(&inst);
            let top = pt_from_mst(&inst, &mst)
                .powers
                .as_slice()
                .iter()
                .copied()
                .fold(0.0, f64::max);
            Ok((mst.longest_edge, top, mst.max_degree))
        })?;
        let rec = record(
            cfg,
            "longestedge",
            "MST_longest_edge",
            (n, trial),
            edge,
            ratio_or_zero(edge, log_scale(n, cfg.d, 1.0)),
            wall_ms,
        );
        Ok((
            rec,
            ratio_or_zero(power, log_scale(n, cfg.d, cfg.p)),
            degree,
        ))
    })?;
    let records: Vec<TrialRecord> = rows.iter().map(|r| r.0.clone()).collect();
    let per_n = by_n(&records)
        .into_iter()
        .map(|(n, rs)| {
            let of_n: Vec<_> = rows.iter().filter(|r| r.0.n == n).collect();
            LongestEdgeRow {
                n,
                edge: SampleStats::of(&rs.iter().map(|r| r.normalized).collect::<Vec<_>>()),
                power: SampleStats::of(&of_n.iter().map(|r| r.1).collect::<Vec<_>>()),
                max_degree: of_n.iter().map(|r| r.2).max().unwrap_or(0),
            }
        })
        .collect();
    Ok(LongestEdgeReport { per_n, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(f: Functional, d: usize, p: f64, ns: Vec<usize>, trials: usize) -> ExperimentConfig {
        ExperimentConfig::new(f, d, p, ns, trials, 99)
    }

    #[test]
    fn grid_includes_corners() {
        let g = grid_points(2, 3);
        assert_eq!(g.len(), 9);
        assert!(
            g.contains(&vec![0.0, 0.0])
                && g.contains(&vec![1.0, 1.0])
                && g.contains(&vec![0.5, 0.5])
        );
    }

    #[test]
    fn fast_replacement_matches_rebuild() {
        let grid = grid_points(2, 4);
        for f in [Functional::Mst, Functional::Pt] {
            for (n, p) in [(2, 1.0), (9, 2.0), (40, 1.0)] {
                let c = cfg(f, 2, p, vec![n], 1);
                let inst = c.instance(n, 0).unwrap();
                let fast = max_replacement_effect(&inst, f, &grid, 12).unwrap();
                let mut slow = 0.0f64;
                for v in 0..n.min(SMOOTH_VICTIMS) {
                    for z in &grid {
                        slow = slow.max(replacement_delta(&inst, f, v, z, 12).unwrap().abs());
                    }
                }
                assert!((fast - slow).abs() < 1e-12, "{f:?} n={n}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn self_replacement_is_zero() {
        let c = cfg(Functional::Pt, 2, 2.0, vec![30], 1);
        let inst = c.instance(30, 0).unwrap();
        let z = inst.point(4).coords().to_vec();
        assert_eq!(
            replacement_delta(&inst, Functional::Pt, 4, &z, 12).unwrap(),
            0.0
        );
    }

    #[test]
    fn single_point_smoothness_is_zero() {
        let r = probe_smoothness(&cfg(Functional::Mst, 2, 1.0, vec![1], 2), 4).unwrap();
        assert_eq!(r.per_n[0].max_delta, 0.0);
        let r = probe_smoothness(&cfg(Functional::PaExact, 2, 1.0, vec![1, 4], 1), 3).unwrap();
        assert_eq!(r.per_n[0].max_delta, 0.0);
        assert!(r.per_n[1].max_delta > 0.0);
    }

    #[test]
    fn closeness_is_non_negative() {
        let r = probe_closeness(&cfg(Functional::PaExact, 2, 1.0, vec![1, 4, 6], 20)).unwrap();
        for row in &r.per_n {
            assert_eq!(row.violations, 0);
            assert!(row.stats.mean.is_finite() && row.stats.min >= -1e-9);
        }
        // A single point needs no power in either variant.
        assert!(r
            .records
            .iter()
            .filter(|x| x.n == 1)
            .all(|x| x.value == 0.0));
        assert!(probe_closeness(&cfg(Functional::PaExact, 2, 1.0, vec![13], 1)).is_err());
    }

    #[test]
    fn tail_frequencies_are_monotone_in_t() {
        let r = probe_tail(
            &cfg(Functional::Mst, 2, 1.0, vec![64, 256], 100),
            &[0.0, 0.02, 0.05, 0.1],
        )
        .unwrap();
        for n in [64, 256] {
            assert_eq!(r.frequency(n, 0.0), Some(1.0));
            let f: Vec<f64> = [0.0, 0.02, 0.05, 0.1]
                .iter()
                .map(|&t| r.frequency(n, t).unwrap())
                .collect();
            assert!(f.windows(2).all(|w| w[1] <= w[0]), "{f:?}");
        }
        let c = r.fitted_c.unwrap();
        assert!(c > 0.0);
        for row in r.rows.iter().filter(|row| row.frequency < 1.0) {
            assert!(
                row.bound.unwrap() >= row.frequency * (1.0 - 1e-12),
                "{row:?}"
            );
        }
    }

    #[test]
    fn huge_ball_is_never_empty() {
        for n in [2, 50] {
            let scale = log_scale(n, 2, 1.0);
            let c_ball = 2f64.sqrt() / scale;
            let r = probe_empty_ball(&cfg(Functional::Mst, 2, 1.0, vec![n], 20), c_ball).unwrap();
            assert_eq!(r.per_n[0].fraction, 0.0);
        }
    }

    #[test]
    fn empty_ball_fraction_is_monotone_in_radius() {
        let mut last = 1.0;
        for c_ball in [0.5, 1.0, 2.0, 4.0] {
            let r = probe_empty_ball(&cfg(Functional::Mst, 2, 1.0, vec![256], 40), c_ball).unwrap();
            assert!(r.per_n[0].fraction <= last);
            last = r.per_n[0].fraction;
        }
    }

    #[test]
    fn empty_ball_rejects_bad_input() {
        assert!(probe_empty_ball(&cfg(Functional::Mst, 2, 1.0, vec![10], 1), 0.0).is_err());
        assert!(probe_empty_ball(&cfg(Functional::Mst, 2, 1.0, vec![1], 1), 1.0).is_err());
        assert!(probe_empty_ball(&cfg(Functional::Mst, 3, 1.0, vec![100_000], 1), 1e-4).is_err());
    }

    #[test]
    fn longest_edge_basics() {
        let r = probe_longest_edge(&cfg(Functional::Mst, 1, 1.0, vec![2, 100], 10)).unwrap();
        for rec in r.records.iter().filter(|x| x.n == 2) {
            let inst = ExperimentConfig::new(Functional::Mst, 1, 1.0, vec![2], 1, 99)
                .instance(2, rec.trial)
                .unwrap();
            let x = inst.point(0).coords()[0] - inst.point(1).coords()[0];
            assert!((rec.value - x.abs()).abs() < 1e-15);
        }
        assert!(r.per_n.iter().all(|row| row.max_degree <= 2));
    }
}
