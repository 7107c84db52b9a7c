use rand::Rng;
use serde::Serialize;

use super::{by_n, run_parallel, timed, ExperimentConfig, SampleStats, TrialRecord};
use crate::error::{Error, Result};
use crate::graphs::{build_mst, pt_from_mst, Instance};
use crate::scalar::pow_real;

/// Charge decomposition of the MST and the MST heuristic on a line.
///
/// With sorted points `x_1 <= .. <= x_n`, sentinels `x_0 = 0`,
/// `x_{n+1} = 1`, and gaps `g_i = (x_i - x_{i-1})^p`, point `i` carries
/// `M_i = (g_i + g_{i+1}) / 2` and `P_i = max(g_i, g_{i+1})`. The sentinel
/// gaps make `M* = sum M_i` and `P* = sum P_i` overshoot the real totals, so
/// the corrections are non-positive:
/// `M' = -(g_1 + g_{n+1}) / 2` and, for `n >= 2`,
/// `P' = -(g_1 - g_2)^+ - (g_{n+1} - g_n)^+` (for `n = 1`, `P' = -P_1`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneDimDecomposition {
    pub m_star: f64,
    pub m_prime: f64,
    pub p_star: f64,
    pub p_prime: f64,
    /// Charges at even positions (1-based).
    pub m_even: f64,
    pub m_odd: f64,
    pub p_even: f64,
    pub p_odd: f64,
    /// `x_{2i+1} - x_{2i-1}` for every even position `2i`, sentinel included.
    pub even_intervals: Vec<f64>,
    /// `sum l^p / (p + 1)`: the mean of `m_even` given the odd points.
    pub predicted_m_even: f64,
    /// `(2 - 2^-p)` times `predicted_m_even`.
    pub predicted_p_even: f64,
    pub mst: f64,
    pub pt: f64,
    /// Largest gap, sentinel gaps included (not powered).
    pub max_gap: f64,
}

/// Mean of `M_i` for a point uniform between neighbours `l` apart.
pub fn interval_mean_m(ell: f64, p: f64) -> f64 {
    ell.powf(p) / (p + 1.0)
}

/// `2 - 2^-p`.
pub fn line_ratio(p: f64) -> f64 {
    2.0 - 0.5f64.powf(p)
}

pub fn run_d1_decomposition(inst: &Instance<f64>) -> Result<OneDimDecomposition> {
    if inst.d() != 1 {
        return Err(Error::input(format!(
            "line decomposition needs d = 1, got d = {}",
            inst.d()
        )));
    }
    let p = inst.p();
    let n = inst.n();
    let mut x: Vec<f64> = inst.points().iter().map(|q| q.coords()[0]).collect();
    x.sort_by(|a, b| a.total_cmp(b));
    let mut xs = Vec::with_capacity(n + 2);
    xs.push(0.0);
    xs.extend_from_slice(&x);
    xs.push(1.0);

    // g[i] = (x_i - x_{i-1})^p for i in 1..=n+1; g[0] unused.
    let mut g = vec![0.0; n + 2];
    let mut max_gap = 0.0f64;
    for i in 1..=n + 1 {
        let gap = xs[i] - xs[i - 1];
        max_gap = max_gap.max(gap);
        g[i] = pow_real(gap, p);
    }

    let (mut m_even, mut m_odd, mut p_even, mut p_odd) = (0.0, 0.0, 0.0, 0.0);
    for i in 1..=n {
        let m_i = 0.5 * (g[i] + g[i + 1]);
        let p_i = g[i].max(g[i + 1]);
        if i % 2 == 0 {
            m_even += m_i;
            p_even += p_i;
        } else {
            m_odd += m_i;
            p_odd += p_i;
        }
    }
    let m_star = m_even + m_odd;
    let p_star = p_even + p_odd;
    let m_prime = -0.5 * (g[1] + g[n + 1]);
    let p_prime = if n == 1 {
        -g[1].max(g[2])
    } else {
        -(g[1] - g[2]).max(0.0) - (g[n + 1] - g[n]).max(0.0)
    };

    let even_intervals: Vec<f64> = (2..=n).step_by(2).map(|i| xs[i + 1] - xs[i - 1]).collect();
    let predicted_m_even: f64 = even_intervals.iter().map(|&l| interval_mean_m(l, p)).sum();

    let mst = build_mst(inst);
    let pt = pt_from_mst(inst, &mst).value;
    Ok(OneDimDecomposition {
        m_star,
        m_prime,
        p_star,
        p_prime,
        m_even,
        m_odd,
        p_even,
        p_odd,
        even_intervals,
        predicted_m_even,
        predicted_p_even: line_ratio(p) * predicted_m_even,
        mst: mst.total,
        pt,
        max_gap,
    })
}

/// Monte Carlo check of the single-interval charge means.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalCheck {
    pub ell: f64,
    pub p: f64,
    pub samples: usize,
    pub mean_m: f64,
    pub mean_p: f64,
    pub expected_m: f64,
    pub expected_p: f64,
}

impl IntervalCheck {
    pub fn rel_err_m(&self) -> f64 {
        (self.mean_m - self.expected_m).abs() / self.expected_m
    }

    pub fn rel_err_p(&self) -> f64 {
        (self.mean_p - self.expected_p).abs() / self.expected_p
    }
}

/// Draws a point uniform in `[0, ell]` and averages its two charges.
pub fn interval_expectations<R: Rng>(
    ell: f64,
    p: f64,
    samples: usize,
    rng: &mut R,
) -> Result<IntervalCheck> {
    if !(ell > 0.0 && ell.is_finite()) || !(p > 0.0 && p.is_finite()) || samples == 0 {
        return Err(Error::input("need ell > 0, p > 0 and samples >= 1"));
    }
    let (mut sm, mut sp) = (0.0, 0.0);
    for _ in 0..samples {
        let x = rng.gen::<f64>() * ell;
        let (a, b) = (pow_real(x, p), pow_real(ell - x, p));
        sm += 0.5 * (a + b);
        sp += a.max(b);
    }
    let expected_m = interval_mean_m(ell, p);
    Ok(IntervalCheck {
        ell,
        p,
        samples,
        mean_m: sm / samples as f64,
        mean_p: sp / samples as f64,
        expected_m,
        expected_p: line_ratio(p) * expected_m,
    })
}

/// Per-`n` means of the line decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct D1Stats {
    pub n: usize,
    /// Statistics of `PT / MST`.
    #[serde(flatten)]
    pub ratio: SampleStats,
    pub target: f64,
    pub mean_p_star_over_m_star: f64,
    /// Mean of `P_even / M_even`.
    pub mean_even_ratio: f64,
    /// Mean of `M_even` over its conditional prediction.
    pub mean_m_even_over_predicted: f64,
    pub mean_p_even_over_predicted: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct D1Report {
    pub per_n: Vec<D1Stats>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// Line decomposition over uniform instances; records carry `PT / MST`.
pub fn run_d1(cfg: &ExperimentConfig) -> Result<D1Report> {
    cfg.validate()?;
    if cfg.d != 1 {
        return Err(Error::input(format!(
            "the line experiment needs d = 1, got d = {}",
            cfg.d
        )));
    }
    let tasks = cfg.tasks();
    let rows = run_parallel(cfg.workers, &tasks, |&(n, trial)| {
        let (dec, wall_ms) = timed(|| run_d1_decomposition(&cfg.instance(n, trial)?))?;
        let ratio = if dec.mst > 0.0 { dec.pt / dec.mst } else { 1.0 };
        let record = TrialRecord {
            experiment: "d1",
            functional: "PT/MST".to_string(),
            d: 1,
            p: cfg.p,
            n,
            trial,
            seed: cfg.seed.trial_seed(trial),
            value: ratio,
            normalized: ratio,
            wall_ms,
        };
        Ok((record, dec))
    })?;
    let records: Vec<TrialRecord> = rows.iter().map(|r| r.0.clone()).collect();
    let per_n = by_n(&records)
        .into_iter()
        .map(|(n, rs)| {
            let decs: Vec<&OneDimDecomposition> =
                rows.iter().filter(|r| r.0.n == n).map(|r| &r.1).collect();
            let mean = |f: &dyn Fn(&OneDimDecomposition) -> f64| {
                let v: Vec<f64> = decs
                    .iter()
                    .map(|d| f(d))
                    .filter(|x| x.is_finite())
                    .collect();
                if v.is_empty() {
                    f64::NAN
                } else {
                    v.iter().sum::<f64>() / v.len() as f64
                }
            };
            let ratios: Vec<f64> = rs.iter().map(|r| r.value).collect();
            D1Stats {
                n,
                ratio: SampleStats::of(&ratios),
                target: line_ratio(cfg.p),
                mean_p_star_over_m_star: mean(&|d| d.p_star / d.m_star),
                mean_even_ratio: mean(&|d| d.p_even / d.m_even),
                mean_m_even_over_predicted: mean(&|d| d.m_even / d.predicted_m_even),
                mean_p_even_over_predicted: mean(&|d| d.p_even / d.predicted_p_even),
            }
        })
        .collect();
    Ok(D1Report { per_n, records })
}
