use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use super::{run_parallel, timed, TrialRecord};
use crate::error::{Error, Result};
use crate::exact::{exact_pa, exact_pa_boundary, oracle_enumerate, Region, ORACLE_CAP};
use crate::geometry::{angle_at, HyperRect, Params, Point};
use crate::graphs::{induced_graph, Instance};
use crate::instances::{star_instance, uniform_from_rng, Seed, StarSpec};

/// Relative slack applied against a reported violation, absorbing rounding
/// at the exact boundary of each inequality.
const REL_SLACK: f64 = 1e-9;
/// Triples examined per parallel chunk of the cone probe.
const CONE_CHUNK: usize = 10_000;

/// Outcome of the cone check on one triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConeOutcome {
    /// `psi(y) >= |x - y|^p`.
    pub reaches: bool,
    /// `Some(ok)` when `x` cannot reach `y`: whether `|y - v|` exceeds the
    /// cone factor times `|x - v|`.
    pub spread: Option<bool>,
}

/// `sin(2 alpha) / sin(alpha)`.
pub fn cone_factor(alpha: f64) -> f64 {
    (2.0 * alpha).sin() / alpha.sin()
}

/// Checks both cone statements for `x, y` seen from `v` with
/// `psi(x) = |x - v|^p` and `psi(y) = |y - v|^p`.
///
/// Expects `|x - v| <= |y - v|` and an angle at `v` of at most `alpha`.
pub fn cone_check(x: &[f64], v: &[f64], y: &[f64], alpha: f64, p: f64) -> ConeOutcome {
    let dist = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(s, t)| (s - t) * (s - t))
            .sum::<f64>()
            .sqrt()
    };
    let (a, b, c) = (dist(x, v), dist(y, v), dist(x, y));
    let (psi_x, psi_y, need) = (a.powf(p), b.powf(p), c.powf(p));
    let reaches = psi_y >= need * (1.0 - REL_SLACK);
    let spread = (psi_x < need).then(|| b >= cone_factor(alpha) * a * (1.0 - REL_SLACK));
    ConeOutcome { reaches, spread }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeReport {
    pub d: usize,
    pub p: f64,
    pub alpha: f64,
    pub factor: f64,
    /// Accepted triples.
    pub samples: usize,
    /// Uniform triples drawn to obtain them.
    pub drawn: u64,
    /// Accepted triples where `x` cannot reach `y`.
    pub unconnected: usize,
    pub violations_reach: usize,
    pub violations_spread: usize,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

impl ConeReport {
    pub fn violations(&self) -> usize {
        self.violations_reach + self.violations_spread
    }
}

/// Draws uniform triples `(x, v, y)` in `[0,1]^d`, keeps those with angle at
/// `v` at most `alpha` (ordered so `x` is the nearer one) and counts
/// violations of the cone statements.
///
/// Chunk `k` of `10^4` accepted triples uses trial stream `k`, so the result
/// does not depend on `workers`.
pub fn probe_cone(
    samples: usize,
    alpha: f64,
    seed: Seed,
    params: Params<f64>,
    workers: Option<usize>,
) -> Result<ConeReport> {
    if !(alpha > 0.0 && alpha <= PI / 3.0) {
        return Err(Error::input(format!(
            "alpha must lie in (0, pi/3], got {alpha}"
        )));
    }
    let (d, p) = (params.d, params.p);
    let chunks: Vec<(u64, usize)> = (0..samples.div_ceil(CONE_CHUNK))
        .map(|k| (k as u64, CONE_CHUNK.min(samples - k * CONE_CHUNK)))
        .collect();
    let parts = run_parallel(workers, &chunks, |&(k, size)| {
        let ((drawn, unconnected, va, vb), wall_ms) = timed(|| {
            let mut rng = seed.rng(k);
            let (mut drawn, mut accepted, mut unconnected, mut va, mut vb) = (0u64, 0, 0, 0, 0);
            let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Result<Point<f64>> {
                Point::new((0..d).map(|_| rng.gen::<f64>()).collect())
            };
            while accepted < size {
                let (mut x, v, mut y) = (draw(&mut rng)?, draw(&mut rng)?, draw(&mut rng)?);
                drawn += 1;
                let Ok(theta) = angle_at(&x, &v, &y) else {
                    continue;
                };
                if theta > alpha {
                    continue;
                }
                let near = |q: &Point<f64>| crate::geometry::dist_sq(q.coords(), v.coords());
                if near(&x) > near(&y) {
                    std::mem::swap(&mut x, &mut y);
                }
                accepted += 1;
                let out = cone_check(x.coords(), v.coords(), y.coords(), alpha, p);
                va += usize::from(!out.reaches);
                if let Some(ok) = out.spread {
                    unconnected += 1;
                    vb += usize::from(!ok);
                }
            }
            Ok((drawn, unconnected, va, vb))
        })?;
        let record = TrialRecord {
            experiment: "cone",
            functional: "violations".to_string(),
            d,
            p,
            n: size,
            trial: k,
            seed: seed.trial_seed(k),
            value: (va + vb) as f64,
            normalized: (va + vb) as f64 / size as f64,
            wall_ms,
        };
        Ok((record, drawn, unconnected, va, vb))
    })?;
    Ok(ConeReport {
        d,
        p,
        alpha,
        factor: cone_factor(alpha),
        samples,
        drawn: parts.iter().map(|t| t.1).sum(),
        unconnected: parts.iter().map(|t| t.2).sum(),
        violations_reach: parts.iter().map(|t| t.3).sum(),
        violations_spread: parts.iter().map(|t| t.4).sum(),
        records: parts.into_iter().map(|t| t.0).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditivityReport {
    pub d: usize,
    pub p: f64,
    pub trials: usize,
    pub n_max: usize,
    /// Trials with `PA(X + Y) > PA(X) + PA(Y) + 2 diam^p`.
    pub sub_violations: usize,
    /// Trials with `PA_B(X, R) < PA_B(X1, R1) + PA_B(X2, R2)`.
    pub super_violations: usize,
    /// Largest `PA(X + Y) - PA(X) - PA(Y)` seen, over `diam^p`.
    pub max_sub_excess: f64,
    /// Largest `PA_B(X1, R1) + PA_B(X2, R2) - PA_B(X, R)` seen.
    pub max_super_deficit: f64,
    /// Splits that left one half empty.
    pub empty_halves: usize,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

struct AdditivityTrial {
    sub_excess: f64,
    sub_ok: bool,
    super_deficit: f64,
    super_ok: bool,
    empty_half: bool,
    n_union: usize,
    n_split: usize,
    wall_ms: f64,
}

fn additivity_trial(
    seed: Seed,
    trial: u64,
    n_max: usize,
    params: Params<f64>,
    budget: usize,
) -> Result<AdditivityTrial> {
    let mut rng = seed.rng(trial);
    let d = params.d;
    let unit = HyperRect::<f64>::unit(d);
    let diam_p = unit.diameter().powf(params.p);

    let ((sub_excess, super_deficit, empty_half, n_union, n_split), wall_ms) = timed(|| {
        // Subadditivity: two independent sets whose union fits the cap.
        let nx = rng.gen_range(1..n_max);
        let ny = rng.gen_range(1..=n_max - nx);
        let x = uniform_from_rng(&mut rng, nx, params)?;
        let y = uniform_from_rng(&mut rng, ny, params)?;
        let both = x.union(&y)?;
        let sub_excess = exact_pa(&both, budget)?.value
            - exact_pa(&x, budget)?.value
            - exact_pa(&y, budget)?.value;

        // Superadditivity: one set and a random axis-parallel cut.
        let n = rng.gen_range(1..=n_max);
        let z = uniform_from_rng(&mut rng, n, params)?;
        let axis = rng.gen_range(0..d);
        let cut = loop {
            let c: f64 = rng.gen();
            if c > 0.0 {
                break c;
            }
        };
        let (lo, hi) = unit.split(axis, cut)?;
        let (lo_idx, hi_idx): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&i| z.point(i).coords()[axis] <= cut);
        let part = |idx: &[usize], r: &HyperRect<f64>| -> Result<f64> {
            match z.subset(idx) {
                Some(sub) => Ok(exact_pa_boundary(&sub, r, budget)?.value),
                None => Ok(0.0),
            }
        };
        let whole = exact_pa_boundary(&z, &unit, budget)?.value;
        let super_deficit = part(&lo_idx, &lo)? + part(&hi_idx, &hi)? - whole;
        Ok((
            sub_excess,
            super_deficit,
            lo_idx.is_empty() || hi_idx.is_empty(),
            nx + ny,
            n,
        ))
    })?;
    Ok(AdditivityTrial {
        sub_excess,
        sub_ok: sub_excess <= 2.0 * diam_p + 1e-9,
        super_deficit,
        super_ok: super_deficit <= 1e-9,
        empty_half,
        n_union,
        n_split,
        wall_ms,
    })
}

/// Random instances of subadditivity (with constant 2) for the optimum and of
/// superadditivity for its boundary variant under random bisections of the
/// unit cube.
pub fn probe_additivity(
    trials: usize,
    n_max: usize,
    seed: Seed,
    params: Params<f64>,
    budget: usize,
    workers: Option<usize>,
) -> Result<AdditivityReport> {
    params.require_p_at_least_one("superadditivity")?;
    if trials < 1 {
        return Err(Error::input("trials must be >= 1"));
    }
    if n_max < 2 {
        return Err(Error::input("additivity needs n >= 2"));
    }
    if n_max > budget {
        return Err(Error::Capacity {
            solver: "PA",
            n: n_max,
            budget,
        });
    }
    let tasks: Vec<u64> = (0..trials as u64).collect();
    let rows = run_parallel(workers, &tasks, |&t| {
        additivity_trial(seed, t, n_max, params, budget)
    })?;
    let diam_p = HyperRect::<f64>::unit(params.d).diameter().powf(params.p);
    let mut records = Vec::with_capacity(2 * rows.len());
    for (t, r) in rows.iter().enumerate() {
        let mk = |functional: &str, n, value: f64, normalized| TrialRecord {
            experiment: "additivity",
            functional: functional.to_string(),
            d: params.d,
            p: params.p,
            n,
            trial: t as u64,
            seed: seed.trial_seed(t as u64),
            value,
            normalized,
            wall_ms: r.wall_ms,
        };
        records.push(mk(
            "PA_sub_excess",
            r.n_union,
            r.sub_excess,
            r.sub_excess / diam_p,
        ));
        records.push(mk(
            "PA_B_super_deficit",
            r.n_split,
            r.super_deficit,
            r.super_deficit,
        ));
    }
    Ok(AdditivityReport {
        d: params.d,
        p: params.p,
        trials,
        n_max,
        sub_violations: rows.iter().filter(|r| !r.sub_ok).count(),
        super_violations: rows.iter().filter(|r| !r.super_ok).count(),
        max_sub_excess: rows
            .iter()
            .map(|r| r.sub_excess / diam_p)
            .fold(f64::NEG_INFINITY, f64::max),
        max_super_deficit: rows
            .iter()
            .map(|r| r.super_deficit)
            .fold(f64::NEG_INFINITY, f64::max),
        empty_halves: rows.iter().filter(|r| r.empty_half).count(),
        records,
    })
}

/// One ratio tried by the star check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarAttempt {
    pub ratio: f64,
    pub max_degree: usize,
    pub is_star: bool,
    pub oracle_agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarCheck {
    pub m: usize,
    pub p: f64,
    pub attempts: Vec<StarAttempt>,
    /// First ratio whose optimum is a star centred at 0.5, confirmed by
    /// enumeration; `None` if none up to the cap.
    pub ratio_used: Option<f64>,
    pub value: Option<f64>,
}

/// Largest ratio the star check escalates to.
pub const STAR_RATIO_CAP: f64 = 1e4;

/// Solves the symmetric star instance exactly, doubling the magnitude ratio
/// from `start_ratio` (capped at `10^4`) until the optimal graph is a star
/// centred at 0.5 and full enumeration agrees.
pub fn star_degree_check(m: usize, p: f64, start_ratio: f64, budget: usize) -> Result<StarCheck> {
    let n = StarSpec::new(m, start_ratio, p)?.n();
    if n > ORACLE_CAP {
        return Err(Error::Capacity {
            solver: "oracle",
            n,
            budget: ORACLE_CAP,
        });
    }
    let mut attempts = Vec::new();
    let mut ratio = start_ratio;
    loop {
        let inst = star_instance(StarSpec::new(m, ratio, p)?)?;
        let sol = exact_pa(&inst, budget)?;
        let graph = induced_graph(&inst, &sol.powers);
        let centre = m;
        let is_star =
            graph.len() == n - 1 && graph.iter().all(|&(u, v)| u == centre || v == centre);
        debug_assert!((inst.point(centre).coords()[0] - 0.5).abs() < 1e-15);
        let oracle = oracle_enumerate(&inst, Region::Interior)?;
        let oracle_agrees = (oracle.value() - sol.value).abs() <= 1e-9
            && induced_graph(&inst, oracle.powers()) == graph;
        attempts.push(StarAttempt {
            ratio,
            max_degree: max_degree(&inst, &graph),
            is_star,
            oracle_agrees,
        });
        if is_star && oracle_agrees {
            return Ok(StarCheck {
                m,
                p,
                attempts,
                ratio_used: Some(ratio),
                value: Some(sol.value),
            });
        }
        if ratio >= STAR_RATIO_CAP {
            return Ok(StarCheck {
                m,
                p,
                attempts,
                ratio_used: None,
                value: None,
            });
        }
        ratio = (2.0 * ratio).min(STAR_RATIO_CAP);
    }
}

fn max_degree(inst: &Instance<f64>, graph: &[(usize, usize)]) -> usize {
    let mut deg = vec![0usize; inst.n()];
    for &(u, v) in graph {
        deg[u] += 1;
        deg[v] += 1;
    }
    deg.into_iter().max().unwrap_or(0)
}
