//! Seeded random instances, the symmetric star construction, and the instance
//! file format.
//!
//! Randomness: every trial owns an independent ChaCha8 stream
//! (`rand_chacha::ChaCha8Rng`, seeded through `SeedableRng::seed_from_u64`)
//! whose 64-bit seed is the SplitMix64 output for state
//! `master + 0x9E3779B97F4A7C15 * (trial + 1)`. Coordinates are drawn with
//! `Rng::gen::<f64>()`, i.e. 53-bit uniform values in `[0, 1)`, point by point
//! and axis by axis. Instances of different sizes drawn from the same trial
//! stream are prefixes of one another.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{Params, Point};
use crate::graphs::Instance;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Master seed of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Seed of trial `trial`'s private stream.
    pub fn trial_seed(self, trial: u64) -> u64 {
        splitmix64(
            self.0
                .wrapping_add(GOLDEN_GAMMA.wrapping_mul(trial.wrapping_add(1))),
        )
    }

    pub fn rng(self, trial: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.trial_seed(trial))
    }
}

/// `n` independent uniform points of `[0,1]^d` from trial `trial`'s stream.
pub fn gen_uniform(seed: Seed, trial: u64, n: usize, params: Params<f64>) -> Result<Instance<f64>> {
    if n == 0 {
        return Err(Error::input("n must be >= 1"));
    }
    let mut rng = seed.rng(trial);
    uniform_from_rng(&mut rng, n, params)
}

/// `n` uniform points drawn from an existing stream.
pub fn uniform_from_rng<R: Rng>(
    rng: &mut R,
    n: usize,
    params: Params<f64>,
) -> Result<Instance<f64>> {
    let points = (0..n)
        .map(|_| Point::new((0..params.d).map(|_| rng.gen::<f64>()).collect()))
        .collect::<Result<Vec<_>>>()?;
    Instance::new(params, points)
}

/// The symmetric instance `{-a_m, ..., -a_1, 0, a_1, ..., a_m}` with
/// `a_i = ratio^(i-1)`, mapped affinely onto `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarSpec {
    pub m: usize,
    pub ratio: f64,
    pub p: f64,
}

impl StarSpec {
    pub const DEFAULT_RATIO: f64 = 10.0;

    pub fn new(m: usize, ratio: f64, p: f64) -> Result<Self> {
        if m < 1 {
            return Err(Error::input("star instance needs m >= 1"));
        }
        if !(ratio.is_finite() && ratio > 1.0) {
            return Err(Error::input("star ratio must be > 1"));
        }
        Params::new(1, p)?;
        Ok(StarSpec { m, ratio, p })
    }

    pub fn n(&self) -> usize {
        2 * self.m + 1
    }
}

pub fn star_instance(spec: StarSpec) -> Result<Instance<f64>> {
    let spec = StarSpec::new(spec.m, spec.ratio, spec.p)?;
    let mags: Vec<f64> = (0..spec.m).map(|i| spec.ratio.powi(i as i32)).collect();
    let top = mags[spec.m - 1];
    let mut xs = Vec::with_capacity(spec.n());
    for &a in mags.iter().rev() {
        xs.push(0.5 - a / (2.0 * top));
    }
    xs.push(0.5);
    for &a in &mags {
        xs.push(0.5 + a / (2.0 * top));
    }
    let rows: Vec<Vec<f64>> = xs.into_iter().map(|x| vec![x]).collect();
    Instance::from_rows(1, spec.p, &rows)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    d: i64,
    p: f64,
    points: Vec<Vec<f64>>,
}

/// Serializes to the instance JSON shape with 17 significant digits.
pub fn instance_to_json(inst: &Instance<f64>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{{");
    let _ = writeln!(s, "  \"d\": {},", inst.d());
    let _ = writeln!(s, "  \"p\": {},", fmt17(inst.p()));
    let _ = writeln!(s, "  \"points\": [");
    for (i, pt) in inst.points().iter().enumerate() {
        let coords: Vec<String> = pt.coords().iter().map(|&c| fmt17(c)).collect();
        let sep = if i + 1 == inst.n() { "" } else { "," };
        let _ = writeln!(s, "    [{}]{}", coords.join(", "), sep);
    }
    let _ = writeln!(s, "  ]");
    let _ = writeln!(s, "}}");
    s
}

/// 17 significant digits in JSON-compatible scientific notation.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn instance_from_json(text: &str) -> Result<Instance<f64>> {
    let raw: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if raw.d < 1 {
        return Err(Error::Validation(format!(
            "field \"d\": must be >= 1, got {}",
            raw.d
        )));
    }
    let d = raw.d as usize;
    if !(raw.p.is_finite() && raw.p > 0.0) {
        return Err(Error::Validation(format!(
            "field \"p\": must be > 0, got {}",
            raw.p
        )));
    }
    if raw.points.is_empty() {
        return Err(Error::Validation(
            "field \"points\": need at least one point".into(),
        ));
    }
    let mut points = Vec::with_capacity(raw.points.len());
    for (i, row) in raw.points.into_iter().enumerate() {
        if row.len() != d {
            return Err(Error::Validation(format!(
                "points[{i}]: has {} coordinates, expected d = {d}",
                row.len()
            )));
        }
        if let Some(k) = row.iter().position(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::Validation(format!(
                "points[{i}][{k}]: coordinate {} outside [0,1]",
                row[k]
            )));
        }
        points.push(Point::new(row).map_err(|e| Error::Validation(format!("points[{i}]: {e}")))?);
    }
    Instance::new(Params::new(d, raw.p)?, points)
}

pub fn save_instance(inst: &Instance<f64>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, instance_to_json(inst))?;
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance<f64>> {
    instance_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn params(d: usize, p: f64) -> Params<f64> {
        Params::new(d, p).unwrap()
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_uniform(Seed(42), 0, 3, params(2, 2.0)).unwrap();
        let b = gen_uniform(Seed(42), 0, 3, params(2, 2.0)).unwrap();
        assert_eq!(a, b);
        assert!(a.points().iter().all(|p| p.in_unit_cube()));
        assert!(gen_uniform(Seed(42), 0, 0, params(2, 2.0)).is_err());
    }

    #[test]
    fn smaller_sizes_are_prefixes() {
        let big = gen_uniform(Seed(9), 4, 50, params(3, 1.0)).unwrap();
        let small = gen_uniform(Seed(9), 4, 20, params(3, 1.0)).unwrap();
        assert_eq!(&big.points()[..20], small.points());
    }

    #[test]
    fn trials_do_not_collide() {
        let mut seen = HashSet::new();
        for t in 0..10_000u64 {
            let inst = gen_uniform(Seed(42), t, 3, params(2, 2.0)).unwrap();
            let key: Vec<u64> = inst.flat_coords().iter().map(|c| c.to_bits()).collect();
            assert!(seen.insert(key), "trial {t} repeats an earlier point list");
        }
    }

    #[test]
    fn quadrant_counts_are_balanced() {
        let n = 10_000;
        let inst = gen_uniform(Seed(7), 0, n, params(2, 1.0)).unwrap();
        let mut counts = [0usize; 4];
        for pt in inst.points() {
            let q = (pt[0] >= 0.5) as usize + 2 * (pt[1] >= 0.5) as usize;
            counts[q] += 1;
        }
        let sd = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 / 4.0).abs() < 5.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn star_examples() {
        let one = star_instance(StarSpec::new(1, 7.0, 2.0).unwrap()).unwrap();
        assert_eq!(one.flat_coords(), vec![0.0, 0.5, 1.0]);
        let two = star_instance(StarSpec::new(2, 10.0, 2.0).unwrap()).unwrap();
        let expect = [0.0, 0.45, 0.5, 0.55, 1.0];
        for (a, b) in two.flat_coords().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(StarSpec::new(0, 10.0, 2.0).is_err());
        assert!(StarSpec::new(2, 1.0, 2.0).is_err());
    }

    #[test]
    fn star_is_symmetric_for_any_ratio() {
        for &k in &[2.0, 10.0, 1000.0] {
            let inst = star_instance(StarSpec::new(4, k, 3.0).unwrap()).unwrap();
            let xs = inst.flat_coords();
            assert_eq!(xs.len(), 9);
            assert!(xs.windows(2).all(|w| w[0] < w[1]));
            for i in 0..xs.len() {
                assert!((xs[i] + xs[xs.len() - 1 - i] - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn file_validation_errors() {
        let bad_dim = r#"{"d": 2, "p": 1.0, "points": [[0.1, 0.2], [0.1, 0.2, 0.3]]}"#;
        assert!(
            matches!(instance_from_json(bad_dim), Err(Error::Validation(m)) if m.contains("points[1]"))
        );
        let bad_p = r#"{"d": 1, "p": 0, "points": [[0.1]]}"#;
        assert!(
            matches!(instance_from_json(bad_p), Err(Error::Validation(m)) if m.contains("\"p\""))
        );
        let outside = r#"{"d": 1, "p": 1.0, "points": [[1.5]]}"#;
        assert!(matches!(
            instance_from_json(outside),
            Err(Error::Validation(_))
        ));
        let broken = "{\n  \"d\": 1,\n  \"p\": oops\n}";
        assert!(matches!(
            instance_from_json(broken),
            Err(Error::Parse { line: 3, .. })
        ));
        let extra = r#"{"d": 1, "p": 1.0, "points": [[0.1]], "q": 3}"#;
        assert!(matches!(
            instance_from_json(extra),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn file_round_trip_through_disk() {
        let inst = gen_uniform(Seed(3), 1, 25, params(3, 2.5)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        save_instance(&inst, &path).unwrap();
        assert_eq!(load_instance(&path).unwrap(), inst);
    }

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(
            rows in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 2), 1..20),
            p in 0.01f64..8.0,
        ) {
            let inst = Instance::from_rows(2, p, &rows).unwrap();
            let back = instance_from_json(&instance_to_json(&inst)).unwrap();
            prop_assert_eq!(back, inst);
        }
    }
}
