//! Points, powered distances, boundary distances and angles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{pow_real, Scalar};

/// A point given by its coordinates.
///
/// Points built with [`Point::new`] lie in the unit cube; [`Point::free`]
/// only requires finite coordinates and is meant for auxiliary geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point<T> {
    coords: Vec<T>,
}

impl<T: Scalar> Point<T> {
    /// A point of `[0,1]^d`.
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::input("a point needs at least one coordinate"));
        }
        for (i, &c) in coords.iter().enumerate() {
            if !c.is_finite() || c < T::zero() || c > T::one() {
                return Err(Error::input(format!(
                    "coordinate {i} = {c} is not a finite value in [0,1]"
                )));
            }
        }
        Ok(Point { coords })
    }

    /// A point anywhere in `R^d`.
    pub fn free(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::input("a point needs at least one coordinate"));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::input(format!("coordinate {i} is not finite")));
        }
        Ok(Point { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn in_unit_cube(&self) -> bool {
        self.coords.iter().all(|&c| c >= T::zero() && c <= T::one())
    }
}

impl<T> std::ops::Index<usize> for Point<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.coords[i]
    }
}

/// An axis-aligned box `[lower, upper]` with positive extent in every axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperRect<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> HyperRect<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::input(format!(
                "rectangle bounds have dimensions {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::input(format!(
                    "rectangle axis {i}: need finite lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(HyperRect { lower, upper })
    }

    /// The unit cube `[0,1]^d`.
    pub fn unit(d: usize) -> Self {
        assert!(d >= 1, "dimension must be positive");
        HyperRect {
            lower: vec![T::zero(); d],
            upper: vec![T::one(); d],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn diameter(&self) -> T {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| (hi - lo) * (hi - lo))
            .sum::<T>()
            .sqrt()
    }

    /// Closed containment.
    pub fn contains(&self, x: &Point<T>) -> bool {
        x.dim() == self.dim()
            && x.coords()
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&c, (&lo, &hi))| c >= lo && c <= hi)
    }

    /// Splits along `axis` at `cut`; points on the cut belong to the lower half.
    pub fn split(&self, axis: usize, cut: T) -> Result<(Self, Self)> {
        if axis >= self.dim() {
            return Err(Error::input(format!("split axis {axis} out of range")));
        }
        if !(cut > self.lower[axis] && cut < self.upper[axis]) {
            return Err(Error::input(format!(
                "cut {cut} outside the open extent of axis {axis}"
            )));
        }
        let mut lo_half = self.clone();
        let mut hi_half = self.clone();
        lo_half.upper[axis] = cut;
        hi_half.lower[axis] = cut;
        Ok((lo_half, hi_half))
    }
}

/// Dimension `d` and distance-power gradient `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params<T> {
    pub d: usize,
    pub p: T,
}

impl<T: Scalar> Params<T> {
    pub fn new(d: usize, p: T) -> Result<Self> {
        if d < 1 {
            return Err(Error::input("d must be >= 1"));
        }
        if !(p.is_finite() && p > T::zero()) {
            return Err(Error::input("p must be > 0"));
        }
        Ok(Params { d, p })
    }

    /// Features that rely on `p >= 1` call this first.
    pub fn require_p_at_least_one(&self, feature: &str) -> Result<()> {
        if self.p < T::one() {
            Err(Error::input(format!(
                "{feature} requires p >= 1, got {}",
                self.p
            )))
        } else {
            Ok(())
        }
    }
}

/// Squared Euclidean distance on raw coordinate slices.
#[inline]
pub(crate) fn dist_sq<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        let t = x - y;
        acc = acc + t * t;
    }
    acc
}

/// `(squared distance)^(p/2)`, exact for `p = 2`.
#[inline]
pub(crate) fn powered_from_sq<T: Scalar>(d2: T, p: T) -> T {
    if p == T::lit(2.0) {
        d2
    } else {
        pow_real(d2.sqrt(), p)
    }
}

fn check_dims<T: Scalar>(a: &Point<T>, b: &Point<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::input(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// `||a - b||^p`: the power needed to bridge the distance between `a` and `b`.
pub fn powered_dist<T: Scalar>(a: &Point<T>, b: &Point<T>, p: T) -> Result<T> {
    check_dims(a, b)?;
    if p.is_nan() || p <= T::zero() {
        return Err(Error::input("p must be > 0"));
    }
    Ok(powered_from_sq(dist_sq(a.coords(), b.coords()), p))
}

/// Euclidean distance from `x` to the nearest face of `r`.
pub fn dist_to_boundary<T: Scalar>(x: &Point<T>, r: &HyperRect<T>) -> Result<T> {
    if !r.contains(x) {
        return Err(Error::input("point lies outside the rectangle"));
    }
    Ok(boundary_gap(x.coords(), r))
}

#[inline]
pub(crate) fn boundary_gap<T: Scalar>(x: &[T], r: &HyperRect<T>) -> T {
    x.iter()
        .zip(r.lower().iter().zip(r.upper()))
        .map(|(&c, (&lo, &hi))| (c - lo).min(hi - c))
        .fold(T::infinity(), T::min)
}

/// Angle at apex `v` between the rays towards `x` and `y`, in `[0, pi]`.
pub fn angle_at<T: Scalar>(x: &Point<T>, v: &Point<T>, y: &Point<T>) -> Result<T> {
    check_dims(x, v)?;
    check_dims(y, v)?;
    let mut dot = T::zero();
    let mut nx = T::zero();
    let mut ny = T::zero();
    for i in 0..v.dim() {
        let a = x[i] - v[i];
        let b = y[i] - v[i];
        dot = dot + a * b;
        nx = nx + a * a;
        ny = ny + b * b;
    }
    if nx == T::zero() || ny == T::zero() {
        return Err(Error::input(
            "angle undefined: a ray endpoint coincides with the apex",
        ));
    }
    let cos = (dot / (nx.sqrt() * ny.sqrt())).max(-T::one()).min(T::one());
    Ok(cos.acos())
}
