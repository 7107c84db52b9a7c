//! Instances, minimum spanning trees, and the power assignments induced by
//! edge sets.

mod mst;
mod power;

pub use mst::{build_mst, MstSummary};
pub(crate) use mst::{kruskal_with_extra_point, mst_sq_edges, SqEdge};
pub use power::{
    induced_graph, induced_power, is_connected_pa, pt_from_mst, pt_heuristic, sandwich_check,
    sandwich_holds, PaSolution, PowerVector,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist_sq, powered_from_sq, Params, Point};
use crate::scalar::Scalar;

/// A point set in `[0,1]^d` together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance<T> {
    params: Params<T>,
    points: Vec<Point<T>>,
}

impl<T: Scalar> Instance<T> {
    pub fn new(params: Params<T>, points: Vec<Point<T>>) -> Result<Self> {
        Params::new(params.d, params.p)?;
        if points.is_empty() {
            return Err(Error::input("an instance needs at least one point"));
        }
        for (i, pt) in points.iter().enumerate() {
            if pt.dim() != params.d {
                return Err(Error::input(format!(
                    "point {i} has {} coordinates, expected d = {}",
                    pt.dim(),
                    params.d
                )));
            }
            if !pt.in_unit_cube() {
                return Err(Error::input(format!(
                    "point {i} lies outside [0,1]^{}",
                    params.d
                )));
            }
        }
        Ok(Instance { params, points })
    }

    /// Convenience constructor from raw coordinate rows.
    pub fn from_rows(d: usize, p: T, rows: &[Vec<T>]) -> Result<Self> {
        let params = Params::new(d, p)?;
        let points = rows
            .iter()
            .map(|r| Point::new(r.clone()))
            .collect::<Result<Vec<_>>>()?;
        Instance::new(params, points)
    }

    pub fn params(&self) -> Params<T> {
        self.params
    }

    pub fn d(&self) -> usize {
        self.params.d
    }

    pub fn p(&self) -> T {
        self.params.p
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Point<T> {
        &self.points[i]
    }

    #[inline]
    pub(crate) fn dist_sq(&self, i: usize, j: usize) -> T {
        dist_sq(self.points[i].coords(), self.points[j].coords())
    }

    /// `||x_i - x_j||^p`.
    #[inline]
    pub fn powered(&self, i: usize, j: usize) -> T {
        powered_from_sq(self.dist_sq(i, j), self.params.p)
    }

    /// Row-major coordinate copy.
    pub fn flat_coords(&self) -> Vec<T> {
        self.points
            .iter()
            .flat_map(|p| p.coords().iter().copied())
            .collect()
    }

    /// The sub-instance on `indices` (in the given order), or `None` if empty.
    pub fn subset(&self, indices: &[usize]) -> Option<Self> {
        if indices.is_empty() {
            return None;
        }
        Some(Instance {
            params: self.params,
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
        })
    }

    /// This instance with the points of `other` appended.
    pub fn union(&self, other: &Self) -> Result<Self> {
        if other.d() != self.d() || other.p() != self.p() {
            return Err(Error::input(
                "cannot merge instances with different parameters",
            ));
        }
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        Ok(Instance {
            params: self.params,
            points,
        })
    }

    /// Copy with point `i` replaced by `z`.
    pub fn with_replaced(&self, i: usize, z: Point<T>) -> Result<Self> {
        let mut points = self.points.clone();
        points[i] = z;
        Instance::new(self.params, points)
    }

    /// Copy with a different gradient `p`.
    pub fn with_p(&self, p: T) -> Result<Self> {
        Instance::new(Params::new(self.d(), p)?, self.points.clone())
    }
}

/// An undirected edge `u < v` with its p-powered length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge<T> {
    pub u: usize,
    pub v: usize,
    pub weight: T,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_validation() {
        assert!(Instance::<f64>::from_rows(2, 1.0, &[]).is_err());
        assert!(Instance::from_rows(2, 1.0, &[vec![0.1, 0.2], vec![0.3]]).is_err());
        assert!(Instance::from_rows(1, 1.0, &[vec![1.5]]).is_err());
        assert!(Instance::from_rows(1, 0.0, &[vec![0.5]]).is_err());
        let inst = Instance::from_rows(1, 2.0, &[vec![0.0], vec![0.5]]).unwrap();
        assert_eq!(inst.powered(0, 1), 0.25);
        assert!(inst.subset(&[]).is_none());
        assert_eq!(inst.subset(&[1]).unwrap().n(), 1);
    }
}
