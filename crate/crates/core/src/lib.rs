//! Minimum-power connectivity on geometric point sets.
//!
//! Given points in `[0,1]^d` and a distance-power gradient `p`, a power
//! assignment gives every node a transmit power; two nodes are linked when both
//! can afford `||u - v||^p`. This crate computes minimum spanning trees, the
//! MST heuristic, exact optimal assignments (plain and boundary variants) for
//! small instances, and runs seeded Monte Carlo experiments over random
//! instances.
//!
//! The geometric, graph and exact-solver layers are generic over [`Scalar`]
//! (`f32` or `f64`); the `*64` aliases below name the `f64` instantiations the
//! experiment harness and the CLI use.

pub mod cli;
mod dsu;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod geometry;
pub mod graphs;
pub mod instances;
mod kdtree;
pub mod scalar;

pub use dsu::UnionFind;
pub use error::{Error, Result};
pub use exact::{
    candidate_levels, exact_pa, exact_pa_boundary, is_boundary_pa, oracle_enumerate,
    BoundarySolution, CandidateLevels, Region, Solution, DEFAULT_BUDGET, ORACLE_CAP,
};
pub use geometry::{angle_at, dist_to_boundary, powered_dist, HyperRect, Params, Point};
pub use graphs::{
    build_mst, induced_graph, induced_power, is_connected_pa, pt_from_mst, pt_heuristic,
    sandwich_check, sandwich_holds, Edge, Instance, MstSummary, PaSolution, PowerVector,
};
pub use instances::{gen_uniform, load_instance, save_instance, star_instance, Seed, StarSpec};
pub use kdtree::KdTree;
pub use scalar::Scalar;

pub type Point64 = Point<f64>;
pub type HyperRect64 = HyperRect<f64>;
pub type Params64 = Params<f64>;
pub type Instance64 = Instance<f64>;
pub type MstSummary64 = MstSummary<f64>;
pub type PowerVector64 = PowerVector<f64>;
pub type PaSolution64 = PaSolution<f64>;
pub type BoundarySolution64 = BoundarySolution<f64>;

pub type Point32 = Point<f32>;
pub type Instance32 = Instance<f32>;
pub type PaSolution32 = PaSolution<f32>;
