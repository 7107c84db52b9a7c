//! Exact optimal power assignments by branch-and-bound over candidate power
//! levels, and a brute-force enumeration used to cross-check it.
//!
//! An optimal assignment is induced by its own graph, so every optimal power
//! equals the powered distance to some other node (or, for the boundary
//! variant, to the boundary). Searching over those finitely many levels per
//! node is therefore exact.

use serde::Serialize;

use crate::dsu::UnionFind;
use crate::error::{Error, Result};
use crate::geometry::{boundary_gap, powered_from_sq, HyperRect};
use crate::graphs::{
    induced_graph, is_connected_pa, pt_heuristic, Instance, PaSolution, PowerVector,
};
use crate::scalar::Scalar;

/// Default node cap for the branch-and-bound solvers.
pub const DEFAULT_BUDGET: usize = 12;
/// Node cap for full enumeration.
pub const ORACLE_CAP: usize = 7;

/// Which functional to optimise: plain connectivity, or connectivity where
/// components may instead attach to the boundary of a rectangle.
#[derive(Debug, Clone, Copy)]
pub enum Region<'a, T> {
    Interior,
    Boundary(&'a HyperRect<T>),
}

/// Sorted admissible power values per node.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateLevels<T> {
    levels: Vec<Vec<T>>,
}

impl<T: Scalar> CandidateLevels<T> {
    pub fn of(&self, v: usize) -> &[T] {
        &self.levels[v]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Number of tuples full enumeration would visit (saturating).
    pub fn tuple_count(&self) -> u128 {
        self.levels
            .iter()
            .fold(1u128, |acc, l| acc.saturating_mul(l.len() as u128))
    }
}

/// Optimal boundary power assignment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySolution<T> {
    pub powers: PowerVector<T>,
    pub value: T,
    /// Nodes whose power reaches the boundary of the rectangle.
    pub boundary_links: Vec<usize>,
}

/// Result of [`oracle_enumerate`], matching the region it was asked for.
#[derive(Debug, Clone, PartialEq)]
pub enum Solution<T> {
    Interior(PaSolution<T>),
    Boundary(BoundarySolution<T>),
}

impl<T: Scalar> Solution<T> {
    pub fn value(&self) -> T {
        match self {
            Solution::Interior(s) => s.value,
            Solution::Boundary(s) => s.value,
        }
    }

    pub fn powers(&self) -> &PowerVector<T> {
        match self {
            Solution::Interior(s) => &s.powers,
            Solution::Boundary(s) => &s.powers,
        }
    }
}

/// Pairwise powered distances plus optional boundary powers.
struct Problem<T> {
    n: usize,
    w: Vec<T>,
    boundary: Option<Vec<T>>,
}

impl<T: Scalar> Problem<T> {
    fn new(inst: &Instance<T>, region: Region<'_, T>) -> Result<Self> {
        let n = inst.n();
        let mut w = vec![T::zero(); n * n];
        for u in 0..n {
            for v in u + 1..n {
                let x = inst.powered(u, v);
                w[u * n + v] = x;
                w[v * n + u] = x;
            }
        }
        let boundary = match region {
            Region::Interior => None,
            Region::Boundary(r) => {
                if r.dim() != inst.d() {
                    return Err(Error::input(
                        "rectangle dimension differs from the instance",
                    ));
                }
                let mut b = Vec::with_capacity(n);
                for (i, x) in inst.points().iter().enumerate() {
                    if !r.contains(x) {
                        return Err(Error::input(format!(
                            "point {i} lies outside the rectangle"
                        )));
                    }
                    let g = boundary_gap(x.coords(), r);
                    b.push(powered_from_sq(g * g, inst.p()));
                }
                Some(b)
            }
        };
        Ok(Problem { n, w, boundary })
    }

    #[inline]
    fn w(&self, u: usize, v: usize) -> T {
        self.w[u * self.n + v]
    }

    fn levels(&self) -> CandidateLevels<T> {
        let n = self.n;
        let levels = (0..n)
            .map(|v| {
                let mut l: Vec<T> = (0..n).filter(|&u| u != v).map(|u| self.w(v, u)).collect();
                if let Some(b) = &self.boundary {
                    l.push(b[v]);
                }
                if n == 1 {
                    l.push(T::zero());
                }
                l.sort_by(|a, b| a.partial_cmp(b).unwrap());
                l.dedup();
                l
            })
            .collect();
        CandidateLevels { levels }
    }

    /// Feasibility with union-find; the search's own check.
    fn feasible(&self, psi: &[T]) -> bool {
        let n = self.n;
        let mut uf = UnionFind::new(n);
        for u in 0..n {
            for v in u + 1..n {
                let w = self.w(u, v);
                if covers(psi[u], w) && covers(psi[v], w) {
                    uf.union(u, v);
                }
            }
        }
        if uf.components() == 1 {
            return true;
        }
        let Some(b) = &self.boundary else {
            return false;
        };
        let mut linked = vec![false; n];
        for v in 0..n {
            if covers(psi[v], b[v]) {
                let r = uf.find(v);
                linked[r] = true;
            }
        }
        (0..n).all(|v| {
            let r = uf.find(v);
            linked[r]
        })
    }
}

#[inline]
fn covers<T: Scalar>(power: T, need: T) -> bool {
    power + T::cover_slack() >= need
}

/// Candidate power levels per node.
pub fn candidate_levels<T: Scalar>(
    inst: &Instance<T>,
    region: Region<'_, T>,
) -> Result<CandidateLevels<T>> {
    Ok(Problem::new(inst, region)?.levels())
}

/// `a` is a better incumbent than `b`: strictly cheaper, or tied within the
/// tolerance and lexicographically smaller.
fn improves<T: Scalar>(a_val: T, a: &[T], b_val: T, b: &[T]) -> bool {
    let tol = T::value_tol();
    if a_val < b_val - tol {
        return true;
    }
    if a_val > b_val + tol {
        return false;
    }
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

struct Search<'a, T> {
    prob: &'a Problem<T>,
    levels: &'a CandidateLevels<T>,
    order: Vec<usize>,
    /// `suffix_min[k]`: sum of minimum levels of `order[k..]`.
    suffix_min: Vec<T>,
    assign: Vec<T>,
    scratch: Vec<T>,
    best_value: T,
    best: Vec<T>,
}

impl<T: Scalar> Search<'_, T> {
    fn run(&mut self, k: usize, partial: T) {
        let v = self.order[k];
        let tol = T::value_tol();
        let n = self.prob.n;
        for &level in self.levels.of(v) {
            let here = partial + level;
            if here + self.suffix_min[k + 1] > self.best_value + tol {
                break;
            }
            self.assign[v] = level;
            if k + 1 == n {
                if self.prob.feasible(&self.assign) {
                    let value: T = self.assign.iter().copied().sum();
                    if improves(value, &self.assign, self.best_value, &self.best) {
                        self.best_value = value;
                        self.best.clone_from(&self.assign);
                    }
                }
                continue;
            }
            if self.optimistic_feasible(k + 1, here) {
                self.run(k + 1, here);
            }
        }
    }

    /// Feasibility when every unassigned node gets the most power any
    /// completion still competitive with the incumbent could give it.
    fn optimistic_feasible(&mut self, next: usize, partial: T) -> bool {
        let slack = self.best_value + T::value_tol() - partial - self.suffix_min[next];
        self.scratch.clone_from(&self.assign);
        for &u in &self.order[next..] {
            let lv = self.levels.of(u);
            let cap = lv[0] + slack;
            self.scratch[u] = lv[lv.len() - 1].min(cap);
        }
        self.prob.feasible(&self.scratch)
    }
}

fn branch_and_bound<T: Scalar>(prob: &Problem<T>, incumbent: Vec<T>) -> Vec<T> {
    let n = prob.n;
    let levels = prob.levels();
    if n == 1 {
        return vec![T::zero()];
    }
    let nn: Vec<T> = (0..n)
        .map(|v| {
            (0..n)
                .filter(|&u| u != v)
                .map(|u| prob.w(v, u))
                .fold(T::infinity(), T::min)
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| nn[b].partial_cmp(&nn[a]).unwrap().then(a.cmp(&b)));

    let mut suffix_min = vec![T::zero(); n + 1];
    for k in (0..n).rev() {
        suffix_min[k] = suffix_min[k + 1] + levels.of(order[k])[0];
    }
    debug_assert!(prob.feasible(&incumbent), "incumbent must be feasible");
    let best_value = incumbent.iter().copied().sum();
    let mut search = Search {
        prob,
        levels: &levels,
        order,
        suffix_min,
        assign: vec![T::zero(); n],
        scratch: vec![T::zero(); n],
        best_value,
        best: incumbent,
    };
    search.run(0, T::zero());
    search.best
}

fn check_budget(solver: &'static str, n: usize, budget: usize) -> Result<()> {
    if n > budget {
        Err(Error::Capacity { solver, n, budget })
    } else {
        Ok(())
    }
}

/// Minimum total power of a connected power assignment.
pub fn exact_pa<T: Scalar>(inst: &Instance<T>, budget: usize) -> Result<PaSolution<T>> {
    check_budget("exact_pa", inst.n(), budget)?;
    let prob = Problem::new(inst, Region::Interior)?;
    let pt = pt_heuristic(inst);
    let best = branch_and_bound(&prob, pt.powers.as_slice().to_vec());
    let powers = PowerVector::new(best)?;
    Ok(PaSolution {
        value: powers.total(),
        powers,
        connected: true,
    })
}

/// Minimum total power of a boundary power assignment in `r`.
pub fn exact_pa_boundary<T: Scalar>(
    inst: &Instance<T>,
    r: &HyperRect<T>,
    budget: usize,
) -> Result<BoundarySolution<T>> {
    let prob = Problem::new(inst, Region::Boundary(r))?;
    check_budget("exact_pa_boundary", inst.n(), budget)?;
    let pt: Vec<T> = pt_heuristic(inst).powers.as_slice().to_vec();
    let to_wall: Vec<T> = prob.boundary.clone().expect("boundary problem");
    let pt_val: T = pt.iter().copied().sum();
    let wall_val: T = to_wall.iter().copied().sum();
    let incumbent = if improves(wall_val, &to_wall, pt_val, &pt) {
        to_wall
    } else {
        pt
    };
    let best = branch_and_bound(&prob, incumbent);
    boundary_solution(&prob, best)
}

fn boundary_solution<T: Scalar>(prob: &Problem<T>, psi: Vec<T>) -> Result<BoundarySolution<T>> {
    let b = prob.boundary.as_ref().expect("boundary problem");
    let boundary_links = (0..prob.n).filter(|&v| covers(psi[v], b[v])).collect();
    let powers = PowerVector::new(psi)?;
    Ok(BoundarySolution {
        value: powers.total(),
        powers,
        boundary_links,
    })
}

/// Whether `psi` is a boundary power assignment for `r`: the induced graph is
/// connected, or each of its components has a node reaching the boundary.
pub fn is_boundary_pa<T: Scalar>(
    inst: &Instance<T>,
    r: &HyperRect<T>,
    psi: &PowerVector<T>,
) -> bool {
    if is_connected_pa(inst, psi) {
        return true;
    }
    let n = inst.n();
    let mut adj = vec![Vec::new(); n];
    for (u, v) in induced_graph(inst, psi) {
        adj[u].push(v);
        adj[v].push(u);
    }
    let reaches = |v: usize| {
        let g = boundary_gap(inst.point(v).coords(), r);
        covers(psi[v], powered_from_sq(g * g, inst.p()))
    };
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut stack = vec![s];
        seen[s] = true;
        let mut linked = false;
        while let Some(u) = stack.pop() {
            linked |= reaches(u);
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        if !linked {
            return false;
        }
    }
    true
}

/// Exhaustive search over every tuple of candidate levels.
pub fn oracle_enumerate<T: Scalar>(
    inst: &Instance<T>,
    region: Region<'_, T>,
) -> Result<Solution<T>> {
    check_budget("oracle_enumerate", inst.n(), ORACLE_CAP)?;
    let levels = candidate_levels(inst, region)?;
    let n = inst.n();
    let mut digits = vec![0usize; n];
    let mut best: Option<(T, Vec<T>)> = None;
    loop {
        let psi: Vec<T> = (0..n).map(|v| levels.of(v)[digits[v]]).collect();
        let value: T = psi.iter().copied().sum();
        let worth = best
            .as_ref()
            .is_none_or(|(bv, b)| improves(value, &psi, *bv, b));
        if worth {
            let pv = PowerVector::new(psi.clone())?;
            let ok = match region {
                Region::Interior => is_connected_pa(inst, &pv),
                Region::Boundary(r) => is_boundary_pa(inst, r, &pv),
            };
            if ok {
                best = Some((value, psi));
            }
        }
        // Odometer increment.
        let mut k = 0;
        loop {
            if k == n {
                let (_, psi) = best.expect("the all-maximum tuple is always feasible");
                let powers = PowerVector::new(psi)?;
                return Ok(match region {
                    Region::Interior => Solution::Interior(PaSolution {
                        value: powers.total(),
                        powers,
                        connected: true,
                    }),
                    Region::Boundary(r) => {
                        let prob = Problem::new(inst, Region::Boundary(r))?;
                        Solution::Boundary(boundary_solution(&prob, powers.as_slice().to_vec())?)
                    }
                });
            }
            digits[k] += 1;
            if digits[k] < levels.of(k).len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::build_mst;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(xs: &[f64], p: f64) -> Instance<f64> {
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        Instance::from_rows(1, p, &rows).unwrap()
    }

    fn random_instance(rng: &mut ChaCha8Rng, n: usize, d: usize, p: f64) -> Instance<f64> {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen()).collect())
            .collect();
        Instance::from_rows(d, p, &rows).unwrap()
    }

    #[test]
    fn levels_examples() {
        let lv = candidate_levels(&line(&[0.0, 0.5, 1.0], 2.0), Region::Interior).unwrap();
        assert_eq!(lv.of(1), &[0.25]);
        assert_eq!(lv.of(0), &[0.25, 1.0]);
        let one = candidate_levels(&line(&[0.3], 2.0), Region::Interior).unwrap();
        assert_eq!(one.of(0), &[0.0]);
        let unit = HyperRect::unit(1);
        let b = candidate_levels(&line(&[0.1], 1.0), Region::Boundary(&unit)).unwrap();
        assert_eq!(b.of(0), &[0.0, 0.1]);
    }

    #[test]
    fn levels_reject_points_outside_rectangle() {
        let r = HyperRect::new(vec![0.0], vec![0.5]).unwrap();
        assert!(candidate_levels(&line(&[0.7], 1.0), Region::Boundary(&r)).is_err());
    }

    #[test]
    fn exact_examples() {
        let pair = exact_pa(&line(&[0.3, 0.7], 2.0), DEFAULT_BUDGET).unwrap();
        assert!((pair.value - 0.32).abs() < 1e-12);
        assert!((pair.powers[0] - 0.16).abs() < 1e-12 && (pair.powers[1] - 0.16).abs() < 1e-12);

        let star = exact_pa(&line(&[0.0, 0.5, 1.0], 2.0), DEFAULT_BUDGET).unwrap();
        assert!((star.value - 0.75).abs() < 1e-12);

        // Brute force over levels {0.04,1} x {0.04,0.64} x {0.64,1}: node 2 must
        // pay 0.64 and the cheapest partner is node 1.
        let s = exact_pa(&line(&[0.0, 0.2, 1.0], 2.0), DEFAULT_BUDGET).unwrap();
        assert!((s.value - 1.32).abs() < 1e-12);
        let expect = [0.04, 0.64, 0.64];
        for (a, b) in s.powers.as_slice().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inst = random_instance(&mut rng, 13, 2, 2.0);
        match exact_pa(&inst, DEFAULT_BUDGET) {
            Err(Error::Capacity { n, budget, .. }) => assert_eq!((n, budget), (13, 12)),
            other => panic!("expected capacity error, got {other:?}"),
        }
        let eight = random_instance(&mut rng, 8, 2, 2.0);
        assert!(matches!(
            oracle_enumerate(&eight, Region::Interior),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn boundary_examples() {
        let unit = HyperRect::unit(1);
        let single = exact_pa_boundary(&line(&[0.37], 2.0), &unit, DEFAULT_BUDGET).unwrap();
        assert_eq!(single.value, 0.0);

        // Enumeration over {0.1,0.8}^2: both nodes take the wall at 0.1.
        let apart = exact_pa_boundary(&line(&[0.1, 0.9], 1.0), &unit, DEFAULT_BUDGET).unwrap();
        assert!((apart.value - 0.2).abs() < 1e-12);
        assert_eq!(apart.boundary_links, vec![0, 1]);

        // Enumeration over {0.1,0.45}^2: the mutual link wins.
        let close = exact_pa_boundary(&line(&[0.45, 0.55], 1.0), &unit, DEFAULT_BUDGET).unwrap();
        assert!((close.value - 0.2).abs() < 1e-12);
        assert!(close.boundary_links.is_empty());

        assert!(exact_pa_boundary(
            &line(&[0.45], 1.0),
            &HyperRect::new(vec![0.5], vec![1.0]).unwrap(),
            12
        )
        .is_err());
    }

    #[test]
    fn oracle_examples() {
        let s = oracle_enumerate(&line(&[0.0, 0.5, 1.0], 2.0), Region::Interior).unwrap();
        assert!((s.value() - 0.75).abs() < 1e-12);
        let one = oracle_enumerate(&line(&[0.6], 2.0), Region::Interior).unwrap();
        assert_eq!(one.value(), 0.0);
    }

    #[test]
    fn branch_and_bound_agrees_with_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..60 {
            let n = rng.gen_range(1..=6);
            let d = rng.gen_range(1..=3);
            let p = [1.0, 2.0, 3.0][rng.gen_range(0..3)];
            let inst = random_instance(&mut rng, n, d, p);
            let bb = exact_pa(&inst, DEFAULT_BUDGET).unwrap();
            let or = oracle_enumerate(&inst, Region::Interior).unwrap();
            assert!((bb.value - or.value()).abs() <= 1e-9);

            let r = HyperRect::unit(d);
            let bb = exact_pa_boundary(&inst, &r, DEFAULT_BUDGET).unwrap();
            let or = oracle_enumerate(&inst, Region::Boundary(&r)).unwrap();
            assert!((bb.value - or.value()).abs() <= 1e-9);
        }
    }

    #[test]
    fn optimum_is_locally_minimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let n = rng.gen_range(2..=7);
            let inst = random_instance(&mut rng, n, 2, 2.0);
            let lv = candidate_levels(&inst, Region::Interior).unwrap();
            let sol = exact_pa(&inst, DEFAULT_BUDGET).unwrap();
            assert!(is_connected_pa(&inst, &sol.powers));
            for v in 0..n {
                let levels = lv.of(v);
                let at = levels.iter().position(|&x| x == sol.powers[v]).unwrap();
                if at > 0 {
                    let mut lowered = sol.powers.as_slice().to_vec();
                    lowered[v] = levels[at - 1];
                    assert!(!is_connected_pa(&inst, &PowerVector::new(lowered).unwrap()));
                }
            }

            let r = HyperRect::unit(2);
            let lvb = candidate_levels(&inst, Region::Boundary(&r)).unwrap();
            let b = exact_pa_boundary(&inst, &r, DEFAULT_BUDGET).unwrap();
            assert!(is_boundary_pa(&inst, &r, &b.powers));
            for v in 0..n {
                let levels = lvb.of(v);
                let at = levels.iter().position(|&x| x == b.powers[v]).unwrap();
                if at > 0 {
                    let mut lowered = b.powers.as_slice().to_vec();
                    lowered[v] = levels[at - 1];
                    assert!(!is_boundary_pa(
                        &inst,
                        &r,
                        &PowerVector::new(lowered).unwrap()
                    ));
                }
            }
        }
    }

    #[test]
    fn sandwich_and_boundary_dominance() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..40 {
            let n = rng.gen_range(1..=9);
            let d = rng.gen_range(1..=3);
            let inst = random_instance(&mut rng, n, d, 2.0);
            let pa = exact_pa(&inst, DEFAULT_BUDGET).unwrap();
            let mst = build_mst(&inst).total;
            let pt = pt_heuristic(&inst).value;
            assert!(crate::graphs::sandwich_holds(mst, pa.value, pt));
            let pab = exact_pa_boundary(&inst, &HyperRect::unit(d), DEFAULT_BUDGET).unwrap();
            assert!(pab.value <= pa.value + 1e-9);
        }
    }

    #[test]
    fn twelve_points_finish() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let inst = random_instance(&mut rng, 12, 2, 2.0);
        let s = exact_pa(&inst, DEFAULT_BUDGET).unwrap();
        assert!(s.value <= pt_heuristic(&inst).value + 1e-12);
        assert!(s.value + 1e-12 >= build_mst(&inst).total);
    }

    #[test]
    fn works_in_f32() {
        let inst = Instance::<f32>::from_rows(1, 2.0, &[vec![0.0], vec![0.5], vec![1.0]]).unwrap();
        let s = exact_pa(&inst, DEFAULT_BUDGET).unwrap();
        assert!((s.value - 0.75).abs() < 1e-5);
    }
}
