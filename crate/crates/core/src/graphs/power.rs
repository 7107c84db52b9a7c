use serde::Serialize;

use super::{build_mst, Instance, MstSummary};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-node transmit powers, in units of distance^p.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PowerVector<T>(Vec<T>);

impl<T: Scalar> PowerVector<T> {
    pub fn new(powers: Vec<T>) -> Result<Self> {
        if let Some(i) = powers.iter().position(|&x| !x.is_finite() || x < T::zero()) {
            return Err(Error::input(format!(
                "power of node {i} must be finite and non-negative"
            )));
        }
        Ok(PowerVector(powers))
    }

    pub fn zeros(n: usize) -> Self {
        PowerVector(vec![T::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn total(&self) -> T {
        self.0.iter().copied().sum()
    }
}

impl<T> std::ops::Index<usize> for PowerVector<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

/// A power assignment with its total and whether it induces a connected graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaSolution<T> {
    pub powers: PowerVector<T>,
    pub value: T,
    pub connected: bool,
}

impl<T: Scalar> PaSolution<T> {
    pub fn from_powers(inst: &Instance<T>, powers: PowerVector<T>) -> Self {
        let connected = is_connected_pa(inst, &powers);
        PaSolution {
            value: powers.total(),
            powers,
            connected,
        }
    }
}

/// Powers induced by an edge set: each node gets the largest powered length
/// among its incident edges, isolated nodes get zero.
pub fn induced_power<T: Scalar>(inst: &Instance<T>, edges: &[(usize, usize)]) -> PowerVector<T> {
    let mut psi = vec![T::zero(); inst.n()];
    for &(u, v) in edges {
        let w = inst.powered(u, v);
        psi[u] = psi[u].max(w);
        psi[v] = psi[v].max(w);
    }
    PowerVector(psi)
}

#[inline]
pub(crate) fn covers<T: Scalar>(power: T, need: T) -> bool {
    power + T::cover_slack() >= need
}

/// Edges `{u, v}` whose powered length both endpoints can afford, sorted.
pub fn induced_graph<T: Scalar>(inst: &Instance<T>, psi: &PowerVector<T>) -> Vec<(usize, usize)> {
    assert_eq!(
        psi.len(),
        inst.n(),
        "power vector length must match the instance"
    );
    let n = inst.n();
    let mut out = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let w = inst.powered(u, v);
            if covers(psi[u], w) && covers(psi[v], w) {
                out.push((u, v));
            }
        }
    }
    out
}

/// Whether the induced graph is connected (breadth-first search).
pub fn is_connected_pa<T: Scalar>(inst: &Instance<T>, psi: &PowerVector<T>) -> bool {
    let n = inst.n();
    if n <= 1 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for (u, v) in induced_graph(inst, psi) {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

/// The MST heuristic applied to an already computed tree.
pub fn pt_from_mst<T: Scalar>(inst: &Instance<T>, mst: &MstSummary<T>) -> PaSolution<T> {
    let mut psi = vec![T::zero(); inst.n()];
    for e in &mst.edges {
        psi[e.u] = psi[e.u].max(e.weight);
        psi[e.v] = psi[e.v].max(e.weight);
    }
    let powers = PowerVector(psi);
    PaSolution {
        value: powers.total(),
        powers,
        connected: true,
    }
}

/// The MST heuristic: every node gets the powered length of its longest
/// incident tree edge.
pub fn pt_heuristic<T: Scalar>(inst: &Instance<T>) -> PaSolution<T> {
    pt_from_mst(inst, &build_mst(inst))
}

/// `mst <= pa <= pt <= 2 mst`, each step within the value tolerance.
pub fn sandwich_holds<T: Scalar>(mst: T, pa: T, pt: T) -> bool {
    let tol = T::value_tol();
    mst <= pa + tol && pa <= pt + tol && pt <= mst + mst + tol
}

pub fn sandwich_check<T: Scalar>(inst: &Instance<T>, pa_value: T) -> bool {
    let mst = build_mst(inst);
    let pt = pt_from_mst(inst, &mst);
    sandwich_holds(mst.total, pa_value, pt.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64], p: f64) -> Instance<f64> {
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        Instance::from_rows(1, p, &rows).unwrap()
    }

    fn pv(v: &[f64]) -> PowerVector<f64> {
        PowerVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn induced_power_examples() {
        let inst = line(&[0.0, 0.5, 1.0], 2.0);
        assert_eq!(
            induced_power(&inst, &[(0, 1), (1, 2)]).as_slice(),
            &[0.25, 0.25, 0.25]
        );
        assert_eq!(induced_power(&inst, &[]).as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn star_powers_on_symmetric_triple() {
        // {-a, 0, a} shifted into [0,1] with a = 0.3: every node needs a^p.
        let inst = line(&[0.2, 0.5, 0.8], 3.0);
        let psi = induced_power(&inst, &[(0, 1), (1, 2)]);
        for &x in psi.as_slice() {
            assert!((x - 0.3f64.powi(3)).abs() < 1e-12);
        }
    }

    #[test]
    fn induced_graph_examples() {
        let inst = line(&[0.0, 0.5, 1.0], 2.0);
        assert_eq!(
            induced_graph(&inst, &pv(&[0.25, 0.25, 0.25])),
            vec![(0, 1), (1, 2)]
        );
        let full = line(&[0.0, 0.3, 0.9, 1.0], 1.0);
        assert_eq!(induced_graph(&full, &pv(&[1.0; 4])).len(), 6);
        assert!(induced_graph(&full, &pv(&[0.0; 4])).is_empty());
        let dup = line(&[0.4, 0.4], 1.0);
        assert_eq!(induced_graph(&dup, &pv(&[0.0, 0.0])), vec![(0, 1)]);
    }

    #[test]
    fn connectivity_examples() {
        let inst = line(&[0.0, 0.5, 1.0], 2.0);
        assert!(is_connected_pa(&inst, &pv(&[0.25, 0.25, 0.25])));
        assert!(!is_connected_pa(&inst, &pv(&[0.25, 0.25, 0.0])));
        assert!(is_connected_pa(&line(&[0.3], 2.0), &pv(&[0.0])));
    }

    #[test]
    fn pt_examples() {
        assert!((pt_heuristic(&line(&[0.0, 0.5, 1.0], 2.0)).value - 0.75).abs() < 1e-15);

        let inst = line(&[0.0, 0.1, 1.0], 1.0);
        let pt = pt_heuristic(&inst);
        assert_eq!(pt.powers.as_slice(), &[0.1, 0.9, 0.9]);
        assert!((pt.value - 1.9).abs() < 1e-15);
        assert!((build_mst(&inst).total - 1.0).abs() < 1e-15);

        let rows = vec![
            vec![0.25, 0.25],
            vec![0.75, 0.25],
            vec![0.25, 0.75],
            vec![0.75, 0.75],
        ];
        let sq = Instance::from_rows(2, 1.0f64, &rows).unwrap();
        assert!((pt_heuristic(&sq).value - 2.0).abs() < 1e-15);
        assert!(pt_heuristic(&sq).connected);
    }

    #[test]
    fn sandwich_examples() {
        assert!(sandwich_check(&line(&[0.0, 0.5, 1.0], 2.0), 0.75));
        let pair = line(&[0.3, 0.7], 2.0);
        assert!(sandwich_check(&pair, 0.32));
        assert!(sandwich_check(&line(&[0.3], 2.0), 0.0));
        assert!(!sandwich_check(&pair, 0.1));
    }

    #[test]
    fn power_vector_validation() {
        assert!(PowerVector::new(vec![0.1, -0.2]).is_err());
        assert!(PowerVector::new(vec![f64::INFINITY]).is_err());
    }
}
