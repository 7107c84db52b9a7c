use std::cmp::Ordering;

use serde::Serialize;

use super::{Edge, Instance};
use crate::dsu::UnionFind;
use crate::geometry::{dist_sq, powered_from_sq};
use crate::kdtree::{KdNode, KdTree};
use crate::scalar::Scalar;

/// Largest instance handled by dense Prim; larger ones go through the kd-tree.
const DENSE_LIMIT: usize = 2048;

/// An edge keyed by its squared Euclidean length.
///
/// Ordering by `(d2, u, v)` is a strict total order on distinct edges, so the
/// minimum spanning tree under it is unique and every builder below returns
/// the same edge set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SqEdge<T> {
    pub d2: T,
    pub u: usize,
    pub v: usize,
}

impl<T: Scalar> SqEdge<T> {
    #[inline]
    pub fn new(a: usize, b: usize, d2: T) -> Self {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        SqEdge { d2, u, v }
    }

    #[inline]
    pub fn key_cmp(&self, other: &Self) -> Ordering {
        self.d2
            .partial_cmp(&other.d2)
            .unwrap_or(Ordering::Equal)
            .then(self.u.cmp(&other.u))
            .then(self.v.cmp(&other.v))
    }

    #[inline]
    fn lt(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Less
    }
}

/// Minimum spanning tree with p-powered edge weights and derived statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MstSummary<T> {
    /// Tree edges sorted by index pair.
    pub edges: Vec<Edge<T>>,
    /// Sum of p-powered edge lengths.
    pub total: T,
    /// Euclidean length of the longest edge.
    pub longest_edge: T,
    pub max_degree: usize,
    /// Sum of the `heavy_count` heaviest edge weights.
    pub heavy: T,
    /// `total - heavy`, summed over the remaining edges.
    pub light: T,
    /// `floor(n/2)` edges: `m` for `n = 2m+1`, and the middle edge joins the
    /// heavy side when `n` is even.
    pub heavy_count: usize,
}

impl<T: Scalar> MstSummary<T> {
    pub(crate) fn from_sq_edges(inst: &Instance<T>, mut sq: Vec<SqEdge<T>>) -> Self {
        let n = inst.n();
        debug_assert_eq!(sq.len(), n.saturating_sub(1));
        let p = inst.p();

        let mut degree = vec![0usize; n];
        let mut longest_sq = T::zero();
        for e in &sq {
            degree[e.u] += 1;
            degree[e.v] += 1;
            longest_sq = longest_sq.max(e.d2);
        }

        // Heavy side: heaviest first, ties by index pair.
        sq.sort_by(|a, b| {
            b.d2.partial_cmp(&a.d2)
                .unwrap()
                .then(a.u.cmp(&b.u))
                .then(a.v.cmp(&b.v))
        });
        let heavy_count = n / 2;
        let heavy = sq[..heavy_count]
            .iter()
            .map(|e| powered_from_sq(e.d2, p))
            .sum();
        let light = sq[heavy_count..]
            .iter()
            .map(|e| powered_from_sq(e.d2, p))
            .sum();

        sq.sort_by_key(|a| (a.u, a.v));
        let edges: Vec<Edge<T>> = sq
            .iter()
            .map(|e| Edge {
                u: e.u,
                v: e.v,
                weight: powered_from_sq(e.d2, p),
            })
            .collect();
        let total = edges.iter().map(|e| e.weight).sum();

        MstSummary {
            edges,
            total,
            longest_edge: longest_sq.sqrt(),
            max_degree: degree.into_iter().max().unwrap_or(0),
            heavy,
            light,
            heavy_count,
        }
    }

    /// Sum of the `k` heaviest edge weights.
    pub fn heaviest_sum(&self, k: usize) -> T {
        let mut w: Vec<T> = self.edges.iter().map(|e| e.weight).collect();
        w.sort_by(|a, b| b.partial_cmp(a).unwrap());
        w.into_iter().take(k).sum()
    }

    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.u, e.v)).collect()
    }
}

/// Minimum spanning tree of the instance under Euclidean (equivalently
/// p-powered) edge lengths.
pub fn build_mst<T: Scalar>(inst: &Instance<T>) -> MstSummary<T> {
    MstSummary::from_sq_edges(inst, mst_sq_edges(inst))
}

/// In one dimension the tree is the path through the sorted points.
fn sorted_path<T: Scalar>(inst: &Instance<T>) -> Vec<SqEdge<T>> {
    let mut idx: Vec<usize> = (0..inst.n()).collect();
    idx.sort_by(|&a, &b| {
        inst.point(a)[0]
            .partial_cmp(&inst.point(b)[0])
            .unwrap()
            .then(a.cmp(&b))
    });
    idx.windows(2)
        .map(|w| SqEdge::new(w[0], w[1], inst.dist_sq(w[0], w[1])))
        .collect()
}

/// O(n^2) Prim over the complete graph.
fn dense_prim<T: Scalar>(inst: &Instance<T>) -> Vec<SqEdge<T>> {
    let n = inst.n();
    let mut in_tree = vec![false; n];
    let mut best: Vec<Option<SqEdge<T>>> = vec![None; n];
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    let mut last = 0usize;
    in_tree[0] = true;
    for _ in 1..n {
        let mut pick: Option<(usize, SqEdge<T>)> = None;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let cand = SqEdge::new(last, j, inst.dist_sq(last, j));
            let slot = &mut best[j];
            if slot.is_none_or(|b| cand.lt(&b)) {
                *slot = Some(cand);
            }
            let b = slot.unwrap();
            if pick.is_none_or(|(_, pb)| b.lt(&pb)) {
                pick = Some((j, b));
            }
        }
        let (j, e) = pick.expect("graph is complete");
        in_tree[j] = true;
        out.push(e);
        last = j;
    }
    out
}

/// Borůvka rounds with kd-tree searches for each point's nearest foreign
/// neighbour. Exact: every component adds its minimum outgoing edge under the
/// strict edge order.
fn boruvka<T: Scalar>(inst: &Instance<T>) -> Vec<SqEdge<T>> {
    let n = inst.n();
    let tree = KdTree::build(inst.flat_coords(), inst.d());
    let mut uf = UnionFind::new(n);
    let mut out = Vec::with_capacity(n - 1);
    let mut comp = vec![0usize; n];
    let mut node_comp = vec![usize::MAX; tree.nodes.len()];
    let mut best: Vec<Option<SqEdge<T>>> = vec![None; n];

    while uf.components() > 1 {
        for (i, c) in comp.iter_mut().enumerate() {
            *c = uf.find(i);
        }
        label_nodes(&tree, &comp, &mut node_comp);
        best.iter_mut().for_each(|b| *b = None);

        for q in 0..n {
            let c = comp[q];
            best[c] = nearest_foreign(&tree, &comp, &node_comp, q, best[c]);
        }
        for c in 0..n {
            if let Some(e) = best[c] {
                if comp[c] == c && uf.union(e.u, e.v) {
                    out.push(e);
                }
            }
        }
    }
    out
}

/// Marks each node with the component shared by all of its points, or
/// `usize::MAX` when mixed.
fn label_nodes<T: Scalar>(tree: &KdTree<T>, comp: &[usize], node_comp: &mut [usize]) {
    // Children always have larger ids than their parent.
    for id in (0..tree.nodes.len()).rev() {
        let KdNode {
            start,
            end,
            children,
        } = tree.nodes[id];
        node_comp[id] = match children {
            Some((l, r)) => {
                if node_comp[l] == node_comp[r] {
                    node_comp[l]
                } else {
                    usize::MAX
                }
            }
            None => {
                let first = comp[tree.order[start]];
                if tree.order[start..end].iter().all(|&i| comp[i] == first) {
                    first
                } else {
                    usize::MAX
                }
            }
        };
    }
}

fn nearest_foreign<T: Scalar>(
    tree: &KdTree<T>,
    comp: &[usize],
    node_comp: &[usize],
    q: usize,
    mut best: Option<SqEdge<T>>,
) -> Option<SqEdge<T>> {
    let c = comp[q];
    let qc = tree.point(q);
    let mut stack = vec![0usize];
    while let Some(node) = stack.pop() {
        if node_comp[node] == c {
            continue;
        }
        // Equal distances must still be visited: the index pair may win the tie.
        if let Some(b) = best {
            if tree.box_dist_sq(node, qc) > b.d2 {
                continue;
            }
        }
        let KdNode {
            start,
            end,
            children,
        } = tree.nodes[node];
        match children {
            None => {
                for &r in &tree.order[start..end] {
                    if comp[r] == c {
                        continue;
                    }
                    let cand = SqEdge::new(q, r, dist_sq(qc, tree.point(r)));
                    if best.is_none_or(|b| cand.lt(&b)) {
                        best = Some(cand);
                    }
                }
            }
            Some((l, r)) => {
                let (near, far) = if tree.box_dist_sq(l, qc) <= tree.box_dist_sq(r, qc) {
                    (l, r)
                } else {
                    (r, l)
                };
                stack.push(far);
                stack.push(near);
            }
        }
    }
    best
}

/// Edges of the unique minimum spanning tree under the `(d2, u, v)` order.
pub(crate) fn mst_sq_edges<T: Scalar>(inst: &Instance<T>) -> Vec<SqEdge<T>> {
    if inst.n() <= 1 {
        Vec::new()
    } else if inst.d() == 1 {
        sorted_path(inst)
    } else if inst.n() <= DENSE_LIMIT {
        dense_prim(inst)
    } else {
        boruvka(inst)
    }
}

/// MST after moving point `extra` to `z`.
///
/// `coords` holds all `n` points row-major (the old position of `extra` is
/// ignored); `base` is the tree of the other `n - 1` points in this
/// numbering, sorted ascending by edge key. A new vertex can only use old tree
/// edges and its own edges, so Kruskal over their union is exact.
pub(crate) fn kruskal_with_extra_point<T: Scalar>(
    coords: &[T],
    dim: usize,
    base: &[SqEdge<T>],
    extra: usize,
    z: &[T],
) -> Vec<SqEdge<T>> {
    let n = coords.len() / dim;
    let mut star: Vec<SqEdge<T>> = (0..n)
        .filter(|&j| j != extra)
        .map(|j| SqEdge::new(extra, j, dist_sq(z, &coords[j * dim..(j + 1) * dim])))
        .collect();
    star.sort_by(|a, b| a.key_cmp(b));

    let mut uf = UnionFind::new(n);
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    let (mut i, mut j) = (0, 0);
    while out.len() + 1 < n {
        let take_base = match (base.get(i), star.get(j)) {
            (Some(a), Some(b)) => a.lt(b),
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        let e = if take_base {
            i += 1;
            base[i - 1]
        } else {
            j += 1;
            star[j - 1]
        };
        if uf.union(e.u, e.v) {
            out.push(e);
        }
    }
    out
}
