//! Static kd-tree over a point set, used for nearest-neighbour work in the
//! spanning tree builder and the empty-ball probe.

use crate::scalar::Scalar;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
pub(crate) struct KdNode {
    pub start: usize,
    pub end: usize,
    /// Children, `None` for leaves.
    pub children: Option<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct KdTree<T> {
    dim: usize,
    /// Row-major coordinates in original point order.
    coords: Vec<T>,
    /// Point indices, permuted so every node owns a contiguous range.
    pub(crate) order: Vec<usize>,
    pub(crate) nodes: Vec<KdNode>,
    /// Row-major bounding boxes, `dim` entries per node.
    lo: Vec<T>,
    hi: Vec<T>,
}

impl<T: Scalar> KdTree<T> {
    /// Builds a tree over `n = coords.len() / dim` points stored row-major.
    pub fn build(coords: Vec<T>, dim: usize) -> Self {
        assert!(dim > 0 && coords.len().is_multiple_of(dim));
        let n = coords.len() / dim;
        let mut tree = KdTree {
            dim,
            coords,
            order: (0..n).collect(),
            nodes: Vec::with_capacity(2 * n / LEAF_SIZE + 1),
            lo: Vec::new(),
            hi: Vec::new(),
        };
        if n > 0 {
            tree.build_node(0, n);
        }
        tree
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(KdNode {
            start,
            end,
            children: None,
        });
        let d = self.dim;
        let mut lo = vec![T::infinity(); d];
        let mut hi = vec![T::neg_infinity(); d];
        for &i in &self.order[start..end] {
            for k in 0..d {
                let c = self.coords[i * d + k];
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        let axis = (0..d)
            .max_by(|&a, &b| {
                (hi[a] - lo[a])
                    .partial_cmp(&(hi[b] - lo[b]))
                    .unwrap()
                    .then(b.cmp(&a))
            })
            .unwrap();
        let spread = hi[axis] - lo[axis];
        self.lo.extend_from_slice(&lo);
        self.hi.extend_from_slice(&hi);

        if end - start > LEAF_SIZE && spread > T::zero() {
            let mid = start + (end - start) / 2;
            let coords = &self.coords;
            self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                coords[a * d + axis]
                    .partial_cmp(&coords[b * d + axis])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let left = self.build_node(start, mid);
            let right = self.build_node(mid, end);
            self.nodes[id].children = Some((left, right));
        }
        id
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Squared distance from `q` to the bounding box of `node`.
    #[inline]
    pub(crate) fn box_dist_sq(&self, node: usize, q: &[T]) -> T {
        let base = node * self.dim;
        let mut acc = T::zero();
        for (k, &c) in q.iter().enumerate() {
            let lo = self.lo[base + k];
            let hi = self.hi[base + k];
            let t = if c < lo {
                lo - c
            } else if c > hi {
                c - hi
            } else {
                T::zero()
            };
            acc = acc + t * t;
        }
        acc
    }

    /// Nearest point to `q` as `(squared distance, index)`; ties go to the
    /// smaller index. `None` on an empty tree.
    pub fn nearest(&self, q: &[T]) -> Option<(T, usize)> {
        if self.is_empty() {
            return None;
        }
        let mut best = (T::infinity(), usize::MAX);
        let mut stack = vec![0usize];
        while let Some(node) = stack.pop() {
            if self.box_dist_sq(node, q) > best.0 {
                continue;
            }
            let KdNode {
                start,
                end,
                children,
            } = self.nodes[node];
            match children {
                None => {
                    for &i in &self.order[start..end] {
                        let d2 = crate::geometry::dist_sq(q, self.point(i));
                        if d2 < best.0 || (d2 == best.0 && i < best.1) {
                            best = (d2, i);
                        }
                    }
                }
                Some((l, r)) => {
                    let (near, far) = if self.box_dist_sq(l, q) <= self.box_dist_sq(r, q) {
                        (l, r)
                    } else {
                        (r, l)
                    };
                    stack.push(far);
                    stack.push(near);
                }
            }
        }
        Some(best)
    }
}
