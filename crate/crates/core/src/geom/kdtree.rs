//! Exact k-d tree over 3-vectors.
//!
//! Median-split construction, exact (not approximate) nearest-neighbor and
//! k-NN queries. Built once, read-only afterwards, so it can be shared
//! across worker threads.

use nalgebra::Point3;

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree3 {
    nodes: Vec<Node>,
    /// Points in tree order.
    points: Vec<Point3<f64>>,
    /// Original index of each tree-order point.
    indices: Vec<u32>,
    root: usize,
}

impl KdTree3 {
    pub fn build(points: &[Point3<f64>]) -> Self {
        let mut slots: Vec<(Point3<f64>, u32)> = points
            .iter()
            .zip(0u32..)
            .map(|(p, i)| (*p, i))
            .collect();
        let mut nodes = Vec::new();
        let root = if slots.is_empty() {
            nodes.push(Node::Leaf { start: 0, end: 0 });
            0
        } else {
            let n = slots.len();
            build_rec(&mut slots, 0, n, &mut nodes)
        };
        KdTree3 {
            nodes,
            points: slots.iter().map(|(p, _)| *p).collect(),
            indices: slots.iter().map(|(_, i)| *i).collect(),
            root,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exact nearest neighbor: `(original index, distance)`. `None` on an
    /// empty tree.
    pub fn nearest(&self, query: &Point3<f64>) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY); // (tree slot, squared dist)
        self.search(self.root, query, &mut best);
        Some((self.indices[best.0] as usize, best.1.sqrt()))
    }

    /// Exact distance from `query` to its nearest neighbor.
    pub fn nearest_distance(&self, query: &Point3<f64>) -> f64 {
        self.nearest(query).map_or(f64::INFINITY, |(_, d)| d)
    }

    /// The `k` nearest neighbors sorted by ascending distance, ties broken
    /// by original index. Returns fewer when the tree is smaller than `k`.
    pub fn k_nearest(&self, query: &Point3<f64>, k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let mut heap = KBest::new(k);
        self.search_k(self.root, query, &mut heap);
        let mut out: Vec<(usize, f64)> = heap
            .entries
            .iter()
            .map(|&(d2, slot)| (self.indices[slot] as usize, d2.sqrt()))
            .collect();
        out.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        out
    }

    fn search(&self, node: usize, q: &Point3<f64>, best: &mut (usize, f64)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    let d2 = (self.points[slot] - q).norm_squared();
                    if d2 < best.1 {
                        *best = (slot, d2);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = q[axis] - value;
                let (near, far) = if delta <= 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, q, best);
                if delta * delta < best.1 {
                    self.search(far, q, best);
                }
            }
        }
    }

    fn search_k(&self, node: usize, q: &Point3<f64>, heap: &mut KBest) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    let d2 = (self.points[slot] - q).norm_squared();
                    heap.offer(d2, slot);
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = q[axis] - value;
                let (near, far) = if delta <= 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search_k(near, q, heap);
                if !heap.full() || delta * delta < heap.worst() {
                    self.search_k(far, q, heap);
                }
            }
        }
    }
}

fn build_rec(
    slots: &mut [(Point3<f64>, u32)],
    offset: usize,
    len: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    if len <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: offset,
            end: offset + len,
        });
        return nodes.len() - 1;
    }
    // Split the widest axis at the median.
    let sub = &mut slots[offset..offset + len];
    let mut lo = sub[0].0;
    let mut hi = sub[0].0;
    for (p, _) in sub.iter() {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let axis = (0..3)
        .max_by(|&a, &b| (hi[a] - lo[a]).partial_cmp(&(hi[b] - lo[b])).unwrap())
        .unwrap();
    let mid = len / 2;
    sub.select_nth_unstable_by(mid, |a, b| a.0[axis].partial_cmp(&b.0[axis]).unwrap());
    let value = slots[offset + mid].0[axis];
    let left = build_rec(slots, offset, mid, nodes);
    let right = build_rec(slots, offset + mid, len - mid, nodes);
    nodes.push(Node::Split {
        axis,
        value,
        left,
        right,
    });
    nodes.len() - 1
}

/// Bounded max-heap of the k smallest squared distances.
struct KBest {
    k: usize,
    /// (squared distance, tree slot), heap-ordered by distance.
    entries: Vec<(f64, usize)>,
}

impl KBest {
    fn new(k: usize) -> Self {
        KBest {
            k,
            entries: Vec::with_capacity(k),
        }
    }

    fn full(&self) -> bool {
        self.entries.len() == self.k
    }

    fn worst(&self) -> f64 {
        self.entries[0].0
    }

    fn offer(&mut self, d2: f64, slot: usize) {
        if self.entries.len() < self.k {
            self.entries.push((d2, slot));
            self.sift_up(self.entries.len() - 1);
        } else if d2 < self.entries[0].0 {
            self.entries[0] = (d2, slot);
            self.sift_down(0);
        }
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.entries[i].0 > self.entries[parent].0 {
                self.entries.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut largest = i;
            if l < self.entries.len() && self.entries[l].0 > self.entries[largest].0 {
                largest = l;
            }
            if r < self.entries.len() && self.entries[r].0 > self.entries[largest].0 {
                largest = r;
            }
            if largest == i {
                break;
            }
            self.entries.swap(i, largest);
            i = largest;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_points(n: usize, seed: u64) -> Vec<Point3<f64>> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                Point3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
            })
            .collect()
    }

    fn brute_nearest(points: &[Point3<f64>], q: &Point3<f64>) -> (usize, f64) {
        points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (p - q).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap()
    }

    #[test]
    fn nearest_matches_brute_force() {
        let pts = random_points(700, 7);
        let tree = KdTree3::build(&pts);
        for q in random_points(200, 8) {
            let (_, bd) = brute_nearest(&pts, &q);
            let (_, td) = tree.nearest(&q).unwrap();
            assert_eq!(td.to_bits(), bd.to_bits(), "distances must be exact");
        }
    }

    #[test]
    fn k_nearest_matches_brute_force() {
        let pts = random_points(300, 9);
        let tree = KdTree3::build(&pts);
        for q in random_points(50, 10) {
            let got = tree.k_nearest(&q, 8);
            let mut all: Vec<(usize, f64)> = pts
                .iter()
                .enumerate()
                .map(|(i, p)| (i, (p - q).norm()))
                .collect();
            all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
            let want: Vec<(usize, f64)> = all.into_iter().take(8).collect();
            assert_eq!(got.len(), want.len());
            for (g, w) in got.iter().zip(&want) {
                assert_eq!(g.1.to_bits(), w.1.to_bits());
            }
        }
    }

    #[test]
    fn empty_tree() {
        let tree = KdTree3::build(&[]);
        assert!(tree.nearest(&Point3::origin()).is_none());
        assert!(tree.k_nearest(&Point3::origin(), 3).is_empty());
    }

    #[test]
    fn duplicate_points_are_handled() {
        let p = Point3::new(0.5, 0.5, 0.5);
        let pts = vec![p; 40];
        let tree = KdTree3::build(&pts);
        let (_, d) = tree.nearest(&p).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(tree.k_nearest(&p, 5).len(), 5);
    }
}
