//! Exact nearest-neighbor search over 3D points.
//!
//! A median-split KD-tree stored implicitly in a permuted point array. The
//! returned squared distance is the exact minimum of `squared_distance` over
//! all points, so it agrees bit-for-bit with a linear scan.

const LEAF_SIZE: usize = 8;

#[inline]
pub fn squared_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<[f64; 3]>,
    // Split axis of the node whose pivot sits at this index.
    axes: Vec<u8>,
}

impl KdTree {
    pub fn new(points: &[[f64; 3]]) -> Self {
        let mut tree = KdTree {
            points: points.to_vec(),
            axes: vec![0; points.len()],
        };
        tree.build(0, points.len());
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn build(&mut self, lo: usize, hi: usize) {
        if hi - lo <= LEAF_SIZE {
            return;
        }
        let slice = &mut self.points[lo..hi];
        let mut min = slice[0];
        let mut max = slice[0];
        for p in slice.iter() {
            for k in 0..3 {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        let axis = (0..3)
            .max_by(|&a, &b| (max[a] - min[a]).total_cmp(&(max[b] - min[b])))
            .unwrap_or(0);
        let mid = (hi - lo) / 2;
        slice.select_nth_unstable_by(mid, |a, b| a[axis].total_cmp(&b[axis]));
        self.axes[lo + mid] = axis as u8;
        self.build(lo, lo + mid);
        self.build(lo + mid + 1, hi);
    }

    /// Smallest squared distance from `q` to any point, `None` when empty.
    pub fn nearest_squared(&self, q: [f64; 3]) -> Option<f64> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = f64::INFINITY;
        self.search(q, 0, self.points.len(), &mut best);
        Some(best)
    }

    fn search(&self, q: [f64; 3], lo: usize, hi: usize, best: &mut f64) {
        if hi - lo <= LEAF_SIZE {
            for p in &self.points[lo..hi] {
                let d = squared_distance(q, *p);
                if d < *best {
                    *best = d;
                }
            }
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let pivot = self.points[mid];
        let d = squared_distance(q, pivot);
        if d < *best {
            *best = d;
        }
        let axis = self.axes[mid] as usize;
        let diff = q[axis] - pivot[axis];
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(q, near.0, near.1, best);
        // Every point across the split is at least |diff| away on this axis.
        if diff * diff < *best {
            self.search(q, far.0, far.1, best);
        }
    }
}
