use std::collections::HashMap;

/// Tolerance-based point hashing used to merge coincident nodes.
#[derive(Debug, Clone)]
pub struct PointLocator<const D: usize> {
    tol: f64,
    buckets: HashMap<[i64; D], Vec<usize>>,
    points: Vec<[f64; D]>,
}

impl<const D: usize> PointLocator<D> {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            buckets: HashMap::new(),
            points: Vec::new(),
        }
    }

    fn key(&self, p: &[f64; D]) -> [i64; D] {
        std::array::from_fn(|k| (p[k] / self.tol).round() as i64)
    }

    pub fn find(&self, p: &[f64; D]) -> Option<usize> {
        let base = self.key(p);
        let mut offset = [-1i64; D];
        loop {
            let key: [i64; D] = std::array::from_fn(|k| base[k] + offset[k]);
            if let Some(ids) = self.buckets.get(&key) {
                for &id in ids {
                    let q = &self.points[id];
                    if (0..D).all(|k| (q[k] - p[k]).abs() <= self.tol) {
                        return Some(id);
                    }
                }
            }
            // odometer over {-1, 0, 1}^D
            let mut k = 0;
            loop {
                if k == D {
                    return None;
                }
                offset[k] += 1;
                if offset[k] <= 1 {
                    break;
                }
                offset[k] = -1;
                k += 1;
            }
        }
    }

    /// Returns the id of an existing coincident point, or inserts `p`.
    pub fn insert(&mut self, p: [f64; D]) -> (usize, bool) {
        if let Some(id) = self.find(&p) {
            return (id, false);
        }
        let id = self.points.len();
        let key = self.key(&p);
        self.buckets.entry(key).or_default().push(id);
        self.points.push(p);
        (id, true)
    }

    pub fn into_points(self) -> Vec<[f64; D]> {
        self.points
    }
}
