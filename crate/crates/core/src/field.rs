//! Nodal values of a multi-component field, stored component-major.

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    ncomp: usize,
    ndof: usize,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(ncomp: usize, ndof: usize) -> Self {
        Self {
            ncomp,
            ndof,
            data: vec![0.0; ncomp * ndof],
        }
    }

    pub fn from_components(components: Vec<Vec<f64>>) -> Self {
        let ncomp = components.len();
        let ndof = components.first().map_or(0, Vec::len);
        assert!(components.iter().all(|c| c.len() == ndof), "ragged components");
        Self {
            ncomp,
            ndof,
            data: components.concat(),
        }
    }

    /// Builds a field from a per-node state function.
    pub fn from_nodes(ncomp: usize, ndof: usize, mut f: impl FnMut(usize) -> Vec<f64>) -> Self {
        let mut out = Self::zeros(ncomp, ndof);
        for i in 0..ndof {
            let u = f(i);
            for c in 0..ncomp {
                out.data[c * ndof + i] = u[c];
            }
        }
        out
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn ndof(&self) -> usize {
        self.ndof
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        &self.data[c * self.ndof..(c + 1) * self.ndof]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.ndof..(c + 1) * self.ndof]
    }

    pub fn get(&self, c: usize, i: usize) -> f64 {
        self.data[c * self.ndof + i]
    }

    pub fn set(&mut self, c: usize, i: usize, v: f64) {
        self.data[c * self.ndof + i] = v;
    }

    /// All components at node `i`.
    pub fn node(&self, i: usize) -> Vec<f64> {
        (0..self.ncomp).map(|c| self.get(c, i)).collect()
    }

    pub fn node_into(&self, i: usize, out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.get(c, i);
        }
    }

    pub fn set_node(&mut self, i: usize, u: &[f64]) {
        for (c, &v) in u.iter().enumerate() {
            self.set(c, i, v);
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &Field) {
        assert_eq!(self.data.len(), x.data.len());
        self.data.iter_mut().zip(&x.data).for_each(|(s, v)| *s += a * v);
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}
