use crate::error::Result;

/// Explicit Runge-Kutta method given by its Butcher tableau.
#[derive(Debug, Clone, PartialEq)]
pub struct RkScheme {
    pub name: &'static str,
    /// Strictly lower-triangular stage coefficients `a[l][m]`, `m < l`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl RkScheme {
    pub fn rk4() -> Self {
        Self {
            name: "rk4",
            a: vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
            b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            c: vec![0.0, 0.5, 0.5, 1.0],
        }
    }

    pub fn ssp_rk3() -> Self {
        Self {
            name: "ssprk3",
            a: vec![vec![], vec![1.0], vec![0.25, 0.25]],
            b: vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
            c: vec![0.0, 1.0, 0.5],
        }
    }

    pub fn euler() -> Self {
        Self {
            name: "euler",
            a: vec![vec![]],
            b: vec![1.0],
            c: vec![0.0],
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "rk4" => Some(Self::rk4()),
            "ssprk3" => Some(Self::ssp_rk3()),
            "euler" => Some(Self::euler()),
            _ => None,
        }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// One step `u + τ Σ b_l K_l` with `K_l = f(W_l)`.
    pub fn step(&self, u: &[f64], tau: f64, mut f: impl FnMut(&[f64]) -> Result<Vec<f64>>) -> Result<Vec<f64>> {
        let mut ks: Vec<Vec<f64>> = Vec::with_capacity(self.stages());
        let mut w = u.to_vec();
        for l in 0..self.stages() {
            w.copy_from_slice(u);
            for (m, &alm) in self.a[l].iter().enumerate() {
                if alm != 0.0 {
                    w.iter_mut().zip(&ks[m]).for_each(|(wi, ki)| *wi += tau * alm * ki);
                }
            }
            ks.push(f(&w)?);
        }
        let mut out = u.to_vec();
        for (bl, k) in self.b.iter().zip(&ks) {
            out.iter_mut().zip(k).for_each(|(o, ki)| *o += tau * bl * ki);
        }
        Ok(out)
    }
}
