//! Symmetric tridiagonal factorizations.

/// `LDLᵀ` factor of a symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub(crate) struct TridiagLdl {
    pivots: Vec<f64>,
    mult: Vec<f64>,
}

impl TridiagLdl {
    /// Factors the matrix with diagonal `diag` and off-diagonal `off`
    /// (`off[i]` couples `i` and `i+1`). Returns `None` on a non-positive pivot.
    pub(crate) fn new(diag: &[f64], off: &[f64]) -> Option<Self> {
        let n = diag.len();
        let mut pivots = Vec::with_capacity(n);
        let mut mult = Vec::with_capacity(n.saturating_sub(1));
        let mut d = diag[0];
        for i in 0..n {
            if i > 0 {
                let l = off[i - 1] / pivots[i - 1];
                mult.push(l);
                d = diag[i] - l * off[i - 1];
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            pivots.push(d);
        }
        Some(Self { pivots, mult })
    }

    pub(crate) fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.pivots.len();
        let mut x = rhs.to_vec();
        for i in 1..n {
            x[i] -= self.mult[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] /= self.pivots[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.mult[i] * x[i + 1];
        }
        x
    }
}

/// `y = A x` for a symmetric tridiagonal `A`.
pub(crate) fn tridiag_mul(diag: &[f64], off: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut y: Vec<f64> = diag.iter().zip(x).map(|(d, v)| d * v).collect();
    for i in 0..n - 1 {
        y[i] += off[i] * x[i + 1];
        y[i + 1] += off[i] * x[i];
    }
    y
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
