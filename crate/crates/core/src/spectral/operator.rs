//! H as a symmetric tridiagonal matrix.
//!
//! With cell volumes V and face conductances a, the finite-volume H is
//! (Hf)_i = [a_i(f_i − f_{i−1}) − a_{i+1}(f_{i+1} − f_i)]/V_i − 3Q²f_i with a
//! zero ghost past y_max. Conjugating by V^{1/2} gives the symmetric matrix S
//! stored here; eigenvectors of S map back by f = V^{−1/2}v.

use std::sync::Arc;

use crate::error::{BlowupError, Result};
use crate::linalg::solve_tridiagonal;
use crate::radial_core::{kernels, RadialGrid};

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub grid: Arc<RadialGrid>,
    /// Diagonal of S (and of H).
    pub diag: Vec<f64>,
    /// Off-diagonal of S: off[i] couples i and i+1.
    pub off: Vec<f64>,
    sqrt_vol: Vec<f64>,
}

pub fn assemble_operator(grid: Arc<RadialGrid>) -> OperatorMatrix {
    let n = grid.len();
    let a = grid.conductance();
    let v = grid.volumes();
    let y = grid.nodes();
    let diag: Vec<f64> = (0..n).map(|i| (a[i] + a[i + 1]) / v[i] - kernels::potential(y[i])).collect();
    let off: Vec<f64> = (0..n - 1).map(|i| -a[i + 1] / (v[i] * v[i + 1]).sqrt()).collect();
    let sqrt_vol = v.iter().map(|x| x.sqrt()).collect();
    OperatorMatrix { grid, diag, off, sqrt_vol }
}

impl OperatorMatrix {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// H f for samples f (Dirichlet past y_max).
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let v: Vec<f64> = f.iter().zip(&self.sqrt_vol).map(|(x, s)| x * s).collect();
        let sv = self.apply_symmetric(&v);
        sv.iter().zip(&self.sqrt_vol).map(|(x, s)| x / s).collect()
    }

    pub fn apply_pow(&self, f: &[f64], k: usize) -> Vec<f64> {
        let mut out = f.to_vec();
        for _ in 0..k {
            out = self.apply(&out);
        }
        out
    }

    pub fn apply_symmetric(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Solve (H + shift) f = g.
    pub fn solve_shifted(&self, shift: f64, g: &[f64]) -> Result<Vec<f64>> {
        let rhs: Vec<f64> = g.iter().zip(&self.sqrt_vol).map(|(x, s)| x * s).collect();
        let d: Vec<f64> = self.diag.iter().map(|x| x + shift).collect();
        let v = solve_tridiagonal(&self.off, &d, &self.off, &rhs)?;
        Ok(v.iter().zip(&self.sqrt_vol).map(|(x, s)| x / s).collect())
    }

    /// Number of eigenvalues strictly below x (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            let e2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// k-th smallest eigenvalue (k = 0 is the lowest) by bisection.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        if k >= self.len() {
            return Err(BlowupError::InvalidArgument(format!("eigenvalue index {k} out of range")));
        }
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Eigenvector for an isolated eigenvalue, as grid samples with unit norm
    /// in the cell-volume inner product.
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        let n = self.len();
        let scale = lambda.abs().max(1e-300);
        let shift = -(lambda - 1e-10 * scale);
        let d: Vec<f64> = self.diag.iter().map(|x| x + shift).collect();
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        for _ in 0..6 {
            let w = solve_tridiagonal(&self.off, &d, &self.off, &v)?;
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(BlowupError::Numerical("inverse iteration broke down".into()));
            }
            v = w.into_iter().map(|x| x / norm).collect();
        }
        Ok(v.iter().zip(&self.sqrt_vol).map(|(x, s)| x / s).collect())
    }

    /// Solves the rows 0..n−2 of H f = rhs outward from f_0, which fixes the
    /// regular solution at the origin. The last row (the one touching the
    /// ghost) is left unsatisfied.
    pub fn march(&self, rhs: &[f64], f0: f64) -> Vec<f64> {
        let g = &self.grid;
        let a = g.conductance();
        let v = g.volumes();
        let y = g.nodes();
        let n = self.len();
        let mut f = vec![0.0; n];
        f[0] = f0;
        for i in 0..n - 1 {
            let left = if i == 0 { 0.0 } else { a[i] * (f[i] - f[i - 1]) };
            let pot = kernels::potential(y[i]);
            f[i + 1] = f[i] + (left - v[i] * (rhs[i] + pot * f[i])) / a[i + 1];
        }
        f
    }

    /// max |(Hf, g) − (f, Hg)| / (‖Hf‖‖g‖ + ‖f‖‖Hg‖) over the given pairs.
    pub fn symmetry_defect(&self, pairs: &[(Vec<f64>, Vec<f64>)]) -> f64 {
        let g = &self.grid;
        pairs
            .iter()
            .map(|(f, h)| {
                let hf = self.apply(f);
                let hh = self.apply(h);
                let a = g.inner(&hf, h);
                let b = g.inner(f, &hh);
                let scale = (g.norm_sq(&hf) * g.norm_sq(h)).sqrt() + (g.norm_sq(f) * g.norm_sq(&hh)).sqrt();
                (a - b).abs() / scale
            })
            .fold(0.0, f64::max)
    }
}

/// ΛQ, T₁, T₂ realised as exact solutions of the discrete equations
/// HΛQ = 0, HT₁ = −ΛQ, HT₂ = −T₁ (all rows but the last), so that adjoint
/// identities such as (Hg, T₁) = −(g, ΛQ) hold to rounding for compactly
/// supported g.
#[derive(Debug, Clone)]
pub struct DiscreteKernels {
    pub lambda_q: Vec<f64>,
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
}

impl DiscreteKernels {
    pub fn build(op: &OperatorMatrix) -> Self {
        let y = op.grid.nodes();
        let n = y.len();
        let y0 = y[0];
        let lambda_q = op.march(&vec![0.0; n], kernels::lambda_q(y0));
        let rhs1: Vec<f64> = lambda_q.iter().map(|x| -x).collect();
        // Leading behaviour at the origin: T₁ ≈ y²/8, T₂ ≈ −y⁴/192.
        let t1 = op.march(&rhs1, y0 * y0 / 8.0);
        let rhs2: Vec<f64> = t1.iter().map(|x| -x).collect();
        let t2 = op.march(&rhs2, -y0.powi(4) / 192.0);
        Self { lambda_q, t1, t2 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_core::{ops, OuterBc};

    fn op() -> OperatorMatrix {
        assemble_operator(Arc::new(RadialGrid::per_decade(1e-3, 100.0, 120).unwrap()))
    }

    #[test]
    fn matches_pointwise_operator() {
        let m = op();
        let f = m.grid.map(|y| (-y * y / 10.0).exp());
        let a = m.apply(&f);
        let b = ops::apply_h(&m.grid, &f, OuterBc::Dirichlet);
        for i in 0..f.len() {
            let scale = 1.0 + b[i].abs() + m.diag[i].abs() * f[i].abs();
            assert!((a[i] - b[i]).abs() < 1e-12 * scale, "i={i}");
        }
    }

    #[test]
    fn q_maps_to_minus_two_q_cubed() {
        let m = op();
        let q = m.grid.map(kernels::q);
        let hq = m.apply(&q);
        let y = m.grid.nodes();
        for i in (0..y.len()).filter(|&i| y[i] < 30.0).step_by(40) {
            let want = -2.0 * kernels::q(y[i]).powi(3);
            assert!((hq[i] - want).abs() < 2e-3 * want.abs().max(1e-3), "y={}", y[i]);
        }
    }

    #[test]
    fn marched_kernels_solve_the_discrete_equations() {
        let m = op();
        let d = DiscreteKernels::build(&m);
        let h = m.apply(&d.lambda_q);
        let h1 = m.apply(&d.t1);
        let n = h.len();
        for i in 0..n - 1 {
            assert!(h[i].abs() < 1e-9 * (1.0 + m.diag[i].abs() * d.lambda_q[i].abs()));
            assert!((h1[i] + d.lambda_q[i]).abs() < 1e-9 * (1.0 + m.diag[i].abs() * d.t1[i].abs()));
        }
        let y = m.grid.nodes();
        for i in (0..n).step_by(60) {
            assert!((d.lambda_q[i] - kernels::lambda_q(y[i])).abs() < 2e-3, "y={}", y[i]);
        }
    }

    #[test]
    fn shifted_solve_inverts_apply() {
        let m = op();
        let g = m.grid.map(|y| y.sin() / (1.0 + y * y));
        let f = m.solve_shifted(2.0, &g).unwrap();
        let back = m.apply(&f);
        for i in 0..g.len() {
            let scale = 1.0 + g[i].abs() + m.diag[i].abs() * f[i].abs();
            assert!((back[i] + 2.0 * f[i] - g[i]).abs() < 1e-12 * scale, "i={i}");
        }
    }
}
