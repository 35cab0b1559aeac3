//! H⁻¹ through the variation-of-constants formula
//! u = Γ ∫₀ʸ f ΛQ x³ dx − ΛQ ∫₀ʸ f Γ x³ dx,
//! the smooth solution with u(0) = 0. Since the boundary terms cancel,
//! Λu = ΛΓ ∫ f ΛQ x³ − Λ²Q ∫ f Γ x³, so every inverted profile also
//! carries its scaling derivative without numerical differentiation.

use std::sync::Arc;

use crate::radial_core::{kernels, RadialGrid, TailLaw};

/// Kernel values sampled on a grid.
#[derive(Debug, Clone)]
pub struct Kernels {
    pub grid: Arc<RadialGrid>,
    pub q: Vec<f64>,
    pub lambda_q: Vec<f64>,
    pub lambda2_q: Vec<f64>,
    pub gamma: Vec<f64>,
    pub lambda_gamma: Vec<f64>,
    pub potential: Vec<f64>,
}

impl Kernels {
    pub fn new(grid: Arc<RadialGrid>) -> Self {
        Self {
            q: grid.map(kernels::q),
            lambda_q: grid.map(kernels::lambda_q),
            lambda2_q: grid.map(kernels::lambda2_q),
            gamma: grid.map(kernels::gamma),
            lambda_gamma: grid.map(kernels::lambda_gamma),
            potential: grid.map(kernels::potential),
            grid,
        }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}

/// An inverted profile: values, Λ-values and the source it was built from.
#[derive(Debug, Clone, Default)]
pub struct Profile {
    pub value: Vec<f64>,
    pub lambda: Vec<f64>,
    pub source: Vec<f64>,
}

impl Profile {
    /// ∂_y from Λ: (Λu - u)/y.
    pub fn dy(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().zip(&self.lambda).zip(&self.value).map(|((y, l), v)| (l - v) / y).collect()
    }
}

pub fn invert_h(k: &Kernels, f: &[f64]) -> Profile {
    let g = &k.grid;
    let fa: Vec<f64> = f.iter().zip(&k.lambda_q).map(|(a, b)| a * b).collect();
    let fb: Vec<f64> = f.iter().zip(&k.gamma).map(|(a, b)| a * b).collect();
    let a = g.cumulative(&fa);
    let b = g.cumulative(&fb);
    let n = f.len();
    let mut value = Vec::with_capacity(n);
    let mut lambda = Vec::with_capacity(n);
    for i in 0..n {
        value.push(k.gamma[i] * a[i] - k.lambda_q[i] * b[i]);
        lambda.push(k.lambda_gamma[i] * a[i] - k.lambda2_q[i] * b[i]);
    }
    Profile { value, lambda, source: f.to_vec() }
}

/// Far-field constant of T₁: T₁ = -4 log y + T1_OFFSET + O(log²y / y²).
/// Obtained from the closed forms by adaptive quadrature (see tests).
pub const T1_OFFSET: f64 = 10.825_549_750_021;

/// T₁ = H⁻¹(-ΛQ) and T₂ = H⁻¹(-T₁).
#[derive(Debug, Clone)]
pub struct TProfiles {
    pub t1: Profile,
    pub t2: Profile,
}

impl TProfiles {
    pub fn build(k: &Kernels) -> Self {
        let minus_lq: Vec<f64> = k.lambda_q.iter().map(|v| -v).collect();
        let t1 = invert_h(k, &minus_lq);
        let minus_t1: Vec<f64> = t1.value.iter().map(|v| -v).collect();
        let t2 = invert_h(k, &minus_t1);
        Self { t1, t2 }
    }

    pub fn tail(i: usize) -> Option<TailLaw> {
        match i {
            1 => Some(TailLaw { p: 0.0, q: 1.0, c: -4.0 }),
            2 => Some(TailLaw { p: 2.0, q: 1.0, c: 0.5 }),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_core::{ops, quad, OuterBc};

    fn kernels(n: usize, y_max: f64) -> Kernels {
        Kernels::new(Arc::new(RadialGrid::log_spaced(1e-3, y_max, n).unwrap()))
    }

    #[test]
    fn inverse_is_a_right_inverse() {
        let k = kernels(2000, 200.0);
        let f = k.grid.map(|y| (1.0 + y * y).recip());
        let u = invert_h(&k, &f);
        let hu = ops::apply_h(&k.grid, &u.value, OuterBc::Extrapolate);
        for i in (50..1900).step_by(150) {
            assert!((hu[i] - f[i]).abs() < 2e-4 * f[i].abs().max(1e-3), "i={i}");
        }
    }

    #[test]
    fn inverse_vanishes_quadratically_at_origin() {
        let k = kernels(1500, 50.0);
        let t = TProfiles::build(&k);
        let y = k.grid.nodes();
        // T₁ ≈ y²/8 near 0 because -ΔT₁ ≈ -ΛQ(0) = -1.
        for i in [0, 40, 120] {
            assert!((t.t1.value[i] / (y[i] * y[i]) - 0.125).abs() < 1e-3, "i={i}");
        }
    }

    #[test]
    fn lambda_identity_matches_numerical_lambda() {
        let k = kernels(3000, 1e3);
        let t = TProfiles::build(&k);
        let num = ops::lambda(&k.grid, &t.t1.value, OuterBc::Extrapolate);
        for i in (20..2900).step_by(200) {
            assert!((num[i] - t.t1.lambda[i]).abs() < 1e-4 * (1.0 + t.t1.lambda[i].abs()), "i={i}");
        }
    }

    /// High-precision value of T₁(y) + 4 log y at y = 10⁷.
    fn t1_offset_oracle() -> f64 {
        let y = 1e7;
        let a = quad::integrate_radial(|x| kernels::lambda_q(x).powi(2), y, 1e-14);
        let b = quad::integrate_radial(|x| kernels::lambda_q(x) * kernels::gamma(x), y, 1e-14);
        -kernels::gamma(y) * a + kernels::lambda_q(y) * b + 4.0 * y.ln()
    }

    #[test]
    fn far_field_offset_of_t1() {
        assert!((t1_offset_oracle() - T1_OFFSET).abs() < 1e-8);
        let k = kernels(4000, 1e5);
        let t = TProfiles::build(&k);
        let i = k.grid.count_below(1e4) - 1;
        let y = k.grid.nodes()[i];
        let err = (t.t1.value[i] + 4.0 * y.ln() - T1_OFFSET).abs();
        assert!(err < 3e-3, "err={err}");
    }
}
