//! The radiation profile Σ_b and its constants c_b, d_b.
//!
//! Σ = c_b Γ ∫₀ʸ χ_{B₀/4}(ΛQ)² − c_b ΛQ ∫₀ʸ χ_{B₀/4} Γ ΛQ + d_b (1 − χ_{3B₀}) ΛQ,
//! with c_b = 64 / ∫ χ_{B₀/4}(ΛQ)² and d_b = c_b ∫ χ_{B₀/4} Γ ΛQ, B₀ = 1/√b₁.
//! The same panel quadrature is used for the running and total integrals,
//! so Σ = −c_b T₁ below B₀/4 and Σ = 64Γ beyond 6B₀ hold to rounding.

use super::inverse::{invert_h, Kernels, Profile, TProfiles};
use crate::error::{BlowupError, Result};
use crate::radial_core::{quad, Cutoff};
use crate::radial_core::kernels;

pub const MAX_B1: f64 = 1e-2;

#[derive(Debug, Clone)]
pub struct Radiation {
    pub b1: f64,
    pub b0: f64,
    pub c_b: f64,
    pub d_b: f64,
    pub sigma: Vec<f64>,
    pub lambda_sigma: Vec<f64>,
    /// Σ + c_b T₁, supported in y ≥ B₀/4.
    pub sigma_tilde: Vec<f64>,
    /// H⁻¹Σ with its Λ.
    pub inv_sigma: Profile,
    /// H⁻¹(Σ + c_bT₁) = H⁻¹Σ − c_bT₂.
    pub inv_sigma_tilde: Profile,
}

pub fn check_b1(b1: f64) -> Result<()> {
    if !(b1 > 0.0 && b1 <= MAX_B1) {
        return Err(BlowupError::Precondition(format!("b1 = {b1} outside (0, {MAX_B1}]")));
    }
    Ok(())
}

pub fn build_radiation(k: &Kernels, _t: &TProfiles, b1: f64) -> Result<Radiation> {
    check_b1(b1)?;
    let b0 = 1.0 / b1.sqrt();
    let g = &k.grid;
    if g.y_max() < 6.0 * b0 {
        return Err(BlowupError::Precondition(format!(
            "grid ends at {} but radiation needs 6B0 = {}",
            g.y_max(),
            6.0 * b0
        )));
    }
    let inner = Cutoff::new(b0 / 4.0);
    let outer = Cutoff::new(3.0 * b0);
    let y = g.nodes();
    let n = y.len();
    let chi: Vec<f64> = inner.sample(y);
    let fa: Vec<f64> = (0..n).map(|i| chi[i] * k.lambda_q[i] * k.lambda_q[i]).collect();
    let fb: Vec<f64> = (0..n).map(|i| chi[i] * k.gamma[i] * k.lambda_q[i]).collect();
    let a = g.cumulative(&fa);
    let b = g.cumulative(&fb);
    let c_b = 64.0 / a[n - 1];
    let d_b = c_b * b[n - 1];
    let mut sigma = Vec::with_capacity(n);
    let mut lambda_sigma = Vec::with_capacity(n);
    for i in 0..n {
        let off = 1.0 - outer.value(y[i]);
        sigma.push(c_b * (k.gamma[i] * a[i] - k.lambda_q[i] * b[i]) + d_b * off * k.lambda_q[i]);
        lambda_sigma.push(
            c_b * (k.lambda_gamma[i] * a[i] - k.lambda2_q[i] * b[i])
                + d_b * (off * k.lambda2_q[i] - y[i] * outer.dy(y[i]) * k.lambda_q[i]),
        );
    }
    // Σ + c_bT₁ from the differences of the cumulative integrals, so that it is
    // exactly zero where χ_{B₀/4} = 1.
    let da = g.cumulative(&(0..n).map(|i| (chi[i] - 1.0) * k.lambda_q[i] * k.lambda_q[i]).collect::<Vec<_>>());
    let db = g.cumulative(&(0..n).map(|i| (chi[i] - 1.0) * k.gamma[i] * k.lambda_q[i]).collect::<Vec<_>>());
    let sigma_tilde: Vec<f64> = (0..n)
        .map(|i| c_b * (k.gamma[i] * da[i] - k.lambda_q[i] * db[i]) + d_b * (1.0 - outer.value(y[i])) * k.lambda_q[i])
        .collect();
    let inv_sigma = invert_h(k, &sigma);
    let inv_sigma_tilde = invert_h(k, &sigma_tilde);
    Ok(Radiation { b1, b0, c_b, d_b, sigma, lambda_sigma, sigma_tilde, inv_sigma, inv_sigma_tilde })
}

/// c_b from adaptive quadrature of the closed form, independent of any grid.
pub fn c_b_exact(b1: f64) -> f64 {
    let r = 0.25 / b1.sqrt();
    let chi = Cutoff::new(r);
    64.0 / quad::integrate_radial(|y| chi.value(y) * kernels::lambda_q(y).powi(2), 2.0 * r, 1e-12)
}

/// Leading-order c_b ≈ 2/|log b₁|.
pub fn c_b_asymptotic(b1: f64) -> f64 {
    2.0 / b1.ln().abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_core::RadialGrid;
    use std::sync::Arc;

    fn setup(b1: f64) -> (Kernels, TProfiles) {
        let y_max = 8.0 / b1.sqrt();
        let k = Kernels::new(Arc::new(RadialGrid::per_decade(1e-3, y_max, 200).unwrap()));
        let t = TProfiles::build(&k);
        (k, t)
    }

    #[test]
    fn sigma_matches_its_two_regimes() {
        let b1 = 1e-4;
        let (k, t) = setup(b1);
        let r = build_radiation(&k, &t, b1).unwrap();
        let y = k.grid.nodes();
        for i in 0..y.len() {
            if y[i] <= r.b0 / 4.0 {
                assert!((r.sigma[i] + r.c_b * t.t1.value[i]).abs() < 1e-12 * (1.0 + t.t1.value[i].abs()));
                assert_eq!(r.sigma_tilde[i], 0.0);
                assert_eq!(r.inv_sigma_tilde.value[i], 0.0);
            }
            if y[i] >= 6.0 * r.b0 {
                assert!((r.sigma[i] - 64.0 * k.gamma[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn grid_constant_agrees_with_quadrature() {
        let b1 = 1e-4;
        let (k, t) = setup(b1);
        let r = build_radiation(&k, &t, b1).unwrap();
        let rel = (r.c_b / c_b_exact(b1) - 1.0).abs();
        assert!(rel < 1e-3, "rel={rel}");
    }

    #[test]
    fn rejects_short_grids_and_large_b1() {
        let (k, t) = setup(1e-4);
        assert!(build_radiation(&k, &t, 1e-6).is_err());
        assert!(build_radiation(&k, &t, 0.5).is_err());
    }

    #[test]
    fn lambda_sigma_matches_numerical_lambda() {
        let b1 = 1e-4;
        let (k, t) = setup(b1);
        let r = build_radiation(&k, &t, b1).unwrap();
        let num = crate::radial_core::ops::lambda(&k.grid, &r.sigma, crate::radial_core::OuterBc::Extrapolate);
        for i in (10..k.len() - 10).step_by(101) {
            assert!((num[i] - r.lambda_sigma[i]).abs() < 2e-3 * (1.0 + r.sigma[i].abs()), "i={i}");
        }
    }
}
