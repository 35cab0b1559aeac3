//! Randomised checks of the Hardy, sub-coercivity and weighted-coercivity
//! inequalities for H on functions orthogonal to Φ_M.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operator::OperatorMatrix;
use super::phi::PhiM;
use crate::radial_core::{kernels, ops, Cutoff, OuterBc};

/// Sharp 4D Hardy constant: ∫u²/y² ≤ ∫|∂_yu|².
pub const HARDY_CONSTANT: f64 = 1.0;
/// y²u(y)² ≤ ½∫|∂_yu|² in 4D.
pub const SUP_CONSTANT: f64 = 0.5;
/// A sample violates sub-coercivity when no c ≥ this floor works for it.
pub const SUBCOERCIVITY_FLOOR: f64 = 1e-2;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SampleMeasures {
    /// ∫u²/y² / ∫|∂u|².
    pub hardy_ratio: f64,
    /// sup y²u² / ∫|∂u|².
    pub sup_ratio: f64,
    /// Largest c with (Hu,u) ≥ c∫|∂u|² − (u,ψ)²/c.
    pub subcoercivity_c: f64,
    /// ∫|Hu|² over the three-term weighted lower bound.
    pub weighted_ratio: f64,
    /// (u, Φ_M) / (‖u‖‖Φ_M‖) after projection.
    pub phi_defect: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub samples: usize,
    pub seed: u64,
    pub hardy_violations: usize,
    pub sup_violations: usize,
    pub subcoercivity_violations: usize,
    pub worst_hardy_ratio: f64,
    pub worst_sup_ratio: f64,
    pub min_subcoercivity_c: f64,
    pub min_weighted_ratio: f64,
    /// χ₁₀ΛQ projected, and ψ unprojected.
    pub reference: [SampleMeasures; 2],
}

pub fn project_out(op: &OperatorMatrix, phi: &PhiM, u: &[f64]) -> Vec<f64> {
    let g = &op.grid;
    let a = g.inner(u, &phi.phi) / g.norm_sq(&phi.phi);
    u.iter().zip(&phi.phi).map(|(x, p)| x - a * p).collect()
}

pub fn measure(op: &OperatorMatrix, phi: &PhiM, psi: &[f64], u: &[f64]) -> SampleMeasures {
    let g = &op.grid;
    let y = g.nodes();
    let bc = OuterBc::Dirichlet;
    let grad = ops::dirichlet_form(g, u, bc);
    let hardy = g.weighted_norm_sq(u, |x| 1.0 / (x * x));
    let sup = y.iter().zip(u).fold(0.0f64, |m, (x, v)| m.max(x * x * v * v));
    let hu = op.apply(u);
    let quad = g.inner(&hu, u);
    let tau = g.inner(u, psi);
    let c = (quad + (quad * quad + 4.0 * grad * tau * tau).sqrt()) / (2.0 * grad);
    let du = ops::derivative(g, u, bc);
    let d2u = ops::derivative(g, &du, bc);
    let lower = g.weighted_norm_sq(u, |x| 1.0 / (x.powi(4) * (1.0 + x.ln().powi(2))))
        + g.weighted_norm_sq(&du, |x| 1.0 / (x * x))
        + g.norm_sq(&d2u);
    let phi_defect = g.inner(u, &phi.phi).abs() / (g.norm_sq(u) * g.norm_sq(&phi.phi)).sqrt();
    SampleMeasures {
        hardy_ratio: hardy / grad,
        sup_ratio: sup / grad,
        subcoercivity_c: c,
        weighted_ratio: g.norm_sq(&hu) / lower,
        phi_defect,
    }
}

/// Smooth compactly supported sample: one to three Gaussians in log y times a
/// cutoff at radius 100.
pub fn random_sample(op: &OperatorMatrix, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let bumps = rng.gen_range(1..=3);
    let params: Vec<(f64, f64, f64)> = (0..bumps)
        .map(|_| {
            let center = rng.gen_range((0.05f64).ln()..(60.0f64).ln());
            let width = rng.gen_range(0.3..1.5);
            let amp = rng.gen_range(-1.0..1.0);
            (center, width, amp)
        })
        .collect();
    let cut = Cutoff::new(100.0);
    op.grid.map(|y| {
        let l = y.ln();
        let s: f64 = params.iter().map(|(c, w, a)| a * (-((l - c) / w).powi(2)).exp()).sum();
        s * cut.value(y)
    })
}

pub fn coercivity_suite(op: &OperatorMatrix, phi: &PhiM, psi: &[f64], samples: usize, seed: u64) -> CoercivityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<Vec<f64>> = (0..samples).map(|_| random_sample(op, &mut rng)).collect();
    let measures: Vec<SampleMeasures> =
        raw.par_iter().map(|u| measure(op, phi, psi, &project_out(op, phi, u))).collect();
    let cut = Cutoff::new(10.0);
    let lq = op.grid.map(|y| cut.value(y) * kernels::lambda_q(y));
    let reference = [measure(op, phi, psi, &project_out(op, phi, &lq)), measure(op, phi, psi, psi)];
    let all = measures.iter();
    CoercivityReport {
        samples,
        seed,
        hardy_violations: all.clone().filter(|m| m.hardy_ratio > HARDY_CONSTANT).count(),
        sup_violations: all.clone().filter(|m| m.sup_ratio > SUP_CONSTANT).count(),
        subcoercivity_violations: all.clone().filter(|m| !(m.subcoercivity_c >= SUBCOERCIVITY_FLOOR)).count(),
        worst_hardy_ratio: all.clone().map(|m| m.hardy_ratio).fold(0.0, f64::max),
        worst_sup_ratio: all.clone().map(|m| m.sup_ratio).fold(0.0, f64::max),
        min_subcoercivity_c: all.clone().map(|m| m.subcoercivity_c).fold(f64::INFINITY, f64::min),
        min_weighted_ratio: all.map(|m| m.weighted_ratio).fold(f64::INFINITY, f64::min),
        reference,
    }
}
