//! Read-only data shared by every trajectory on one grid, and the moving
//! profile Q̃_b rebuilt at each parameter value.

use std::sync::Arc;

use super::config::FlowConfig;
use crate::error::{BlowupError, Result};
use crate::profile_builder::error_profile::outer_radius;
use crate::profile_builder::{approximate_profile, build_ladder, error_profile, localize, Kernels, TProfiles};
use crate::radial_core::{Cutoff, RadialGrid};
use crate::spectral::SpectralPack;

#[derive(Debug, Clone)]
pub struct FlowContext {
    pub cfg: FlowConfig,
    pub grid: Arc<RadialGrid>,
    pub kernels: Kernels,
    pub t: TProfiles,
    pub pack: SpectralPack,
    /// (HᵏΦ_M, HˡΦ_M) for k, l = 0, 1, 2.
    pub gram: Vec<Vec<f64>>,
    /// ‖HᵏΦ_M‖ for k = 0, 1, 2.
    pub phi_norms: [f64; 3],
}

impl FlowContext {
    pub fn new(cfg: FlowConfig) -> Result<Self> {
        cfg.validate()?;
        let g = cfg.grid;
        let grid = Arc::new(RadialGrid::new(g.y_min, g.y_max, g.n, g.inner_patch)?);
        let kernels = Kernels::new(grid.clone());
        let t = TProfiles::build(&kernels);
        let pack = SpectralPack::build(grid.clone(), cfg.m)?;
        let hp = &pack.phi.h_pow;
        let gram: Vec<Vec<f64>> = (0..3).map(|k| (0..3).map(|l| grid.inner(&hp[k], &hp[l])).collect()).collect();
        let phi_norms = [gram[0][0].sqrt(), gram[1][1].sqrt(), gram[2][2].sqrt()];
        Ok(Self { cfg, grid, kernels, t, pack, gram, phi_norms })
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    /// HᵏΦ_M for k = 0..=3.
    pub fn phi_pow(&self, k: usize) -> &[f64] {
        &self.pack.phi.h_pow[k]
    }

    /// (ε, HᵏΦ_M) for k = 0, 1, 2.
    pub fn constraints(&self, eps: &[f64]) -> [f64; 3] {
        [0, 1, 2].map(|k| self.grid.inner(eps, self.phi_pow(k)))
    }

    /// max_k |(ε, HᵏΦ_M)| / (‖ε‖ ‖HᵏΦ_M‖), zero for ε = 0.
    pub fn orthogonality_defect(&self, eps: &[f64]) -> f64 {
        let n = self.grid.norm_sq(eps).sqrt();
        if n == 0.0 {
            return 0.0;
        }
        let c = self.constraints(eps);
        (0..3).map(|k| c[k].abs() / (n * self.phi_norms[k])).fold(0.0, f64::max)
    }

    /// Orthogonal projection onto {(ε, HᵏΦ_M) = 0, k = 0, 1, 2}.
    pub fn project(&self, eps: &[f64]) -> Result<Vec<f64>> {
        let c = self.constraints(eps);
        let a = crate::linalg::solve_dense(&self.gram, &c)?;
        let mut out = eps.to_vec();
        for k in 0..3 {
            for (o, p) in out.iter_mut().zip(self.phi_pow(k)) {
                *o -= a[k] * p;
            }
        }
        Ok(out)
    }

    /// χ_{B_δ}ΛQ with B_δ = b₁^{−δ}.
    pub fn chi_delta_lambda_q(&self, b1: f64) -> Vec<f64> {
        let cut = Cutoff::new(b1.powf(-self.cfg.delta));
        self.nodes().iter().zip(&self.kernels.lambda_q).map(|(&y, l)| cut.value(y) * l).collect()
    }
}

/// Q̃_b and what the ε-equation needs from it at one parameter value.
#[derive(Debug, Clone)]
pub struct MovingProfile {
    pub b: [f64; 2],
    /// c_{b₁} of the radiation on this grid (0 at b = 0).
    pub c: f64,
    pub radius: f64,
    pub q_tilde: Vec<f64>,
    pub psi_tilde: Vec<f64>,
    /// ΛQ̃_b, and the b₁ and b₂ directions of Mod. The b₁ direction includes
    /// α∂_{b₁}χ_{B₁}, the part of ∂_sQ̃_b carried by the moving cutoff.
    pub directions: [Vec<f64>; 3],
}

impl MovingProfile {
    pub fn build(ctx: &FlowContext, b: [f64; 2]) -> Result<Self> {
        if b == [0.0, 0.0] {
            return Ok(Self::ground(ctx));
        }
        let [b1, b2] = b;
        if !(b1 > 0.0) {
            return Err(BlowupError::Precondition(format!("b1 = {b1} must be positive")));
        }
        let radius = outer_radius(b1);
        if ctx.grid.y_max() < 2.0 * radius {
            return Err(BlowupError::Precondition(format!(
                "grid ends at {} inside the profile support 2B1 = {}",
                ctx.grid.y_max(),
                2.0 * radius
            )));
        }
        let k = &ctx.kernels;
        let ladder = build_ladder(k, &ctx.t, b1)?;
        let ap = approximate_profile(k, &ctx.t, &ladder, b2);
        let err = error_profile(k, &ladder, &ap, true);
        let loc = localize(k, &ap, &err);
        let [m0, m1, m2] = loc.mod_basis;
        let m1: Vec<f64> = m1.iter().zip(&loc.cutoff_drift).map(|(a, d)| a + d).collect();
        Ok(Self {
            b,
            c: loc.c,
            radius,
            q_tilde: loc.q_tilde,
            psi_tilde: loc.psi_tilde,
            directions: [m0, m1, m2],
        })
    }

    /// b = 0: Q̃_b = Q, no error, directions ΛQ, T₁, T₂.
    pub fn ground(ctx: &FlowContext) -> Self {
        let k = &ctx.kernels;
        Self {
            b: [0.0, 0.0],
            c: 0.0,
            radius: f64::INFINITY,
            q_tilde: k.q.clone(),
            psi_tilde: vec![0.0; k.len()],
            directions: [k.lambda_q.clone(), ctx.t.t1.value.clone(), ctx.t.t2.value.clone()],
        }
    }

    /// L(ε) = 3(Q̃_b² − Q²)ε.
    pub fn linear_term(&self, q: &[f64], eps: &[f64]) -> Vec<f64> {
        (0..eps.len()).map(|i| 3.0 * (self.q_tilde[i] - q[i]) * (self.q_tilde[i] + q[i]) * eps[i]).collect()
    }

    /// N(ε) = 3Q̃_bε² + ε³.
    pub fn nonlinear_term(&self, eps: &[f64]) -> Vec<f64> {
        eps.iter().zip(&self.q_tilde).map(|(e, qt)| e * e * (3.0 * qt + e)).collect()
    }

    /// Mod = −D₀ΛQ̃_b + D₁·(b₁ direction) + D₂·(b₂ direction).
    pub fn modulation_vector(&self, d: [f64; 3]) -> Vec<f64> {
        let [m0, m1, m2] = &self.directions;
        (0..m0.len()).map(|i| -d[0] * m0[i] + d[1] * m1[i] + d[2] * m2[i]).collect()
    }
}

/// F = F⁰ + F¹ with F⁰ = −Ψ̃_b − Mod and F¹ = L(ε) + N(ε).
#[derive(Debug, Clone)]
pub struct ForcingSplit {
    pub total: Vec<f64>,
    pub f0: Vec<f64>,
    pub f1: Vec<f64>,
}

pub fn forcing_split(profile: &MovingProfile, q: &[f64], eps: &[f64], d: [f64; 3]) -> ForcingSplit {
    let m = profile.modulation_vector(d);
    let f0: Vec<f64> = profile.psi_tilde.iter().zip(&m).map(|(p, m)| -p - m).collect();
    let l = profile.linear_term(q, eps);
    let n = profile.nonlinear_term(eps);
    let f1: Vec<f64> = l.iter().zip(&n).map(|(a, b)| a + b).collect();
    let total = f0.iter().zip(&f1).map(|(a, b)| a + b).collect();
    ForcingSplit { total, f0, f1 }
}
