//! The modulation residual D from the orthogonality conditions.
//!
//! With λ_s/λ = D₀ − b₁ the ε-equation reads
//! ∂_sε = −Hε + G + D₀(Λε + ΛQ̃_b) − D₁ m₁ − D₂ m₂,
//! G = −b₁Λε − Ψ̃_b + L(ε) + N(ε), where m₁, m₂ are the b-directions of Mod.
//! Pairing with HᵏΦ_M and asking d/ds(ε, HᵏΦ_M) = 0 gives a 3×3 system for
//! D = (λ_s/λ + b₁, (b₁)_s + b₁²(1+c) − b₂, (b₂)_s + b₁b₂(3+c)).

use serde::{Deserialize, Serialize};

use super::config::Forcing;
use super::context::{FlowContext, MovingProfile};
use crate::error::{BlowupError, Result};
use crate::linalg::{condition_number, solve_dense};
use crate::radial_core::{ops, OuterBc};

/// Systems with |det| below this fraction of the product of row norms are rejected.
pub const MIN_RELATIVE_DET: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModulationSolve {
    pub d: [f64; 3],
    pub matrix: [[f64; 3]; 3],
    pub rhs: [f64; 3],
    /// |det| / Π‖row‖.
    pub relative_det: f64,
    pub condition: f64,
}

/// The ε-independent part of the right-hand side, G, and the D-directions
/// (Λε + ΛQ̃_b, −m₁, −m₂).
pub struct Explicit {
    pub g: Vec<f64>,
    pub directions: [Vec<f64>; 3],
}

pub fn explicit_part(ctx: &FlowContext, profile: &MovingProfile, eps: &[f64], forcing: Forcing) -> Explicit {
    let b1 = profile.b[0];
    let lam_eps = ops::lambda(&ctx.grid, eps, OuterBc::Dirichlet);
    let n = eps.len();
    let mut g: Vec<f64> = lam_eps.iter().map(|x| -b1 * x).collect();
    match forcing {
        Forcing::Full => {
            let l = profile.linear_term(&ctx.kernels.q, eps);
            let nl = profile.nonlinear_term(eps);
            for i in 0..n {
                g[i] += -profile.psi_tilde[i] + l[i] + nl[i];
            }
        }
        Forcing::Homogeneous => {
            let l = profile.linear_term(&ctx.kernels.q, eps);
            for i in 0..n {
                g[i] += l[i];
            }
        }
        Forcing::Off => {}
    }
    let [m0, m1, m2] = &profile.directions;
    let d0: Vec<f64> = lam_eps.iter().zip(m0).map(|(a, b)| a + b).collect();
    Explicit { g, directions: [d0, m1.iter().map(|x| -x).collect(), m2.iter().map(|x| -x).collect()] }
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Solves M D = r and reports conditioning; errors when the system is degenerate.
pub fn solve_system(matrix: [[f64; 3]; 3], rhs: [f64; 3]) -> Result<ModulationSolve> {
    let rows: f64 = matrix.iter().map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()).product();
    let relative_det = if rows > 0.0 { det3(&matrix).abs() / rows } else { 0.0 };
    if !(relative_det > MIN_RELATIVE_DET) {
        return Err(BlowupError::Numerical(format!("modulation system degenerate: relative det {relative_det:e}")));
    }
    let a: Vec<Vec<f64>> = matrix.iter().map(|r| r.to_vec()).collect();
    let x = solve_dense(&a, &rhs)?;
    Ok(ModulationSolve { d: [x[0], x[1], x[2]], matrix, rhs, relative_det, condition: condition_number(&a) })
}

/// D at the current state from the continuous-time pairing.
pub fn modulation_solve(ctx: &FlowContext, profile: &MovingProfile, eps: &[f64], forcing: Forcing) -> Result<ModulationSolve> {
    let g = &ctx.grid;
    let ex = explicit_part(ctx, profile, eps, forcing);
    let mut matrix = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for k in 0..3 {
        for j in 0..3 {
            matrix[k][j] = g.inner(&ex.directions[j], ctx.phi_pow(k));
        }
        rhs[k] = g.inner(eps, ctx.phi_pow(k + 1)) - g.inner(&ex.g, ctx.phi_pow(k));
    }
    solve_system(matrix, rhs)
}

/// (∂Q̃_b, HᵏΦ_M) for ∂ = (ΛQ̃_b, m₁, m₂): the Jacobian of the decomposition.
pub fn jacobian(ctx: &FlowContext, profile: &MovingProfile) -> [[f64; 3]; 3] {
    let mut j = [[0.0; 3]; 3];
    for (k, row) in j.iter_mut().enumerate() {
        for (l, v) in row.iter_mut().enumerate() {
            *v = ctx.grid.inner(&profile.directions[l], ctx.phi_pow(k));
        }
    }
    j
}
