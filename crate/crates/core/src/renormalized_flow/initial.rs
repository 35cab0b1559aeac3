//! Initial data v₀ = Q̃_{b(0)} + τ(0)ψ̃ from a point (Ṽ₂(0), τ̃(0)) of the square.

use super::context::{FlowContext, MovingProfile};
use super::state::FlowState;
use crate::error::{BlowupError, Result};
use crate::modulation_ode::coords::u_to_b;
use crate::modulation_ode::equilibrium::b_e;

/// (H²ψ̃, χ_{B_δ}ΛQ) / (64δ|log b₁|): the shift of b̃₂ per unit τ.
pub fn b2_shift_per_tau(ctx: &FlowContext, b1: f64) -> f64 {
    let op = &ctx.pack.op;
    let h2 = op.apply_pow(&ctx.pack.psi_dual.values, 2);
    ctx.grid.inner(&h2, &ctx.chi_delta_lambda_q(b1)) / (64.0 * ctx.cfg.delta * b1.ln().abs())
}

/// U₁(0) = 0 fixes b₁(0) = b₁ᵉ(s₀), τ(0) = τ̃(0) b₁^{7/2}/|log b₁|, and
/// Ṽ = PŨ with Ũ₁ = 0 gives Ṽ₁(0) = −Ṽ₂(0)/3 and Ũ₂(0) = Ṽ₂(0)/3. Then
/// U₂(0) = Ũ₂(0) − τ(0)·shift·s₀²(log s₀)^{5/4}, from b̃₂ = b₂ + τ·shift.
pub fn build_initial_data(ctx: &FlowContext, v2_tilde_0: f64, tau_tilde_0: f64) -> Result<(FlowState, MovingProfile)> {
    if !(v2_tilde_0.abs() <= 1.0 && tau_tilde_0.abs() <= 1.0) {
        return Err(BlowupError::InvalidArgument(format!(
            "(V2~(0), tau~(0)) = ({v2_tilde_0}, {tau_tilde_0}) outside [-1, 1]^2"
        )));
    }
    let s0 = ctx.cfg.s0;
    let (b1, _) = b_e(s0)?;
    let tau0 = tau_tilde_0 * b1.powf(3.5) / b1.ln().abs();
    let u2_tilde = v2_tilde_0 / 3.0;
    let u2 = u2_tilde - tau0 * b2_shift_per_tau(ctx, b1) * s0 * s0 * s0.ln().powf(1.25);
    let b = u_to_b(s0, [0.0, u2])?;
    let eps: Vec<f64> = ctx.pack.psi_dual.values.iter().map(|p| tau0 * p).collect();
    let profile = MovingProfile::build(ctx, b)?;
    let state = FlowState::new(ctx, &profile, s0, 1.0, 0.0, eps, b[0])?;
    Ok((state, profile))
}
