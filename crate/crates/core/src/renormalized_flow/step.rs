//! One step of the flow: implicit in H, explicit in Λε and F.
//!
//! (I + ds H) ε⁺ = ε + ds (G + Σ D_j g_j), with D chosen so that ε⁺ satisfies
//! the three orthogonality conditions of the discrete scheme exactly; since
//! (I + ds H)⁻¹ is symmetric this is a 3×3 system against (I + ds H)⁻¹HᵏΦ_M.
//! The result is then re-projected to remove rounding, and the parameters
//! move by one Euler step of their modulation equations.

use serde::{Deserialize, Serialize};

use super::config::{Forcing, TauControl};
use super::context::{FlowContext, MovingProfile};
use super::modulation::{explicit_part, solve_system};
use super::state::FlowState;
use crate::error::{BlowupError, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepReport {
    /// Step actually taken (smaller than requested after halving).
    pub ds: f64,
    pub halvings: usize,
    /// D used to move the parameters (from the last sub-step).
    pub d: [f64; 3],
    /// Relative orthogonality defect before and after the projection, maxima over sub-steps.
    pub defect_pre: f64,
    pub defect_post: f64,
    /// ‖removed component‖ / ‖ε‖ at the projection.
    pub removed: f64,
}

fn implicit(ctx: &FlowContext, ds: f64, x: &[f64]) -> Result<Vec<f64>> {
    let rhs: Vec<f64> = x.iter().map(|v| v / ds).collect();
    ctx.pack.op.solve_shifted(1.0 / ds, &rhs)
}

fn single(ctx: &FlowContext, state: &FlowState, profile: &MovingProfile, ds: f64) -> Result<(FlowState, MovingProfile, StepReport)> {
    let cfg = &ctx.cfg;
    let g = &ctx.grid;
    let eps = &state.epsilon;
    let ex = explicit_part(ctx, profile, eps, cfg.forcing);
    let base: Vec<f64> = eps.iter().zip(&ex.g).map(|(e, f)| e + ds * f).collect();
    let d = if cfg.forcing == Forcing::Off {
        [0.0; 3]
    } else {
        let r: Vec<Vec<f64>> = (0..3).map(|k| implicit(ctx, ds, ctx.phi_pow(k))).collect::<Result<_>>()?;
        let mut matrix = [[0.0; 3]; 3];
        let mut rhs = [0.0; 3];
        for k in 0..3 {
            for j in 0..3 {
                matrix[k][j] = ds * g.inner(&ex.directions[j], &r[k]);
            }
            rhs[k] = -g.inner(&base, &r[k]);
        }
        solve_system(matrix, rhs)?.d
    };
    let mut w = base;
    for j in 0..3 {
        for (o, x) in w.iter_mut().zip(&ex.directions[j]) {
            *o += ds * d[j] * x;
        }
    }
    let raw = implicit(ctx, ds, &w)?;
    let defect_pre = ctx.orthogonality_defect(&raw);
    if cfg.forcing != Forcing::Off && defect_pre > cfg.defect_tol {
        return Err(BlowupError::Numerical(format!("orthogonality defect {defect_pre:e} before projection")));
    }
    let mut next = ctx.project(&raw)?;
    let norm = g.norm_sq(&raw).sqrt();
    let removed = if norm > 0.0 {
        let diff: Vec<f64> = raw.iter().zip(&next).map(|(a, b)| a - b).collect();
        g.norm_sq(&diff).sqrt() / norm
    } else {
        0.0
    };
    if cfg.tau_control == TauControl::Pinned {
        // τ_s = ςτ + (G + Σ D_j g_j, ψ); the slaved value cancels the growth.
        let mut forcing_tau = g.inner(&ex.g, &ctx.pack.psi);
        for j in 0..3 {
            forcing_tau += d[j] * g.inner(&ex.directions[j], &ctx.pack.psi);
        }
        let target = -forcing_tau / ctx.pack.sigma;
        let shift = target - g.inner(&next, &ctx.pack.psi);
        for (o, p) in next.iter_mut().zip(&ctx.pack.psi_dual.values) {
            *o += shift * p;
        }
    }
    let defect_post = ctx.orthogonality_defect(&next);
    let [b1, b2] = state.b;
    let c = profile.c;
    let b_next = if state.b == [0.0, 0.0] {
        [0.0, 0.0]
    } else {
        [b1 + ds * (d[1] - b1 * b1 * (1.0 + c) + b2), b2 + ds * (d[2] - b1 * b2 * (3.0 + c))]
    };
    if state.b != [0.0, 0.0] && !(b_next[0] > 0.0) {
        return Err(BlowupError::Numerical(format!("b1 left (0, inf): {}", b_next[0])));
    }
    let lambda = state.lambda * (ds * (d[0] - b1)).exp();
    let t = state.t + ds * state.lambda * state.lambda;
    let profile_next = MovingProfile::build(ctx, b_next)?;
    let st = FlowState::new(ctx, &profile_next, state.s + ds, lambda, t, next, state.b1_initial)?;
    Ok((st, profile_next, StepReport { ds, halvings: 0, d, defect_pre, defect_post, removed }))
}

fn advance_depth(
    ctx: &FlowContext,
    state: &FlowState,
    profile: &MovingProfile,
    ds: f64,
    depth: usize,
) -> Result<(FlowState, MovingProfile, StepReport)> {
    match single(ctx, state, profile, ds) {
        Ok(r) => Ok(r),
        Err(e @ BlowupError::Numerical(_)) => {
            if depth >= ctx.cfg.max_halvings {
                return Err(BlowupError::Numerical(format!(
                    "step failed after {depth} halvings ({e}); state: s = {}, b = {:?}, lambda = {}, |eps| = {:e}, tau = {:e}",
                    state.s,
                    state.b,
                    state.lambda,
                    ctx.grid.norm_sq(&state.epsilon).sqrt(),
                    state.tau
                )));
            }
            let h = 0.5 * ds;
            let (mid, pm, r1) = advance_depth(ctx, state, profile, h, depth + 1)?;
            let (end, pe, r2) = advance_depth(ctx, &mid, &pm, h, depth + 1)?;
            Ok((
                end,
                pe,
                StepReport {
                    ds: r1.ds.min(r2.ds),
                    halvings: r1.halvings.max(r2.halvings).max(depth + 1),
                    d: r2.d,
                    defect_pre: r1.defect_pre.max(r2.defect_pre),
                    defect_post: r1.defect_post.max(r2.defect_post),
                    removed: r1.removed.max(r2.removed),
                },
            ))
        }
        Err(e) => Err(e),
    }
}

/// Advances by ds, halving the step on numerical failure up to
/// `max_halvings` times before aborting with a state dump.
pub fn step(ctx: &FlowContext, state: &FlowState, profile: &MovingProfile, ds: f64) -> Result<(FlowState, MovingProfile, StepReport)> {
    if !(ds > 0.0) {
        return Err(BlowupError::InvalidArgument(format!("ds = {ds} must be positive")));
    }
    advance_depth(ctx, state, profile, ds, 0)
}
