//! The flow state u = Q̃_b + ε and its bootstrap diagnostics.

use serde::{Deserialize, Serialize};

use super::context::{FlowContext, MovingProfile};
use crate::error::{BlowupError, Result};
use crate::modulation_ode::coords::{b_to_u, u_to_v};
use crate::radial_core::{ops, OuterBc};

/// Bounds are tested with this relative slack so that data placed exactly on
/// the boundary of the trapped region counts as inside.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Xi {
    pub xi1: f64,
    pub xi2: f64,
    pub xi4: f64,
    pub xi6: f64,
}

/// A monitored bootstrap quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Coordinate {
    Xi1,
    Xi2,
    Xi4,
    Xi6,
    V1,
    V2,
    Tau,
}

impl Coordinate {
    pub const ALL: [Coordinate; 7] =
        [Coordinate::Xi1, Coordinate::Xi2, Coordinate::Xi4, Coordinate::Xi6, Coordinate::V1, Coordinate::V2, Coordinate::Tau];

    pub fn name(self) -> &'static str {
        match self {
            Coordinate::Xi1 => "Xi1",
            Coordinate::Xi2 => "Xi2",
            Coordinate::Xi4 => "Xi4",
            Coordinate::Xi6 => "Xi6",
            Coordinate::V1 => "V1_tilde",
            Coordinate::V2 => "V2_tilde",
            Coordinate::Tau => "tau_tilde",
        }
    }
}

/// Which bounds end a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExitSet {
    /// Every bootstrap bound.
    #[default]
    All,
    /// Only Ṽ₁, Ṽ₂ and τ̃, the coordinates the shooting argument exits through.
    Modulation,
}

impl ExitSet {
    pub fn contains(self, c: Coordinate) -> bool {
        match self {
            ExitSet::All => true,
            ExitSet::Modulation => matches!(c, Coordinate::V1 | Coordinate::V2 | Coordinate::Tau),
        }
    }
}

/// Each monitored quantity divided by its bootstrap bound; a ratio above 1
/// (beyond [`BOUND_SLACK`]) is a violation. Ṽ and τ̃ keep their sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapFlags {
    pub ratios: [f64; 7],
}

impl BootstrapFlags {
    pub fn ratio(&self, c: Coordinate) -> f64 {
        self.ratios[c as usize]
    }

    pub fn violated(&self) -> Vec<Coordinate> {
        Coordinate::ALL.into_iter().filter(|&c| self.ratio(c).abs() > 1.0 + BOUND_SLACK).collect()
    }

    /// The violated bound with the largest overshoot.
    pub fn worst(&self) -> Option<Coordinate> {
        self.worst_in(ExitSet::All)
    }

    /// The violated bound in `set` with the largest overshoot.
    pub fn worst_in(&self, set: ExitSet) -> Option<Coordinate> {
        self.violated()
            .into_iter()
            .filter(|&c| set.contains(c))
            .max_by(|a, b| self.ratio(*a).abs().total_cmp(&self.ratio(*b).abs()))
    }

    pub fn all_pass(&self) -> bool {
        self.violated().is_empty()
    }

    /// "ok" or the violated names joined by '|'.
    pub fn label(&self) -> String {
        let v = self.violated();
        if v.is_empty() {
            "ok".into()
        } else {
            v.iter().map(|c| c.name()).collect::<Vec<_>>().join("|")
        }
    }
}

/// State in renormalised variables. ε lives on the context grid; the caches
/// are refreshed by [`FlowState::new`] and never mutated separately.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub s: f64,
    pub lambda: f64,
    pub t: f64,
    pub b: [f64; 2],
    pub epsilon: Vec<f64>,
    /// Hε, H²ε, H³ε.
    pub eps2k: [Vec<f64>; 3],
    pub xi: Xi,
    pub tau: f64,
    pub tau_tilde: f64,
    pub b2_tilde: f64,
    pub v: [f64; 2],
    pub v_tilde: [f64; 2],
    pub delta: f64,
    /// E(Q̃_b + ε) on the grid.
    pub energy: f64,
    /// E(Q̃_b + ε) − E(Q), summed without forming the O(1) energies.
    pub energy_excess: f64,
    /// b₁ at the start of the run, for the bound on Ξ₁.
    pub b1_initial: f64,
}

impl FlowState {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        ctx: &FlowContext,
        profile: &MovingProfile,
        s: f64,
        lambda: f64,
        t: f64,
        epsilon: Vec<f64>,
        b1_initial: f64,
    ) -> Result<Self> {
        let g = &ctx.grid;
        if epsilon.len() != g.len() {
            return Err(BlowupError::InvalidArgument(format!("epsilon has {} values on a {}-node grid", epsilon.len(), g.len())));
        }
        if let Some(i) = epsilon.iter().position(|x| !x.is_finite()) {
            return Err(BlowupError::Numerical(format!("epsilon not finite at y = {} (s = {s})", g.nodes()[i])));
        }
        let b = profile.b;
        let op = &ctx.pack.op;
        let e2 = op.apply(&epsilon);
        let e4 = op.apply(&e2);
        let e6 = op.apply(&e4);
        let xi = Xi {
            xi1: ops::dirichlet_form(g, &epsilon, OuterBc::Dirichlet),
            xi2: g.norm_sq(&e2),
            xi4: g.norm_sq(&e4),
            xi6: g.norm_sq(&e6),
        };
        let tau = g.inner(&epsilon, &ctx.pack.psi);
        let delta = ctx.cfg.delta;
        let (tau_tilde, b2_tilde, v, v_tilde) = if b[0] > 0.0 {
            let lb = b[0].ln().abs();
            let b2_tilde = b[1] + g.inner(&e4, &ctx.chi_delta_lambda_q(b[0])) / (64.0 * delta * lb);
            let v = u_to_v(b_to_u(s, b)?);
            let v_tilde = u_to_v(b_to_u(s, [b[0], b2_tilde])?);
            (tau * lb / b[0].powf(3.5), b2_tilde, v, v_tilde)
        } else {
            (0.0, b[1], [0.0; 2], [0.0; 2])
        };
        let (energy, energy_excess) = energy(ctx, profile, &epsilon);
        Ok(Self {
            s,
            lambda,
            t,
            b,
            epsilon,
            eps2k: [e2, e4, e6],
            xi,
            tau,
            tau_tilde,
            b2_tilde,
            v,
            v_tilde,
            delta,
            energy,
            energy_excess,
            b1_initial,
        })
    }

    /// Every bootstrap bound as a ratio: Ξ₁ ≤ 10√b₁(0), Ξ₂ ≤ b₁^{4/3}|log b₁|^K,
    /// Ξ₄ ≤ b₁⁴|log b₁|^K, Ξ₆ ≤ K b₁⁶/|log b₁|², |Ṽ_k| ≤ 1, |τ̃| ≤ 1.
    pub fn flags(&self, k_const: f64) -> BootstrapFlags {
        let b1 = self.b[0];
        if !(b1 > 0.0) {
            return BootstrapFlags { ratios: [0.0; 7] };
        }
        let lb = b1.ln().abs();
        let bounds = [
            10.0 * self.b1_initial.sqrt(),
            b1.powf(4.0 / 3.0) * lb.powf(k_const),
            b1.powi(4) * lb.powf(k_const),
            k_const * b1.powi(6) / (lb * lb),
        ];
        let x = self.xi;
        BootstrapFlags {
            ratios: [
                x.xi1 / bounds[0],
                x.xi2 / bounds[1],
                x.xi4 / bounds[2],
                x.xi6 / bounds[3],
                self.v_tilde[0],
                self.v_tilde[1],
                self.tau_tilde,
            ],
        }
    }
}

/// E(v) = ½∫|∂v|² − ¼∫v⁴ in the discrete form whose gradient is −Δ_hv − v³,
/// with a zero ghost past y_max. Returns (E(v), E(v) − E(Q)), where the
/// excess is expanded in w = v − Q:
/// ½(Hw, w) + (HQ + 2Q³, w) − Σ V (Qw³ + w⁴/4).
pub fn energy(ctx: &FlowContext, profile: &MovingProfile, eps: &[f64]) -> (f64, f64) {
    let g = &ctx.grid;
    let op = &ctx.pack.op;
    let q = &ctx.kernels.q;
    let w: Vec<f64> = (0..q.len()).map(|i| profile.q_tilde[i] - q[i] + eps[i]).collect();
    let hq = op.apply(q);
    let hw = op.apply(&w);
    let vol = g.volumes();
    let mut excess = 0.5 * g.inner(&hw, &w);
    for i in 0..q.len() {
        let (qi, wi) = (q[i], w[i]);
        excess += vol[i] * ((hq[i] + 2.0 * qi * qi * qi) * wi - qi * wi * wi * wi - 0.25 * wi.powi(4));
    }
    let q4: f64 = (0..q.len()).map(|i| vol[i] * q[i].powi(4)).sum();
    let e_q = 0.5 * g.inner(&hq, q) + 1.25 * q4;
    (e_q + excess, excess)
}
