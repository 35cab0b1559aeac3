//! Run parameters for the flow.

use serde::{Deserialize, Serialize};

use crate::error::{BlowupError, Result};
use crate::radial_core::GridSpec;

/// What drives ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Forcing {
    /// −Ψ̃_b − Mod + L(ε) + N(ε).
    #[default]
    Full,
    /// Ψ̃_b and N(ε) removed: the flow linearised around the moving profile.
    Homogeneous,
    /// F ≡ 0 and no modulation: ∂_sε − (λ_s/λ)Λε + Hε = 0 with b on the ODE.
    Off,
}

/// Treatment of the unstable ψ-direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TauControl {
    /// τ evolves freely.
    #[default]
    Free,
    /// After every step τ is reset to the slaved value −g/ς, where g is the
    /// τ-forcing, so the run follows the stable manifold of the ψ-mode.
    Pinned,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub grid: GridSpec,
    pub s0: f64,
    /// Support parameter of Φ_M.
    pub m: f64,
    /// Bootstrap constant.
    pub k_const: f64,
    /// Exponent of B_δ = b₁^{−δ} in the improved b̃₂.
    pub delta: f64,
    /// Step in s.
    pub ds: f64,
    /// Largest accepted relative orthogonality defect before projection.
    pub defect_tol: f64,
    pub max_halvings: usize,
    pub forcing: Forcing,
    pub tau_control: TauControl,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec { y_min: 0.02, y_max: 1600.0, n: 400, inner_patch: Some(2.0) },
            s0: 1e3,
            m: 10.0,
            k_const: 50.0,
            delta: 0.05,
            ds: 0.5,
            defect_tol: 1e-9,
            max_halvings: 6,
            forcing: Forcing::Full,
            tau_control: TauControl::Free,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(BlowupError::InvalidArgument(m));
        if !(self.s0 > 1.0) {
            return bad(format!("s0 = {} must exceed 1", self.s0));
        }
        if !(self.m >= 10.0) {
            return bad(format!("M = {} below 10", self.m));
        }
        if !(self.k_const > 0.0) {
            return bad(format!("K = {} must be positive", self.k_const));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return bad(format!("delta = {} outside (0, 0.5)", self.delta));
        }
        if !(self.ds > 0.0 && self.ds.is_finite()) {
            return bad(format!("ds = {} must be positive", self.ds));
        }
        if !(self.defect_tol > 0.0) {
            return bad(format!("defect_tol = {} must be positive", self.defect_tol));
        }
        Ok(())
    }
}
