//! The b-system (b₁)_s = −b₁²(1+c) + b₂, (b₂)_s = −b₁b₂(3+c), λ_s/λ = −b₁,
//! with the log-correction c = c_{b₁} taken either from the radiation
//! profile or from its leading asymptotics.

use serde::{Deserialize, Serialize};

use crate::error::{BlowupError, Result};
use crate::profile_builder::radiation::{c_b_asymptotic, c_b_exact};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CMode {
    /// 64 / ∫χ_{B₀/4}(ΛQ)² by adaptive quadrature at every call.
    Exact,
    /// 2 / |log b₁|.
    #[default]
    Asymptotic,
}

pub fn c_b1(b1: f64, mode: CMode) -> Result<f64> {
    if !(b1 > 0.0 && b1 < 1.0) {
        return Err(BlowupError::InvalidArgument(format!("c_b1 needs 0 < b1 < 1, got {b1}")));
    }
    match mode {
        CMode::Exact => Ok(c_b_exact(b1)),
        CMode::Asymptotic => Ok(c_b_asymptotic(b1)),
    }
}

/// Returns ((b₁)_s, (b₂)_s) and λ_s/λ.
pub fn ode_rhs(b: [f64; 2], mode: CMode) -> Result<([f64; 2], f64)> {
    let [b1, b2] = b;
    if !(b1 > 0.0) {
        return Err(BlowupError::InvalidArgument(format!("b1 = {b1} must be positive")));
    }
    let c = c_b1(b1, mode)?;
    Ok(([-b1 * b1 * (1.0 + c) + b2, -b1 * b2 * (3.0 + c)], -b1))
}
