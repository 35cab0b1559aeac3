//! Spectral side of H: the matrix, its negative eigenpair, Φ_M, the dual
//! direction ψ̃, and the coercivity inequality suite.

pub mod coercivity;
pub mod ground;
pub mod operator;
pub mod phi;

use std::sync::Arc;

pub use coercivity::{coercivity_suite, CoercivityReport};
pub use ground::{ground_state, sigma_convergence, GroundState, SpectralGolden};
pub use operator::{assemble_operator, OperatorMatrix};
pub use phi::{build_dual_psi, build_phi_m, DualPsi, PhiM};

use crate::error::Result;
use crate::profile_builder::{Kernels, TProfiles};
use crate::radial_core::RadialGrid;

/// Everything the flow needs from the spectral side on one grid.
#[derive(Debug, Clone)]
pub struct SpectralPack {
    pub op: OperatorMatrix,
    pub sigma: f64,
    pub psi: Vec<f64>,
    pub phi: PhiM,
    pub psi_dual: DualPsi,
}

impl SpectralPack {
    pub fn build(grid: Arc<RadialGrid>, m: f64) -> Result<Self> {
        let op = assemble_operator(grid.clone());
        let t = TProfiles::build(&Kernels::new(grid));
        let gs = ground_state(&op)?;
        let phi = build_phi_m(&op, &t, m)?;
        let psi_dual = build_dual_psi(&op, &gs.psi, &phi)?;
        Ok(Self { op, sigma: gs.sigma, psi: gs.psi, phi, psi_dual })
    }
}
