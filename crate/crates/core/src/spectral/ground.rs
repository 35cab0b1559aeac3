//! The negative eigenpair (−ς, ψ) of H and its grid-refinement record.

use serde::{Deserialize, Serialize};

use super::operator::{assemble_operator, OperatorMatrix};
use crate::error::{BlowupError, Result};
use crate::radial_core::RadialGrid;
use std::sync::Arc;

/// ψ must be resolved out to here.
pub const MIN_Y_MAX: f64 = 50.0;

#[derive(Debug, Clone)]
pub struct GroundState {
    pub sigma: f64,
    /// ψ ≥ 0, unit norm in the cell-volume inner product.
    pub psi: Vec<f64>,
    pub negative_count: usize,
    /// (Hψ, ψ) / (ψ, ψ).
    pub rayleigh: f64,
}

/// Eigenvalues below −h_core² count as negative, where h_core is the spacing
/// at y = 1. The zero resonance ΛQ leaves an eigenvalue of size
/// O(y_max⁻²) that the discretisation moves by O(h_core²) in either
/// direction, so nothing closer to zero can be resolved as negative.
pub fn negative_threshold(grid: &RadialGrid) -> f64 {
    let y = grid.nodes();
    let i = grid.count_below(1.0).clamp(1, y.len() - 1);
    let h = y[i] - y[i - 1];
    -h * h
}

pub fn ground_state(op: &OperatorMatrix) -> Result<GroundState> {
    if op.grid.y_max() < MIN_Y_MAX {
        return Err(BlowupError::Precondition(format!(
            "y_max = {} truncates psi; need at least {MIN_Y_MAX}",
            op.grid.y_max()
        )));
    }
    let negative_count = op.count_below(negative_threshold(&op.grid));
    if negative_count == 0 {
        return Err(BlowupError::Precondition("no negative eigenvalue; grid too short or too coarse".into()));
    }
    let lambda = op.eigenvalue(0)?;
    let mut psi = op.eigenvector(lambda)?;
    let sign = psi.iter().fold(0.0, |s, x| s + x).signum();
    psi.iter_mut().for_each(|x| *x *= sign);
    let g = &op.grid;
    let rayleigh = g.inner(&op.apply(&psi), &psi) / g.norm_sq(&psi);
    Ok(GroundState { sigma: -lambda, psi, negative_count, rayleigh })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub y_max: f64,
    pub sigma: f64,
}

/// Golden record for ς: the refinement table and its Richardson value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralGolden {
    #[serde(rename = "N")]
    pub n: usize,
    pub y_max: f64,
    pub sigma: f64,
    pub convergence_table: Vec<ConvergenceRow>,
    /// |ς(2N) − ς(N)| / ς(2N) for the last pair.
    pub relative_shift: f64,
}

/// ς on `levels` successive halvings of the spacing, extrapolated assuming
/// second-order convergence.
pub fn sigma_convergence(grid: &RadialGrid, levels: usize) -> Result<SpectralGolden> {
    if levels < 2 {
        return Err(BlowupError::InvalidArgument("need at least two refinement levels".into()));
    }
    let mut g = grid.clone();
    let mut table = Vec::new();
    for l in 0..levels {
        if l > 0 {
            g = g.refined()?;
        }
        let gs = ground_state(&assemble_operator(Arc::new(g.clone())))?;
        table.push(ConvergenceRow { n: g.len(), y_max: g.y_max(), sigma: gs.sigma });
    }
    let a = table[levels - 2].sigma;
    let b = table[levels - 1].sigma;
    Ok(SpectralGolden {
        n: grid.len(),
        y_max: grid.y_max(),
        sigma: b + (b - a) / 3.0,
        relative_shift: ((b - a) / b).abs(),
        convergence_table: table,
    })
}
