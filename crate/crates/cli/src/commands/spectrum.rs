//! `spectrum`: the negative eigenpair with its refinement table, Φ_M, the
//! dual direction and the coercivity suite on the configured grid.

use std::sync::Arc;

use blowup_core::profile_builder::{Kernels, TProfiles};
use blowup_core::radial_core::RadialGrid;
use blowup_core::spectral::ground::ConvergenceRow;
use blowup_core::spectral::{
    assemble_operator, build_dual_psi, build_phi_m, coercivity_suite, ground_state, sigma_convergence, CoercivityReport,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{num, OutputDir};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub y_max: f64,
    pub sigma: f64,
    pub negative_count: usize,
    pub rayleigh: f64,
    pub sigma_extrapolated: f64,
    pub relative_shift: f64,
    pub sigma_tol: f64,
    pub convergence_table: Vec<ConvergenceRow>,
    #[serde(rename = "M")]
    pub m: f64,
    /// Relative (Φ_M, T₁) and (Φ_M, T₂).
    pub phi_ortho: [f64; 2],
    pub lambda_q_pairing: f64,
    /// (Φ_M, ΛQ) / (64 log M).
    pub pairing_ratio: f64,
    pub c1: f64,
    pub c2: f64,
    pub c1_ratio: f64,
    pub c2_ratio: f64,
    pub dual_residual: f64,
    pub coercivity: CoercivityReport,
}

pub fn run(cfg: &RunConfig, out: &OutputDir) -> Result<Vec<String>> {
    let sp = &cfg.spectrum;
    let g = cfg.grid.spec();
    let grid = Arc::new(RadialGrid::new(g.y_min, g.y_max, g.n, g.inner_patch)?);
    let op = assemble_operator(grid.clone());
    let gs = ground_state(&op)?;
    let golden = sigma_convergence(&grid, sp.levels)?;
    let t = TProfiles::build(&Kernels::new(grid.clone()));
    let phi = build_phi_m(&op, &t, sp.m)?;
    let dual = build_dual_psi(&op, &gs.psi, &phi)?;
    let coercivity = coercivity_suite(&op, &phi, &gs.psi, sp.coercivity_samples, sp.seed);

    let summary = SpectrumSummary {
        n: grid.len(),
        y_max: grid.y_max(),
        sigma: gs.sigma,
        negative_count: gs.negative_count,
        rayleigh: gs.rayleigh,
        sigma_extrapolated: golden.sigma,
        relative_shift: golden.relative_shift,
        sigma_tol: sp.sigma_tol,
        convergence_table: golden.convergence_table.clone(),
        m: sp.m,
        phi_ortho: phi.ortho,
        lambda_q_pairing: phi.lambda_q_pairing,
        pairing_ratio: phi.lambda_q_pairing / (64.0 * sp.m.ln()),
        c1: phi.c1,
        c2: phi.c2,
        c1_ratio: phi.c1_ratio,
        c2_ratio: phi.c2_ratio,
        dual_residual: dual.residual,
        coercivity,
    };
    out.write_json("spectral.json", &summary)?;

    let y = grid.nodes();
    let rows = |cols: &[&[f64]]| -> Vec<Vec<String>> { (0..y.len()).map(|i| cols.iter().map(|c| num(c[i])).collect()).collect() };
    out.write_csv("psi.csv", &["y", "psi", "psi_dual"], &rows(&[y, &gs.psi, &dual.values]))?;
    let hp = &phi.h_pow;
    out.write_csv("phi_m.csv", &["y", "phi", "h_phi", "h2_phi", "h3_phi"], &rows(&[y, &hp[0], &hp[1], &hp[2], &hp[3]]))?;
    let table: Vec<Vec<String>> =
        golden.convergence_table.iter().map(|r| vec![r.n.to_string(), num(r.y_max), num(r.sigma)]).collect();
    out.write_csv("convergence.csv", &["N", "y_max", "sigma"], &table)?;

    Ok(vec![
        format!("negative eigenvalues: {}", summary.negative_count),
        format!("sigma = {:.8} (shift {:.2e} between the last two grids)", summary.sigma, summary.relative_shift),
        format!("(Phi_M, T1), (Phi_M, T2) relative: {:.2e}, {:.2e}", summary.phi_ortho[0], summary.phi_ortho[1]),
        format!("(Phi_M, LambdaQ) / (64 log M) = {:.4}", summary.pairing_ratio),
        format!(
            "coercivity: {} samples, {} Hardy and {} sub-coercivity violations",
            summary.coercivity.samples, summary.coercivity.hardy_violations, summary.coercivity.subcoercivity_violations
        ),
    ])
}
