//! Φ_M, the substitute for ΛQ in the orthogonality conditions, and the dual
//! direction ψ̃ used to seed the unstable mode.

use super::operator::{DiscreteKernels, OperatorMatrix};
use crate::error::{BlowupError, Result};
use crate::linalg::solve_dense;
use crate::profile_builder::TProfiles;
use crate::radial_core::{kernels, Cutoff};

#[derive(Debug, Clone)]
pub struct PhiM {
    pub m: f64,
    pub phi: Vec<f64>,
    /// H^kΦ_M for k = 0, 1, 2, 3.
    pub h_pow: [Vec<f64>; 4],
    /// Ratio coefficients computed with the Green-formula T_k.
    pub c1_ratio: f64,
    pub c2_ratio: f64,
    /// Ratio coefficients computed with the discrete kernels; these build Φ_M.
    pub c1: f64,
    pub c2: f64,
    /// |(Φ_M, T_k)| / (‖Φ_M‖ ‖T_k‖_{y≤2M}) against the discrete kernels.
    pub ortho: [f64; 2],
    /// (Φ_M, ΛQ).
    pub lambda_q_pairing: f64,
}

/// Φ_M with the closed ratio coefficients, evaluated against the discrete
/// kernels so that (Φ_M, T_k) vanish to rounding for the matrix H. The
/// discrete zero mode differs from ΛQ by O(h²)Γ, so large M needs a fine grid.
/// `t` supplies the Green-formula profiles for the continuum comparison.
pub fn build_phi_m(op: &OperatorMatrix, t: &TProfiles, m: f64) -> Result<PhiM> {
    let g = &op.grid;
    if m < 10.0 {
        return Err(BlowupError::InvalidArgument(format!("M = {m} below 10")));
    }
    if g.y_max() < 2.5 * m {
        return Err(BlowupError::Precondition(format!("grid ends at {} but Phi_M needs 2.5M = {}", g.y_max(), 2.5 * m)));
    }
    let dk = DiscreteKernels::build(op);
    let cut = Cutoff::new(m);
    let y = g.nodes();
    // χ_M times the discrete zero mode: then HΦ_M is supported in [M, 2M]
    // exactly, instead of carrying the O(h²) defect of the sampled ΛQ.
    let base: Vec<f64> = y.iter().zip(&dk.lambda_q).map(|(&x, l)| cut.value(x) * l).collect();
    let norm = g.inner(&base, &dk.lambda_q);
    if norm.abs() < 1e-12 {
        return Err(BlowupError::Precondition("(chi_M LambdaQ, LambdaQ) degenerate".into()));
    }
    let p1 = g.inner(&base, &dk.t1);
    let p2 = g.inner(&base, &dk.t2);
    let c1 = p1 / norm;
    let c2 = (-p2 + c1 * p1) / norm;
    // The same ratios with the Green-formula profiles, for comparison.
    let lq: Vec<f64> = y.iter().map(|&x| kernels::lambda_q(x)).collect();
    let norm_c = g.inner(&base, &lq);
    let q1 = g.inner(&base, &t.t1.value);
    let q2 = g.inner(&base, &t.t2.value);
    let c1_ratio = q1 / norm_c;
    let c2_ratio = (-q2 + c1_ratio * q1) / norm_c;
    // H(χL) − χ·H(L): on rows where χ ≡ 1 the two products are identical
    // floating-point expressions, so the rounding residual of H L (of size
    // ε/h² near the origin) cancels exactly and H Φ_M lives in [M, 2M].
    let hl = op.apply(&dk.lambda_q);
    let hb = op.apply(&base);
    let mut hk = vec![(0..y.len()).map(|i| hb[i] - cut.value(y[i]) * hl[i]).collect::<Vec<_>>()];
    for _ in 0..4 {
        let next = op.apply(hk.last().expect("non-empty"));
        hk.push(next);
    }
    let comb = |k: usize| -> Vec<f64> {
        let mut out = vec![0.0; y.len()];
        for i in 0..y.len() {
            let lead = if k == 0 { base[i] } else { hk[k - 1][i] };
            out[i] = lead + c1 * hk[k][i] + c2 * hk[k + 1][i];
        }
        out
    };
    let phi = comb(0);
    let nphi = g.norm_sq(&phi).sqrt();
    let ortho = [
        g.inner(&phi, &dk.t1).abs() / (nphi * g.norm_sq_below(&dk.t1, 2.0 * m).sqrt()),
        g.inner(&phi, &dk.t2).abs() / (nphi * g.norm_sq_below(&dk.t2, 2.0 * m).sqrt()),
    ];
    let h_pow = [phi.clone(), comb(1), comb(2), comb(3)];
    let lambda_q_pairing = g.inner(&phi, &lq);
    Ok(PhiM { m, h_pow, phi, c1_ratio, c2_ratio, c1, c2, ortho, lambda_q_pairing })
}

/// Cubic B-spline bump with the given centre and half-width, peak 2/3.
pub fn cubic_bump(center: f64, half_width: f64) -> impl Fn(f64) -> f64 {
    move |y| {
        let t = 2.0 * (y - center).abs() / half_width;
        if t >= 2.0 {
            0.0
        } else if t >= 1.0 {
            (2.0 - t).powi(3) / 6.0
        } else {
            2.0 / 3.0 - t * t + 0.5 * t.powi(3)
        }
    }
}

#[derive(Debug, Clone)]
pub struct DualPsi {
    pub values: Vec<f64>,
    /// Coefficient of ψ followed by the three bump coefficients.
    pub coeffs: [f64; 4],
    pub centers: [f64; 3],
    /// Max |constraint − target|.
    pub residual: f64,
}

/// ψ̃ = aψ + Σ c_k g_k with (ψ̃, ψ) = 1 and (ψ̃, H^kΦ_M) = 0 for k = 0, 1, 2.
pub fn build_dual_psi(op: &OperatorMatrix, psi: &[f64], phi: &PhiM) -> Result<DualPsi> {
    let m = phi.m;
    let sets = [[m / 4.0, m / 2.0, m], [m / 3.0, 2.0 * m / 3.0, 1.25 * m]];
    let mut last_err = None;
    for centers in sets {
        match dual_with(op, psi, phi, centers) {
            Ok(d) if d.residual < 1e-10 => return Ok(d),
            Ok(d) => last_err = Some(BlowupError::Numerical(format!("dual constraint residual {}", d.residual))),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| BlowupError::Numerical("dual construction failed".into())))
}

fn dual_with(op: &OperatorMatrix, psi: &[f64], phi: &PhiM, centers: [f64; 3]) -> Result<DualPsi> {
    let g = &op.grid;
    let w = phi.m / 8.0;
    let mut basis = vec![psi.to_vec()];
    for c in centers {
        basis.push(g.map(cubic_bump(c, w)));
    }
    let tests: [&[f64]; 4] = [psi, &phi.h_pow[0], &phi.h_pow[1], &phi.h_pow[2]];
    let a: Vec<Vec<f64>> = tests.iter().map(|t| basis.iter().map(|b| g.inner(t, b)).collect()).collect();
    // Rows are scaled to unit size so that the residual is relative.
    let scales: Vec<f64> = a.iter().map(|r| r.iter().fold(0.0f64, |s, x| s.max(x.abs()))).collect();
    let a_scaled: Vec<Vec<f64>> = a.iter().zip(&scales).map(|(r, s)| r.iter().map(|x| x / s).collect()).collect();
    let rhs = [1.0 / scales[0], 0.0, 0.0, 0.0];
    let x = solve_dense(&a_scaled, &rhs)?;
    let values: Vec<f64> = (0..g.len()).map(|i| (0..4).map(|k| x[k] * basis[k][i]).sum()).collect();
    let target = [1.0, 0.0, 0.0, 0.0];
    let residual = tests
        .iter()
        .zip(&scales)
        .zip(target)
        .map(|((t, s), want)| ((g.inner(t, &values) - want) / s.max(1.0)).abs())
        .fold(0.0, f64::max);
    Ok(DualPsi { values, coeffs: [x[0], x[1], x[2], x[3]], centers, residual })
}
