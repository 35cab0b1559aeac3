//! Approximate profile Q_b = Q + α, its error Ψ_b, and the localised versions.
//!
//! α = b₁T₁ + b₂T₂ + S₂ + S₃ + S₄. With (b₁)_s = −b₁²(1+c) + b₂ and
//! (b₂)_s = −b₁b₂(3+c), the defining equations of the ladder reduce Ψ_b to
//!
//! Ψ_b = −b₁²Σ̃ + b₁b₂H⁻¹Σ̃
//!     + (b₁)_s ∂_{b₁}S₄ + (b₂)_s ∂_{b₂}S₄ + b₁ΛS₄
//!     − R,
//!
//! where Σ̃ = Σ + cT₁ and R is the part of Q_b³ − Q³ − 3Q²α of total order ≥ 5
//! (b₁ counts 1, b₂ counts 2). R is assembled from products of the graded
//! pieces of α, never by subtracting Q_b³ − Q³.

use super::inverse::{Kernels, TProfiles};
use super::ladder::CorrectionLadder;
use crate::radial_core::Cutoff;

pub fn system_rates(b1: f64, b2: f64, c: f64) -> (f64, f64) {
    (-b1 * b1 * (1.0 + c) + b2, -b1 * b2 * (3.0 + c))
}

/// B₁ = |log b₁| / √b₁.
pub fn outer_radius(b1: f64) -> f64 {
    b1.ln().abs() / b1.sqrt()
}

/// dB₁/db₁.
pub fn outer_radius_db1(b1: f64) -> f64 {
    -(1.0 + 0.5 * b1.ln().abs()) / (b1 * b1.sqrt())
}

#[derive(Debug, Clone)]
pub struct ApproximateProfile {
    pub b1: f64,
    pub b2: f64,
    pub c: f64,
    pub alpha: Vec<f64>,
    pub lambda_alpha: Vec<f64>,
    pub d_alpha_db1: Vec<f64>,
    pub d_alpha_db2: Vec<f64>,
    /// α split by total order 1..=4.
    pub graded: [Vec<f64>; 4],
    pub s4: Vec<f64>,
    pub lambda_s4: Vec<f64>,
    pub d_s4_db1: Vec<f64>,
    pub d_s4_db2: Vec<f64>,
}

impl ApproximateProfile {
    pub fn q_b(&self, k: &Kernels) -> Vec<f64> {
        k.q.iter().zip(&self.alpha).map(|(q, a)| q + a).collect()
    }
}

pub fn approximate_profile(k: &Kernels, t: &TProfiles, l: &CorrectionLadder, b2: f64) -> ApproximateProfile {
    let b1 = l.b1;
    let c = l.c_b();
    let n = k.len();
    let mut graded = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut lambda_alpha = vec![0.0; n];
    let mut s4 = vec![0.0; n];
    let mut lambda_s4 = vec![0.0; n];
    let mut d_s4_db1 = vec![0.0; n];
    let mut d_s4_db2 = vec![0.0; n];
    let mut d_alpha_db1 = vec![0.0; n];
    let mut d_alpha_db2 = vec![0.0; n];
    let (b1s, b1c, b1q) = (b1 * b1, b1 * b1 * b1, b1.powi(4));
    for i in 0..n {
        graded[0][i] = b1 * t.t1.value[i];
        graded[1][i] = b2 * t.t2.value[i] + b1s * l.s2.value[i];
        graded[2][i] = b1 * b2 * l.p11.value[i] + b1c * l.p30.value[i];
        s4[i] = b1q * l.p40.value[i] + b1s * b2 * l.p21.value[i] + b2 * b2 * l.p02.value[i];
        graded[3][i] = s4[i];
        lambda_s4[i] = b1q * l.p40.lambda[i] + b1s * b2 * l.p21.lambda[i] + b2 * b2 * l.p02.lambda[i];
        lambda_alpha[i] = b1 * t.t1.lambda[i]
            + b2 * t.t2.lambda[i]
            + b1s * l.s2.lambda[i]
            + b1 * b2 * l.p11.lambda[i]
            + b1c * l.p30.lambda[i]
            + lambda_s4[i];
        d_s4_db1[i] = 4.0 * b1c * l.p40.value[i]
            + b1q * l.dp40[i]
            + 2.0 * b1 * b2 * l.p21.value[i]
            + b1s * b2 * l.dp21[i]
            + b2 * b2 * l.dp02[i];
        d_s4_db2[i] = b1s * l.p21.value[i] + 2.0 * b2 * l.p02.value[i];
        d_alpha_db1[i] = t.t1.value[i]
            + 2.0 * b1 * l.s2.value[i]
            + b1s * l.ds2[i]
            + b2 * l.p11.value[i]
            + b1 * b2 * l.dp11[i]
            + 3.0 * b1s * l.p30.value[i]
            + b1c * l.dp30[i]
            + d_s4_db1[i];
        d_alpha_db2[i] = t.t2.value[i] + b1 * l.p11.value[i] + d_s4_db2[i];
    }
    let alpha: Vec<f64> = (0..n).map(|i| graded.iter().map(|g| g[i]).sum()).collect();
    ApproximateProfile {
        b1,
        b2,
        c,
        alpha,
        lambda_alpha,
        d_alpha_db1,
        d_alpha_db2,
        graded,
        s4,
        lambda_s4,
        d_s4_db1,
        d_s4_db2,
    }
}

/// Order ≥ 5 part of 3Qα² + α³.
pub fn cubic_remainder(q: &[f64], graded: &[Vec<f64>; 4]) -> Vec<f64> {
    (0..q.len())
        .map(|i| {
            let a = [graded[0][i], graded[1][i], graded[2][i], graded[3][i]];
            let mut quad = 0.0;
            let mut cube = 0.0;
            for o1 in 0..4 {
                for o2 in 0..4 {
                    let ord2 = o1 + o2 + 2;
                    if ord2 >= 5 {
                        quad += a[o1] * a[o2];
                    }
                    for o3 in 0..4 {
                        if ord2 + o3 + 1 >= 5 {
                            cube += a[o1] * a[o2] * a[o3];
                        }
                    }
                }
            }
            3.0 * q[i] * quad + cube
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ErrorProfile {
    pub psi: Vec<f64>,
    /// The radiation line, the S₄ line, and −R.
    pub lines: [Vec<f64>; 3],
    pub rates: (f64, f64),
}

/// Ψ_b from the reduced three-line form. With `use_system_derivatives = false`
/// the parameters are frozen ((b)_s = 0) and the corresponding ∂_s α is removed.
pub fn error_profile(
    k: &Kernels,
    l: &CorrectionLadder,
    ap: &ApproximateProfile,
    use_system_derivatives: bool,
) -> ErrorProfile {
    let (b1, b2, c) = (ap.b1, ap.b2, ap.c);
    let (db1, db2) = system_rates(b1, b2, c);
    let n = k.len();
    let rad = &l.rad;
    let line1: Vec<f64> = (0..n)
        .map(|i| {
            -b1 * b1 * rad.sigma_tilde[i] + b1 * b2 * rad.inv_sigma_tilde.value[i]
        })
        .collect();
    let line2: Vec<f64> =
        (0..n).map(|i| db1 * ap.d_s4_db1[i] + db2 * ap.d_s4_db2[i] + b1 * ap.lambda_s4[i]).collect();
    let line3: Vec<f64> = cubic_remainder(&k.q, &ap.graded).into_iter().map(|r| -r).collect();
    let mut psi: Vec<f64> = (0..n).map(|i| line1[i] + line2[i] + line3[i]).collect();
    let rates = if use_system_derivatives {
        (db1, db2)
    } else {
        for i in 0..n {
            psi[i] -= db1 * ap.d_alpha_db1[i] + db2 * ap.d_alpha_db2[i];
        }
        (0.0, 0.0)
    };
    ErrorProfile { psi, lines: [line1, line2, line3], rates }
}

/// Ψ_b = ∂_sα + b₁ΛQ_b − ΔQ_b − Q_b³ evaluated term by term, with Hα taken
/// from the ladder sources and ∂_sα = (b)_s·∂_bα. Independent of the reduction.
pub fn error_profile_direct(
    k: &Kernels,
    t: &TProfiles,
    l: &CorrectionLadder,
    ap: &ApproximateProfile,
    rates: (f64, f64),
) -> Vec<f64> {
    let (b1, b2) = (ap.b1, ap.b2);
    let (b1s, b1c) = (b1 * b1, b1 * b1 * b1);
    (0..k.len())
        .map(|i| {
            let h_alpha = -b1 * k.lambda_q[i] - b2 * t.t1.value[i]
                + b1s * l.s2.source[i]
                + b1 * b2 * l.p11.source[i]
                + b1c * l.p30.source[i]
                + b1.powi(4) * l.p40.source[i]
                + b1s * b2 * l.p21.source[i]
                + b2 * b2 * l.p02.source[i];
            let a = ap.alpha[i];
            rates.0 * ap.d_alpha_db1[i] + rates.1 * ap.d_alpha_db2[i]
                + b1 * k.lambda_q[i]
                + b1 * ap.lambda_alpha[i]
                + h_alpha
                - 3.0 * k.q[i] * a * a
                - a * a * a
        })
        .collect()
}

/// Q̃_b = Q + χ_{B₁}α with its error and modulation directions.
#[derive(Debug, Clone)]
pub struct LocalizedProfile {
    pub b1: f64,
    pub b2: f64,
    pub c: f64,
    pub radius: f64,
    pub chi: Vec<f64>,
    pub q_tilde: Vec<f64>,
    pub psi_tilde: Vec<f64>,
    /// ΛQ̃_b, χ∂_{b₁}α, χ∂_{b₂}α.
    pub mod_basis: [Vec<f64>; 3],
    /// α ∂_{b₁}χ_{B₁}: the part of ∂_{b₁}Q̃_b coming from the moving cutoff.
    pub cutoff_drift: Vec<f64>,
    pub alpha: Vec<f64>,
}

pub fn localize(k: &Kernels, ap: &ApproximateProfile, err: &ErrorProfile) -> LocalizedProfile {
    let (b1, b2, c) = (ap.b1, ap.b2, ap.c);
    let (db1, _) = system_rates(b1, b2, c);
    let radius = outer_radius(b1);
    let dr = outer_radius_db1(b1);
    let cut = Cutoff::new(radius);
    let y = k.grid.nodes();
    let n = y.len();
    let mut chi = vec![0.0; n];
    let mut q_tilde = vec![0.0; n];
    let mut psi_tilde = vec![0.0; n];
    let mut m0 = vec![0.0; n];
    let mut m1 = vec![0.0; n];
    let mut m2 = vec![0.0; n];
    let mut drift = vec![0.0; n];
    for i in 0..n {
        let x = cut.value(y[i]);
        let dx = cut.dy(y[i]);
        let dchi_db1 = cut.d_radius(y[i]) * dr;
        let a = ap.alpha[i];
        let da = (ap.lambda_alpha[i] - a) / y[i];
        chi[i] = x;
        q_tilde[i] = k.q[i] + x * a;
        psi_tilde[i] = x * err.psi[i]
            + b1 * (1.0 - x) * k.lambda_q[i]
            + a * (db1 * dchi_db1 + b1 * y[i] * dx - cut.laplacian(y[i]))
            - 2.0 * da * dx
            + 3.0 * k.q[i] * a * a * x * (1.0 - x)
            + a * a * a * x * (1.0 - x * x);
        m0[i] = k.lambda_q[i] + x * ap.lambda_alpha[i] + a * y[i] * dx;
        m1[i] = x * ap.d_alpha_db1[i];
        m2[i] = x * ap.d_alpha_db2[i];
        drift[i] = a * dchi_db1;
    }
    LocalizedProfile {
        b1,
        b2,
        c,
        radius,
        chi,
        q_tilde,
        psi_tilde,
        mod_basis: [m0, m1, m2],
        cutoff_drift: drift,
        alpha: ap.alpha.clone(),
    }
}
