//! Finite-difference check of the monotonicity inequalities
//! d/dt(λ⁻¹⁰Ξ₆) ≤ C b₁/λ¹² [b₁⁶/|log b₁|² + Ξ₆/√log M + b₁³√Ξ₆/|log b₁|],
//! d/dt(λ⁻⁶Ξ₄) ≤ C b₁⁵/λ⁸ and d/dt(λ⁻²Ξ₂) ≤ C b₁^{7/3}/λ⁴.

use serde::{Deserialize, Serialize};

use super::run::FlowRecord;
use crate::error::{BlowupError, Result};
use crate::linalg::fit_line;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LyapunovReport {
    /// Smallest C making each inequality hold at every interior record
    /// (Ξ₆, Ξ₄, Ξ₂ order); zero when the left side never exceeds zero.
    pub c_fit: [f64; 3],
    /// The same constants on the first and on the second half of the run.
    pub c_halves: [[f64; 3]; 2],
    /// C for the Ξ₂ inequality with b₁^{5/2} in place of b₁^{7/3}.
    pub c_xi2_alt: f64,
    /// (s, left side / right side) for each inequality.
    pub margins: Vec<(f64, [f64; 3])>,
    /// Fitted d log Ξ₆ / ds over the run.
    pub xi6_growth_rate: f64,
}

impl LyapunovReport {
    /// max/min of the two half-run constants, per inequality (1 when both vanish).
    pub fn stability(&self) -> [f64; 3] {
        [0, 1, 2].map(|k| {
            let (a, b) = (self.c_halves[0][k], self.c_halves[1][k]);
            if a == 0.0 && b == 0.0 {
                1.0
            } else if a == 0.0 || b == 0.0 {
                f64::INFINITY
            } else {
                a.max(b) / a.min(b)
            }
        })
    }

    /// True when the fitted growth of Ξ₆ is at least `rate` (a loss of margin).
    pub fn flags_growth(&self, rate: f64) -> bool {
        self.xi6_growth_rate >= rate
    }
}

fn rhs(r: &FlowRecord, log_m: f64) -> [f64; 4] {
    let b1 = r.b[0];
    let lb = b1.ln().abs();
    let l = r.lambda;
    let xi6 = r.xi[3];
    [
        b1 / l.powi(12) * (b1.powi(6) / (lb * lb) + xi6 / log_m.sqrt() + b1.powi(3) / lb * xi6.sqrt()),
        b1.powi(5) / l.powi(8),
        b1.powf(7.0 / 3.0) / l.powi(4),
        b1.powf(2.5) / l.powi(4),
    ]
}

fn lhs_quantity(r: &FlowRecord, k: usize) -> f64 {
    match k {
        0 => r.xi[3] / r.lambda.powi(10),
        1 => r.xi[2] / r.lambda.powi(6),
        _ => r.xi[1] / r.lambda.powi(2),
    }
}

/// Smallest C with |D| ≤ C (√Ξ₆/√log M + b₁³/|log b₁| + b₁^{7/2}) at every
/// record, |D| the Euclidean norm of the three residuals.
pub fn residual_constant(history: &[FlowRecord], m: f64) -> Result<f64> {
    if history.is_empty() {
        return Err(BlowupError::Precondition("empty history".into()));
    }
    let sqrt_log_m = m.ln().sqrt();
    let mut c = 0.0f64;
    for r in history {
        let b1 = r.b[0];
        if !(b1 > 0.0 && b1 < 1.0) {
            return Err(BlowupError::Precondition(format!("b1 = {b1} outside (0, 1) at s = {}", r.s)));
        }
        let scale = r.xi[3].sqrt() / sqrt_log_m + b1.powi(3) / b1.ln().abs() + b1.powf(3.5);
        let d = r.d.iter().map(|x| x * x).sum::<f64>().sqrt();
        c = c.max(d / scale);
    }
    Ok(c)
}

pub fn lyapunov_monitor(history: &[FlowRecord], m: f64) -> Result<LyapunovReport> {
    if history.len() < 3 {
        return Err(BlowupError::Precondition(format!("{} records; need at least three", history.len())));
    }
    let log_m = m.ln();
    let mut margins = Vec::new();
    let mut ratios_alt = Vec::new();
    for w in history.windows(3) {
        let (a, mid, c) = (&w[0], &w[1], &w[2]);
        let dt = c.t - a.t;
        if !(dt > 0.0) {
            return Err(BlowupError::Precondition("time does not increase along the history".into()));
        }
        let bound = rhs(mid, log_m);
        let mut row = [0.0; 3];
        for (k, v) in row.iter_mut().enumerate() {
            let d = (lhs_quantity(c, k) - lhs_quantity(a, k)) / dt;
            *v = d / bound[k];
        }
        ratios_alt.push((lhs_quantity(c, 2) - lhs_quantity(a, 2)) / dt / bound[3]);
        margins.push((mid.s, row));
    }
    let c_of = |rows: &[(f64, [f64; 3])]| [0, 1, 2].map(|k| rows.iter().map(|(_, r)| r[k]).fold(0.0, f64::max));
    let half = margins.len() / 2;
    let c_halves = [c_of(&margins[..half.max(1)]), c_of(&margins[half..])];
    let (s, l): (Vec<f64>, Vec<f64>) = history.iter().filter(|r| r.xi[3] > 0.0).map(|r| (r.s, r.xi[3].ln())).unzip();
    let xi6_growth_rate = if s.len() >= 2 { fit_line(&s, &l)?.0 } else { 0.0 };
    Ok(LyapunovReport {
        c_fit: c_of(&margins),
        c_halves,
        c_xi2_alt: ratios_alt.into_iter().fold(0.0, f64::max),
        margins,
        xi6_growth_rate,
    })
}
