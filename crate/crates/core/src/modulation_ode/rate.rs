//! λ(s), t(s), the blow-up time and the rate fit
//! log λ = p log(T−t) + q log|log(T−t)| + log c.

use serde::{Deserialize, Serialize};

use super::trajectory::Trajectory;
use crate::error::{BlowupError, Result};
use crate::linalg::least_squares;

/// Exponent of log s in the asymptotic λ ~ c (log s)^{4/9} s^{−2/3}.
pub const LOG_POWER: f64 = 4.0 / 9.0;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateFit {
    pub p: f64,
    pub q: f64,
    pub c: f64,
    /// RMS residual of the log fit.
    pub residual: f64,
    pub s_range: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateReport {
    pub s: Vec<f64>,
    pub lambda: Vec<f64>,
    pub t: Vec<f64>,
    pub t_blowup: f64,
    /// Tail ∫_{s_last}^∞ λ² ds with one and with two asymptotic terms.
    pub tail_one_term: f64,
    pub tail_two_term: f64,
    pub tail_error: f64,
    pub fit: RateFit,
    /// max/min − 1 of λ s^{2/3} (log s)^{−4/9} over the final decade.
    pub drift: f64,
}

/// ∫_s^∞ λ² dσ for λ = c (log σ)^{4/9} σ^{−2/3} with c matched at s:
/// 3λ²s (1 + (8/3)/log s) to two terms.
pub fn tail_integral(s: f64, lambda: f64, two_terms: bool) -> f64 {
    let lead = 3.0 * lambda * lambda * s;
    if two_terms {
        lead * (1.0 + 2.0 * LOG_POWER * 3.0 / s.ln())
    } else {
        lead
    }
}

pub fn fit_rate(lambda: &[f64], t_left: &[f64], s_range: [f64; 2]) -> Result<RateFit> {
    if lambda.len() != t_left.len() || lambda.len() < 4 {
        return Err(BlowupError::InvalidArgument("rate fit needs at least four matched samples".into()));
    }
    // log|log(T−t)| is singular at T − t = 1; all samples must sit on one side.
    let side = t_left[0].ln().signum();
    if t_left.iter().any(|&x| !(x > 0.0) || x.ln().signum() != side || x.ln().abs() < 0.1) {
        return Err(BlowupError::Precondition("T - t must be positive and stay away from 1 for the log-log fit".into()));
    }
    let rows: Vec<Vec<f64>> = t_left.iter().map(|&x| vec![x.ln(), x.ln().abs().ln(), 1.0]).collect();
    let rhs: Vec<f64> = lambda.iter().map(|l| l.ln()).collect();
    let (coef, res) = least_squares(&rows, &rhs)?;
    Ok(RateFit { p: coef[0], q: coef[1], c: coef[2].exp(), residual: res, s_range })
}

pub fn lambda_drift(s: &[f64], lambda: &[f64], from: f64) -> f64 {
    let vals: Vec<f64> = s
        .iter()
        .zip(lambda)
        .filter(|(&x, _)| x >= from)
        .map(|(&x, &l)| l * x.powf(2.0 / 3.0) * x.ln().powf(-LOG_POWER))
        .collect();
    let max = vals.iter().copied().fold(f64::MIN, f64::max);
    let min = vals.iter().copied().fold(f64::MAX, f64::min);
    max / min - 1.0
}

/// λ and t are carried by the integrator as quadratures of −b₁ and λ²
/// (in log s); this adds the tail, fits the rate on s ≥ `fit_from` and
/// measures the drift over the final decade.
pub fn reconstruct_rate(traj: &Trajectory, fit_from: f64) -> Result<RateReport> {
    let f0 = traj.frames.first().ok_or_else(|| BlowupError::InvalidArgument("empty trajectory".into()))?;
    let last = traj.last();
    if last.s < 1e3 * f0.s {
        return Err(BlowupError::Precondition(format!("trajectory spans [{}, {}], fewer than three decades", f0.s, last.s)));
    }
    let s: Vec<f64> = traj.frames.iter().map(|f| f.s).collect();
    let lambda: Vec<f64> = traj.frames.iter().map(|f| f.lambda).collect();
    let t: Vec<f64> = traj.frames.iter().map(|f| f.t).collect();
    let tail_one_term = tail_integral(last.s, last.lambda, false);
    let tail_two_term = tail_integral(last.s, last.lambda, true);
    let t_blowup = last.t + tail_two_term;
    let idx: Vec<usize> = (0..s.len()).filter(|&i| s[i] >= fit_from).collect();
    let fit = fit_rate(
        &idx.iter().map(|&i| lambda[i]).collect::<Vec<_>>(),
        &idx.iter().map(|&i| t_blowup - t[i]).collect::<Vec<_>>(),
        [fit_from.max(f0.s), last.s],
    )?;
    let drift = lambda_drift(&s, &lambda, last.s / 10.0);
    Ok(RateReport {
        s,
        lambda,
        t,
        t_blowup,
        tail_one_term,
        tail_two_term,
        tail_error: (tail_two_term - tail_one_term).abs(),
        fit,
        drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation_ode::trajectory::{Dynamics, Frame};
    use crate::modulation_ode::CMode;

    /// λ = k s^{−2/3}, so T − t = 3k² s^{−1/3} exactly.
    fn synthetic(k: f64) -> Trajectory {
        let frames = (0..=300)
            .map(|i| {
                let s = 10f64.powf(3.0 + 6.0 * i as f64 / 300.0);
                let lambda = k * s.powf(-2.0 / 3.0);
                let t = 3.0 * k * k * (1e3f64.powf(-1.0 / 3.0) - s.powf(-1.0 / 3.0));
                Frame { s, b: [0.0; 2], u: [0.0; 2], v: [0.0; 2], b_e: [0.0; 2], lambda, t }
            })
            .collect();
        Trajectory { dynamics: Dynamics::Full(CMode::Asymptotic), frames, exit: None }
    }

    #[test]
    fn pure_power_law_gives_p_two_q_zero() {
        let tr = synthetic(0.7);
        let s = tr.last().s;
        // With λ = k s^{−2/3} the one-term tail is exact.
        let tail = tail_integral(s, tr.last().lambda, false);
        let t_left: Vec<f64> = tr.frames.iter().map(|f| tr.last().t + tail - f.t).collect();
        let lam: Vec<f64> = tr.frames.iter().map(|f| f.lambda).collect();
        let fit = fit_rate(&lam, &t_left, [1e3, s]).unwrap();
        assert!((fit.p - 2.0).abs() < 1e-9 && fit.q.abs() < 1e-8, "{fit:?}");
    }

    #[test]
    fn two_term_tail_matches_quadrature() {
        let s: f64 = 1e8;
        let lam = |x: f64| x.ln().powf(LOG_POWER) * x.powf(-2.0 / 3.0);
        // ∫_s^∞ λ² dx in log variables: x = e^u.
        let exact = crate::radial_core::quad::integrate(|u: f64| lam(u.exp()).powi(2) * u.exp(), s.ln(), s.ln() + 200.0, 1e-12);
        let one = tail_integral(s, lam(s), false);
        let two = tail_integral(s, lam(s), true);
        assert!((two / exact - 1.0).abs() < (one / exact - 1.0).abs());
        assert!((two / exact - 1.0).abs() < 5e-3);
    }

    #[test]
    fn short_trajectories_are_rejected() {
        let mut tr = synthetic(1.0);
        tr.frames.truncate(100);
        assert!(reconstruct_rate(&tr, 1e3).is_err());
    }

    #[test]
    fn drift_vanishes_on_the_asymptotic_law() {
        let s: Vec<f64> = (0..50).map(|i| 1e8 * 10f64.powf(i as f64 / 49.0)).collect();
        let l: Vec<f64> = s.iter().map(|x| 2.0 * x.ln().powf(LOG_POWER) * x.powf(-2.0 / 3.0)).collect();
        assert!(lambda_drift(&s, &l, 1e8) < 1e-12);
    }
}
