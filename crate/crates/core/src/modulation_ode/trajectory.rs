//! Integration of the b-system in σ = log s with trap events on |V_k|.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::coords::{b_to_u, mat_vec, u_to_b, u_to_v, v_to_u, A};
use super::equilibrium::b_e;
use super::rk45::{integrate as rk45, Control, Step, Tolerances};
use super::system::{ode_rhs, CMode};
use crate::error::{BlowupError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Dynamics {
    /// The nonlinear b-system.
    Full(CMode),
    /// s U_s = A U, the test oracle.
    Linearized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub s: f64,
    pub b: [f64; 2],
    pub u: [f64; 2],
    pub v: [f64; 2],
    pub b_e: [f64; 2],
    pub lambda: f64,
    pub t: f64,
}

impl Frame {
    /// Frame at s with the given V, λ and t.
    pub fn from_v(s: f64, v: [f64; 2], lambda: f64, t: f64) -> Result<Self> {
        let u = v_to_u(v);
        let b = u_to_b(s, u)?;
        let (e1, e2) = b_e(s)?;
        Ok(Self { s, b, u, v, b_e: [e1, e2], lambda, t })
    }

    pub fn from_b(s: f64, b: [f64; 2], lambda: f64, t: f64) -> Result<Self> {
        let u = b_to_u(s, b)?;
        let (e1, e2) = b_e(s)?;
        Ok(Self { s, b, u, v: u_to_v(u), b_e: [e1, e2], lambda, t })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitEvent {
    pub s: f64,
    /// 1 or 2: which |V_k| reached the bound.
    pub coordinate: usize,
    /// Sign of d/ds V_k² at the exit.
    pub outgoing_sign: f64,
    pub v: [f64; 2],
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Trap {
    pub v_bound: f64,
}

impl Default for Trap {
    fn default() -> Self {
        Self { v_bound: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub rtol: f64,
    /// Recorded frames per decade of s.
    pub samples_per_decade: usize,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { rtol: 1e-11, samples_per_decade: 50, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub dynamics: Dynamics,
    pub frames: Vec<Frame>,
    pub exit: Option<ExitEvent>,
}

impl Trajectory {
    pub fn last(&self) -> &Frame {
        self.frames.last().expect("trajectory has frames")
    }

    pub fn s_end(&self) -> f64 {
        self.last().s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["s", "b1", "b2", "U1", "U2", "V1", "V2", "lambda", "t"])?;
        for f in &self.frames {
            let row = [f.s, f.b[0], f.b[1], f.u[0], f.u[1], f.v[0], f.v[1], f.lambda, f.t];
            w.write_record(row.iter().map(|x| format!("{x:e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// State is (x₁, x₂, log λ, t) with x = b for the full system and x = U for
/// the linearised one; the independent variable is σ = log s.
fn state_rhs(dynamics: Dynamics, sigma: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
    let s = sigma.exp();
    let lambda = y[2].exp();
    match dynamics {
        Dynamics::Full(mode) => {
            let (db, dl) = ode_rhs([y[0], y[1]], mode)?;
            Ok([s * db[0], s * db[1], s * dl, s * lambda * lambda])
        }
        Dynamics::Linearized => {
            let du = mat_vec(&A, [y[0], y[1]]);
            let b = u_to_b(s, [y[0], y[1]])?;
            Ok([du[0], du[1], -s * b[0], s * lambda * lambda])
        }
    }
}

fn frame_of(dynamics: Dynamics, sigma: f64, y: &[f64; 4]) -> Result<Frame> {
    let s = sigma.exp();
    let (lambda, t) = (y[2].exp(), y[3]);
    match dynamics {
        Dynamics::Full(_) => Frame::from_b(s, [y[0], y[1]], lambda, t),
        Dynamics::Linearized => Frame::from_v(s, u_to_v([y[0], y[1]]), lambda, t),
    }
}

fn v_of(dynamics: Dynamics, sigma: f64, y: &[f64; 4]) -> [f64; 2] {
    match dynamics {
        Dynamics::Full(_) => b_to_u(sigma.exp(), [y[0], y[1]]).map(u_to_v).unwrap_or([f64::NAN; 2]),
        Dynamics::Linearized => u_to_v([y[0], y[1]]),
    }
}

/// Integrates from `start` to `s_end`, stopping at the first s where |V₁| or
/// |V₂| reaches the trap bound.
pub fn integrate(start: &Frame, s_end: f64, trap: Trap, dynamics: Dynamics, opts: &IntegrateOptions) -> Result<Trajectory> {
    if start.v.iter().any(|v| v.abs() > trap.v_bound) {
        return Err(BlowupError::Precondition(format!("start V = {:?} outside the trap |V| <= {}", start.v, trap.v_bound)));
    }
    if !(s_end > start.s) {
        return Err(BlowupError::InvalidArgument(format!("s_end = {s_end} not after s0 = {}", start.s)));
    }
    let x0 = match dynamics {
        Dynamics::Full(_) => start.b,
        Dynamics::Linearized => start.u,
    };
    let y0 = [x0[0], x0[1], start.lambda.ln(), start.t];
    let sig0 = start.s.ln();
    let sig1 = s_end.ln();
    // b_k decays like s^{-k}; the floors track the smallest size reached.
    let r = start.s / s_end;
    let atol_x = match dynamics {
        Dynamics::Full(_) => [start.b_e[0].abs() * 1e-12 * r, start.b_e[0].powi(2) * 1e-12 * r * r],
        Dynamics::Linearized => [1e-13, 1e-13],
    };
    let tol = Tolerances {
        rtol: opts.rtol,
        atol: [atol_x[0], atol_x[1], 1e-12, 1e-12 * start.s],
        h_init: 1e-3,
        h_min_rel: 1e-14,
        max_steps: opts.max_steps,
    };
    let dsig = std::f64::consts::LN_10 / opts.samples_per_decade.max(1) as f64;
    let mut frames = vec![*start];
    let mut next_sample = sig0 + dsig;
    let mut exit = None;
    let mut failure = None;
    let bound = trap.v_bound;
    let on_step = |st: &Step<4>| -> Control<4> {
        // Earliest crossing of either bound in this step.
        let mut hit: Option<(f64, usize)> = None;
        for k in 0..2 {
            let g = |sig: f64, y: &[f64; 4]| bound - v_of(dynamics, sig, y)[k].abs();
            if g(st.t1, &st.y1) <= 0.0 {
                if let Some(te) = st.locate(g) {
                    if hit.is_none_or(|(t, _)| te < t) {
                        hit = Some((te, k));
                    }
                }
            }
        }
        let stop_at = hit.map_or(st.t1, |(t, _)| t);
        while next_sample < stop_at && next_sample < sig1 {
            match frame_of(dynamics, next_sample, &st.interpolate(next_sample)) {
                Ok(f) => frames.push(f),
                Err(e) => {
                    failure = Some(e);
                    return Control::Stop(st.t0, st.y0);
                }
            }
            next_sample += dsig;
        }
        if let Some((te, k)) = hit {
            let ye = st.interpolate(te);
            // d/dσ V_k from a centred difference of the interpolant.
            let h = 1e-6 * (st.t1 - st.t0);
            let (ta, tb) = ((te - h).max(st.t0), (te + h).min(st.t1));
            let dv = (v_of(dynamics, tb, &st.interpolate(tb))[k] - v_of(dynamics, ta, &st.interpolate(ta))[k]) / (tb - ta);
            let v = v_of(dynamics, te, &ye);
            exit = Some(ExitEvent { s: te.exp(), coordinate: k + 1, outgoing_sign: (v[k] * dv).signum(), v });
            return Control::Stop(te, ye);
        }
        Control::Continue
    };
    let out = rk45(|sig, y| state_rhs(dynamics, sig, y), sig0, y0, sig1, &tol, on_step)?;
    if let Some(e) = failure {
        return Err(e);
    }
    let last = frame_of(dynamics, out.t, &out.y)?;
    if frames.last().is_none_or(|f| f.s < last.s) {
        frames.push(last);
    }
    Ok(Trajectory { dynamics, frames, exit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linearized_mode_follows_the_closed_form() {
        let s0 = 1e3;
        let start = Frame::from_v(s0, [0.5, 0.1], 1.0, 0.0).unwrap();
        let tr = integrate(&start, 1e5, Trap { v_bound: 1e9 }, Dynamics::Linearized, &IntegrateOptions::default()).unwrap();
        for f in tr.frames.iter().step_by(17) {
            let r = f.s / s0;
            assert!((f.v[0] - 0.5 / r).abs() < 1e-9, "s={}", f.s);
            assert!((f.v[1] - 0.1 * r.powf(2.0 / 3.0)).abs() < 1e-9 * r, "s={}", f.s);
        }
    }

    #[test]
    fn linearized_exit_time_is_explicit() {
        let s0 = 1e3;
        let start = Frame::from_v(s0, [0.0, -0.5], 1.0, 0.0).unwrap();
        let tr = integrate(&start, 1e8, Trap::default(), Dynamics::Linearized, &IntegrateOptions::default()).unwrap();
        let e = tr.exit.unwrap();
        assert_eq!(e.coordinate, 2);
        assert_eq!(e.outgoing_sign, 1.0);
        let want = s0 * 4f64.powf(1.5);
        assert!((e.s / want - 1.0).abs() < 1e-7, "{} vs {want}", e.s);
    }

    #[test]
    fn lambda_decreases_and_time_increases() {
        let start = Frame::from_v(1e3, [0.0, 0.0], 1.0, 0.0).unwrap();
        let tr = integrate(&start, 1e5, Trap::default(), Dynamics::Full(CMode::Asymptotic), &IntegrateOptions::default()).unwrap();
        for w in tr.frames.windows(2) {
            assert!(w[1].s > w[0].s);
            assert!(w[1].lambda < w[0].lambda);
            assert!(w[1].t > w[0].t);
            assert!(w[1].b[0] > 0.0);
        }
    }

    #[test]
    fn rejects_start_outside_trap() {
        let start = Frame::from_v(1e3, [0.0, 2.5], 1.0, 0.0).unwrap();
        assert!(integrate(&start, 1e4, Trap::default(), Dynamics::Linearized, &IntegrateOptions::default()).is_err());
    }
}
