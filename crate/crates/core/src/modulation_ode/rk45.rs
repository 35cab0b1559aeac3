//! Dormand–Prince 5(4) with cubic Hermite dense output and event location.

use crate::error::{BlowupError, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tolerances<const N: usize> {
    pub rtol: f64,
    pub atol: [f64; N],
    pub h_init: f64,
    /// Steps smaller than this times |t| count as a collapse.
    pub h_min_rel: f64,
    pub max_steps: usize,
}

/// One accepted step with endpoint values and derivatives.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    pub f0: [f64; N],
    pub f1: [f64; N],
}

impl<const N: usize> Step<N> {
    /// Cubic Hermite interpolant on [t0, t1].
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let th = (t - self.t0) / h;
        let h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
        let h10 = th * (1.0 - th) * (1.0 - th);
        let h01 = th * th * (3.0 - 2.0 * th);
        let h11 = th * th * (th - 1.0);
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i];
        }
        out
    }

    /// Root of g(t, y(t)) in the step, given a sign change between the
    /// endpoints, by bisection on the interpolant.
    pub fn locate(&self, g: impl Fn(f64, &[f64; N]) -> f64) -> Option<f64> {
        let (mut a, mut b) = (self.t0, self.t1);
        let ga = g(a, &self.y0);
        let gb = g(b, &self.y1);
        if ga == 0.0 {
            return Some(a);
        }
        if ga.signum() == gb.signum() {
            return None;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let gm = g(m, &self.interpolate(m));
            if gm.signum() == ga.signum() {
                a = m;
            } else {
                b = m;
            }
        }
        Some(0.5 * (a + b))
    }
}

pub enum Control<const N: usize> {
    Continue,
    /// Stop at t with state y.
    Stop(f64, [f64; N]),
}

#[derive(Debug, Clone, Copy)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub steps: usize,
    pub rejected: usize,
    pub stopped: bool,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates y' = f(t, y) from t0 to t_end (t_end > t0). `on_step` sees every
/// accepted step and may stop the run inside it.
pub fn integrate<const N: usize>(
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    tol: &Tolerances<N>,
    mut on_step: impl FnMut(&Step<N>) -> Control<N>,
) -> Result<Outcome<N>> {
    if !(t_end > t0) {
        return Err(BlowupError::InvalidArgument(format!("integration interval [{t0}, {t_end}] is empty")));
    }
    let mut t = t0;
    let mut y = y0;
    let mut k0 = f(t, &y)?;
    let mut h = tol.h_init.min(t_end - t0);
    let (mut steps, mut rejected) = (0, 0);
    while t < t_end {
        if steps + rejected >= tol.max_steps {
            return Err(BlowupError::Numerical(format!("step budget exhausted at t = {t}, state {y:?}")));
        }
        if h < tol.h_min_rel * t.abs().max(1.0) {
            return Err(BlowupError::Numerical(format!("step size collapsed to {h} at t = {t}, state {y:?}")));
        }
        h = h.min(t_end - t);
        let mut k = [[0.0; N]; 7];
        k[0] = k0;
        for s in 1..7 {
            let mut ys = y;
            for i in 0..N {
                ys[i] += h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
            }
            k[s] = f(t + C[s] * h, &ys)?;
        }
        let mut y1 = y;
        for i in 0..N {
            y1[i] += h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>();
        }
        // FSAL: stage 7 is evaluated at y1.
        k[6] = f(t + h, &y1)?;
        let mut err = 0.0f64;
        for i in 0..N {
            let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let sc = tol.atol[i] + tol.rtol * y[i].abs().max(y1[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            rejected += 1;
            h *= 0.1;
            continue;
        }
        if err <= 1.0 {
            let step = Step { t0: t, t1: t + h, y0: y, y1, f0: k0, f1: k[6] };
            steps += 1;
            t += h;
            y = y1;
            k0 = k[6];
            if let Control::Stop(ts, ys) = on_step(&step) {
                return Ok(Outcome { t: ts, y: ys, steps, rejected, stopped: true });
            }
        } else {
            rejected += 1;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
    }
    Ok(Outcome { t, y, steps, rejected, stopped: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol<const N: usize>() -> Tolerances<N> {
        Tolerances { rtol: 1e-10, atol: [1e-14; N], h_init: 1e-3, h_min_rel: 1e-14, max_steps: 100_000 }
    }

    #[test]
    fn exponential_decay() {
        let out = integrate(|_, y: &[f64; 1]| Ok([-y[0]]), 0.0, [1.0], 5.0, &tol(), |_| Control::Continue).unwrap();
        assert!((out.y[0] - (-5.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_conserves_energy() {
        let out = integrate(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), 0.0, [1.0, 0.0], 20.0, &tol(), |_| Control::Continue).unwrap();
        assert!((out.y[0] - 20f64.cos()).abs() < 1e-8);
        assert!((out.y[0].powi(2) + out.y[1].powi(2) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn event_is_located_on_the_interpolant() {
        // y = cos t first reaches 0 at π/2.
        let mut hit = None;
        integrate(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), 0.0, [1.0, 0.0], 3.0, &tol(), |st| {
            match st.locate(|_, y| y[0]) {
                Some(te) => {
                    hit = Some(te);
                    Control::Stop(te, st.interpolate(te))
                }
                None => Control::Continue,
            }
        })
        .unwrap();
        assert!((hit.unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-8);
    }

    #[test]
    fn blow_up_reports_collapse() {
        let r = integrate(|_, y: &[f64; 1]| Ok([y[0] * y[0]]), 0.0, [1.0], 2.0, &tol(), |_| Control::Continue);
        assert!(r.is_err());
    }
}
