//! Bisection over V₂(s₀) for the trajectory that stays trapped longest.

use serde::{Deserialize, Serialize};

use super::trajectory::{integrate, Dynamics, Frame, IntegrateOptions, Trajectory, Trap};
use crate::error::{BlowupError, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShootConfig {
    pub s0: f64,
    pub bracket: [f64; 2],
    /// Stop once a probe stays trapped up to this s.
    pub s_budget: f64,
    pub width_tol: f64,
    pub max_iter: usize,
    pub trap: Trap,
    pub dynamics: Dynamics,
    pub options: IntegrateOptions,
}

/// A probe: V₂(s₀), its exit s (s_budget if trapped) and the sign of V₂ there.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Probe {
    pub v2: f64,
    pub s_exit: f64,
    pub exit_sign: f64,
    pub trapped: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShootResult {
    pub v2_star: f64,
    pub bracket: [f64; 2],
    pub endpoints: [Probe; 2],
    pub probes: Vec<Probe>,
    /// Longest-trapped trajectory.
    pub best: Trajectory,
}

impl ShootResult {
    /// (s_exit(best) − s₀) / max over the endpoints of (s_exit − s₀).
    pub fn trapped_gain(&self, s0: f64) -> f64 {
        let e = self.endpoints.iter().map(|p| p.s_exit - s0).fold(0.0, f64::max);
        (self.best.s_end() - s0) / e
    }
}

/// Start frame with no stable component: V = (0, v₂), λ = 1, t = 0.
pub fn start_frame(s0: f64, v2: f64) -> Result<Frame> {
    Frame::from_v(s0, [0.0, v2], 1.0, 0.0)
}

pub fn probe(cfg: &ShootConfig, v2: f64) -> Result<(Probe, Trajectory)> {
    let tr = integrate(&start_frame(cfg.s0, v2)?, cfg.s_budget, cfg.trap, cfg.dynamics, &cfg.options)?;
    let p = match tr.exit {
        Some(e) => Probe { v2, s_exit: e.s, exit_sign: e.v[1].signum(), trapped: false },
        None => Probe { v2, s_exit: tr.s_end(), exit_sign: 0.0, trapped: true },
    };
    Ok((p, tr))
}

pub fn shoot_unstable(cfg: &ShootConfig) -> Result<ShootResult> {
    let [lo0, hi0] = cfg.bracket;
    if !(lo0 < hi0) {
        return Err(BlowupError::InvalidArgument(format!("bracket [{lo0}, {hi0}] is empty")));
    }
    let (a, b) = rayon::join(|| probe(cfg, lo0), || probe(cfg, hi0));
    let (pa, ta) = a?;
    let (pb, tb) = b?;
    if pa.trapped || pb.trapped {
        let (p, t) = if pa.trapped { (pa, ta) } else { (pb, tb) };
        return Ok(ShootResult { v2_star: p.v2, bracket: [lo0, hi0], endpoints: [pa, pb], probes: vec![pa, pb], best: t });
    }
    if pa.exit_sign == pb.exit_sign {
        return Err(BlowupError::Precondition(format!(
            "bracket [{lo0}, {hi0}] invalid: both endpoints exit with V2 of sign {}",
            pa.exit_sign
        )));
    }
    let mut probes = vec![pa, pb];
    let (mut lo, mut hi) = (pa, pb);
    let mut best = if pa.s_exit >= pb.s_exit { ta } else { tb };
    for _ in 0..cfg.max_iter {
        if hi.v2 - lo.v2 < cfg.width_tol {
            break;
        }
        let mid = 0.5 * (lo.v2 + hi.v2);
        let (pm, tm) = probe(cfg, mid)?;
        probes.push(pm);
        if tm.s_end() >= best.s_end() {
            best = tm;
        }
        if pm.trapped {
            lo = pm;
            hi = pm;
            break;
        }
        if pm.exit_sign == lo.exit_sign {
            lo = pm;
        } else {
            hi = pm;
        }
    }
    Ok(ShootResult { v2_star: 0.5 * (lo.v2 + hi.v2), bracket: [lo.v2, hi.v2], endpoints: [pa, pb], probes, best })
}

/// V₂ of a trajectory at s by linear interpolation in log s.
pub fn v2_at(tr: &Trajectory, s: f64) -> Option<f64> {
    let f = &tr.frames;
    let i = f.partition_point(|x| x.s <= s);
    if i == 0 || i == f.len() {
        return (f.last()?.s == s).then(|| f.last().map(|x| x.v[1])).flatten();
    }
    let (a, b) = (&f[i - 1], &f[i]);
    let w = (s / a.s).ln() / (b.s / a.s).ln();
    Some(a.v[1] + w * (b.v[1] - a.v[1]))
}

/// Growth rate of the distance to the shot trajectory in log s:
/// log(|ΔV₂(s_exit)| / |ΔV₂(s₀)|) / log(s_exit / s₀). The linearised
/// system predicts 2/3.
pub fn growth_exponent(shot: &Trajectory, unshot: &Trajectory) -> Result<f64> {
    let e = unshot.exit.ok_or_else(|| BlowupError::Precondition("trajectory did not exit".into()))?;
    let s0 = unshot.frames[0].s;
    let d0 = unshot.frames[0].v[1] - shot.frames[0].v[1];
    let ref_exit = v2_at(shot, e.s).ok_or_else(|| BlowupError::Precondition("shot trajectory ends before the exit".into()))?;
    let d1 = e.v[1] - ref_exit;
    Ok((d1.abs() / d0.abs()).ln() / (e.s / s0).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation_ode::system::CMode;

    fn cfg(bracket: [f64; 2]) -> ShootConfig {
        ShootConfig {
            s0: 1e3,
            bracket,
            s_budget: 1e6,
            width_tol: 1e-9,
            max_iter: 60,
            trap: Trap::default(),
            dynamics: Dynamics::Full(CMode::Asymptotic),
            options: IntegrateOptions { samples_per_decade: 10, ..Default::default() },
        }
    }

    #[test]
    fn bracket_width_halves() {
        let r = shoot_unstable(&ShootConfig { max_iter: 2, width_tol: 0.0, ..cfg([-1.5, 1.5]) }).unwrap();
        assert_eq!(r.probes.len(), 4);
        assert!(((r.bracket[1] - r.bracket[0]) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn same_signed_bracket_is_rejected() {
        let r = shoot_unstable(&cfg([0.5, 1.0]));
        assert!(matches!(r, Err(BlowupError::Precondition(_))));
    }

    #[test]
    fn linearized_shot_is_the_origin() {
        let r = shoot_unstable(&ShootConfig { dynamics: Dynamics::Linearized, s_budget: 1e30, ..cfg([-1.0, 0.5]) }).unwrap();
        assert!(r.v2_star.abs() < 1e-8);
    }
}
