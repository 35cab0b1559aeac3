//! `ode` and `shoot`: trajectories of the modulation system and the blow-up
//! rate reconstructed from them.

use blowup_core::modulation_ode::shoot::Probe;
use blowup_core::modulation_ode::{
    integrate, reconstruct_rate, shoot_unstable, Dynamics, ExitEvent, Frame, RateFit, RateReport, Trajectory,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{num, OutputDir};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateSummary {
    pub t_blowup: f64,
    pub tail_one_term: f64,
    pub tail_two_term: f64,
    pub tail_error: f64,
    pub fit: RateFit,
    pub drift: f64,
}

impl From<&RateReport> for RateSummary {
    fn from(r: &RateReport) -> Self {
        Self {
            t_blowup: r.t_blowup,
            tail_one_term: r.tail_one_term,
            tail_two_term: r.tail_two_term,
            tail_error: r.tail_error,
            fit: r.fit,
            drift: r.drift,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OdeSummary {
    pub dynamics: Dynamics,
    pub s0: f64,
    pub v0: [f64; 2],
    pub s_last: f64,
    pub frames: usize,
    pub exit: Option<ExitEvent>,
    pub rate: Option<RateSummary>,
    /// Why there is no rate, if there is none.
    pub rate_note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShootSummary {
    pub dynamics: Dynamics,
    pub s0: f64,
    pub v2_star: f64,
    pub bracket: [f64; 2],
    pub endpoints: [Probe; 2],
    pub probes: usize,
    /// Trapped time of the best probe over that of the better endpoint.
    pub trapped_gain: f64,
    pub best_s_last: f64,
    pub best_exit: Option<ExitEvent>,
    pub rate: Option<RateSummary>,
    pub rate_note: Option<String>,
}

fn rate_of(tr: &Trajectory, fit_from: f64, out: &OutputDir) -> Result<(Option<RateSummary>, Option<String>)> {
    match reconstruct_rate(tr, fit_from) {
        Ok(r) => {
            let rows: Vec<Vec<String>> = (0..r.s.len())
                .map(|i| vec![num(r.s[i]), num(r.lambda[i]), num(r.t[i]), num(r.t_blowup - r.t[i])])
                .collect();
            out.write_csv("rate.csv", &["s", "lambda", "t", "T_minus_t"], &rows)?;
            Ok((Some(RateSummary::from(&r)), None))
        }
        Err(e) => Ok((None, Some(e.to_string()))),
    }
}

fn rate_line(rate: &Option<RateSummary>, note: &Option<String>) -> String {
    match (rate, note) {
        (Some(r), _) => format!("rate fit: p = {:.4}, q = {:.4}, drift {:.2e}", r.fit.p, r.fit.q, r.drift),
        (None, Some(n)) => format!("no rate fit: {n}"),
        (None, None) => "no rate fit".into(),
    }
}

pub fn run_ode(cfg: &RunConfig, out: &OutputDir) -> Result<Vec<String>> {
    let o = &cfg.ode;
    let start = Frame::from_v(o.s0, o.v0, 1.0, 0.0)?;
    let tr = integrate(&start, o.s_end, o.trap(), o.dynamics(), &o.options())?;
    tr.write_csv(&out.file("trajectory.csv"))?;
    let (rate, rate_note) = rate_of(&tr, o.fit_from(), out)?;
    let summary = OdeSummary {
        dynamics: tr.dynamics,
        s0: o.s0,
        v0: o.v0,
        s_last: tr.s_end(),
        frames: tr.frames.len(),
        exit: tr.exit,
        rate,
        rate_note,
    };
    out.write_json("ode.json", &summary)?;
    let exit = match &summary.exit {
        Some(e) => format!("exit through V{} at s = {:.6e}, outgoing sign {:+}", e.coordinate, e.s, e.outgoing_sign),
        None => format!("trapped up to s = {:.6e}", summary.s_last),
    };
    Ok(vec![exit, rate_line(&summary.rate, &summary.rate_note)])
}

pub fn run_shoot(cfg: &RunConfig, out: &OutputDir) -> Result<Vec<String>> {
    let sc = cfg.shoot_config();
    let res = shoot_unstable(&sc)?;
    res.best.write_csv(&out.file("trajectory.csv"))?;
    let rows: Vec<Vec<String>> = res
        .probes
        .iter()
        .map(|p| vec![num(p.v2), num(p.s_exit), num(p.exit_sign), p.trapped.to_string()])
        .collect();
    out.write_csv("probes.csv", &["V2_0", "s_exit", "exit_sign", "trapped"], &rows)?;
    let (rate, rate_note) = rate_of(&res.best, cfg.ode.fit_from(), out)?;
    let summary = ShootSummary {
        dynamics: sc.dynamics,
        s0: sc.s0,
        v2_star: res.v2_star,
        bracket: res.bracket,
        endpoints: res.endpoints,
        probes: res.probes.len(),
        trapped_gain: res.trapped_gain(sc.s0),
        best_s_last: res.best.s_end(),
        best_exit: res.best.exit,
        rate,
        rate_note,
    };
    out.write_json("shoot.json", &summary)?;
    Ok(vec![
        format!(
            "V2* = {:.15e} after {} probes; trapped to s = {:.3e} (gain {:.3e})",
            summary.v2_star, summary.probes, summary.best_s_last, summary.trapped_gain
        ),
        rate_line(&summary.rate, &summary.rate_note),
    ])
}
