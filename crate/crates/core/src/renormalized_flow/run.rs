//! Trajectories of the flow: per-step records, exit detection and the
//! hand-off of λ(s), b(s) to the rate reconstruction.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::context::{FlowContext, MovingProfile};
use super::modulation::modulation_solve;
use super::state::{BootstrapFlags, Coordinate, ExitSet, FlowState};
use super::step::step;
use crate::error::{BlowupError, Result};
use crate::modulation_ode::{reconstruct_rate, Dynamics, Frame, RateReport, Trajectory};
use crate::radial_core::{ops, OuterBc};

/// One row of the run log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowRecord {
    pub s: f64,
    pub lambda: f64,
    pub t: f64,
    pub b: [f64; 2],
    pub b2_tilde: f64,
    pub xi: [f64; 4],
    pub tau: f64,
    pub tau_tilde: f64,
    pub v: [f64; 2],
    pub v_tilde: [f64; 2],
    pub energy: f64,
    pub energy_excess: f64,
    /// Modulation residual D from the continuous pairing at this state.
    pub d: [f64; 3],
    pub modulation_condition: f64,
    pub defect_pre: f64,
    pub defect_post: f64,
    /// ∫|∂_y(v − Q)|², the energy-norm distance to the unmodulated bubble.
    pub distance_to_q: f64,
    pub flags: BootstrapFlags,
}

impl FlowRecord {
    pub fn from_state(ctx: &FlowContext, st: &FlowState, profile: &MovingProfile, defects: (f64, f64)) -> Result<Self> {
        let m = modulation_solve(ctx, profile, &st.epsilon, ctx.cfg.forcing)?;
        let w: Vec<f64> = (0..st.epsilon.len()).map(|i| profile.q_tilde[i] - ctx.kernels.q[i] + st.epsilon[i]).collect();
        Ok(Self {
            s: st.s,
            lambda: st.lambda,
            t: st.t,
            b: st.b,
            b2_tilde: st.b2_tilde,
            xi: [st.xi.xi1, st.xi.xi2, st.xi.xi4, st.xi.xi6],
            tau: st.tau,
            tau_tilde: st.tau_tilde,
            v: st.v,
            v_tilde: st.v_tilde,
            energy: st.energy,
            energy_excess: st.energy_excess,
            d: m.d,
            modulation_condition: m.condition,
            defect_pre: defects.0,
            defect_post: defects.1,
            distance_to_q: ops::dirichlet_form(&ctx.grid, &w, OuterBc::Dirichlet),
            flags: st.flags(ctx.cfg.k_const),
        })
    }

    /// Value of a monitored coordinate divided by its bound.
    pub fn ratio(&self, c: Coordinate) -> f64 {
        self.flags.ratio(c)
    }
}

pub const RUN_LOG_COLUMNS: [&str; 15] = [
    "s", "lambda", "b1", "b2", "b2_tilde", "Xi1", "Xi2", "Xi4", "Xi6", "tau", "tau_tilde", "V1_tilde", "V2_tilde", "E", "flags",
];

pub fn write_run_log(path: &Path, records: &[FlowRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RUN_LOG_COLUMNS)?;
    for r in records {
        let nums = [
            r.s, r.lambda, r.b[0], r.b[1], r.b2_tilde, r.xi[0], r.xi[1], r.xi[2], r.xi[3], r.tau, r.tau_tilde, r.v_tilde[0], r.v_tilde[1],
            r.energy,
        ];
        let mut row: Vec<String> = nums.iter().map(|x| format!("{x:e}")).collect();
        row.push(r.flags.label());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FlowExit {
    /// Crossing of the bound, linearly interpolated inside the exit step.
    pub s: f64,
    pub coordinate: Coordinate,
    /// The coordinate over its bound at the exit.
    pub ratio: f64,
    /// Sign of d/ds (ratio²) across the exit step.
    pub outgoing_sign: f64,
    /// d/ds Ṽ₂² and d/ds τ̃² across the exit step.
    pub dv2_sq: f64,
    pub dtau_sq: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RunOptions {
    pub s_end: f64,
    /// Stop at the first violated bound.
    pub stop_on_exit: bool,
    /// Bounds that count as an exit.
    pub exit_set: ExitSet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowRun {
    pub records: Vec<FlowRecord>,
    pub exit: Option<FlowExit>,
    pub steps: usize,
    pub halvings: usize,
    pub max_defect_pre: f64,
    pub max_defect_post: f64,
    /// Largest increase of E over one accepted step (0 if non-increasing).
    pub max_energy_increase: f64,
    /// b₁·s at every record.
    pub b1_s: Vec<f64>,
    pub rate: Option<RateReport>,
    /// Why the rate reconstruction was not run, if it was not.
    pub rate_note: Option<String>,
}

fn exit_of(prev: &FlowRecord, cur: &FlowRecord, set: ExitSet) -> Option<FlowExit> {
    let c = cur.flags.worst_in(set)?;
    let ds = cur.s - prev.s;
    let d_sq = |f: &dyn Fn(&FlowRecord) -> f64| (f(cur).powi(2) - f(prev).powi(2)) / ds;
    let (r0, r1) = (prev.ratio(c).abs(), cur.ratio(c).abs());
    let frac = if r1 > r0 { ((1.0 - r0) / (r1 - r0)).clamp(0.0, 1.0) } else { 1.0 };
    Some(FlowExit {
        s: prev.s + frac * ds,
        coordinate: c,
        ratio: cur.ratio(c),
        outgoing_sign: d_sq(&|r| r.ratio(c)).signum(),
        dv2_sq: d_sq(&|r| r.v_tilde[1]),
        dtau_sq: d_sq(&|r| r.tau_tilde),
    })
}

/// Evolves until a bootstrap bound fails (if `stop_on_exit`) or s reaches
/// `s_end`, then hands λ(s), b(s) to the rate reconstruction.
pub fn run_trap(ctx: &FlowContext, initial: FlowState, profile: MovingProfile, opts: RunOptions) -> Result<FlowRun> {
    if !(opts.s_end > initial.s) {
        return Err(BlowupError::InvalidArgument(format!("s_end = {} not after s = {}", opts.s_end, initial.s)));
    }
    let first = FlowRecord::from_state(ctx, &initial, &profile, (0.0, 0.0))?;
    if first.flags.worst_in(opts.exit_set).is_some() {
        return Err(BlowupError::Precondition(format!("initial data outside the bootstrap: {}", first.flags.label())));
    }
    let mut records = vec![first];
    let (mut st, mut pr) = (initial, profile);
    let mut exit = None;
    let (mut steps, mut halvings) = (0, 0);
    let (mut max_pre, mut max_post, mut max_rise) = (0.0f64, 0.0f64, 0.0f64);
    while st.s < opts.s_end * (1.0 - 1e-14) {
        let ds = ctx.cfg.ds.min(opts.s_end - st.s);
        let (next, pn, rep) = step(ctx, &st, &pr, ds)?;
        steps += 1;
        halvings = halvings.max(rep.halvings);
        max_pre = max_pre.max(rep.defect_pre);
        max_post = max_post.max(rep.defect_post);
        max_rise = max_rise.max(next.energy - st.energy);
        let rec = FlowRecord::from_state(ctx, &next, &pn, (rep.defect_pre, rep.defect_post))?;
        let ex = exit_of(records.last().expect("non-empty"), &rec, opts.exit_set);
        records.push(rec);
        st = next;
        pr = pn;
        if let Some(e) = ex {
            if exit.is_none() {
                exit = Some(e);
            }
            if opts.stop_on_exit {
                break;
            }
        }
    }
    let b1_s = records.iter().map(|r| r.b[0] * r.s).collect();
    let (rate, rate_note) = match rate_handoff(&records) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(FlowRun {
        records,
        exit,
        steps,
        halvings,
        max_defect_pre: max_pre,
        max_defect_post: max_post,
        max_energy_increase: max_rise,
        b1_s,
        rate,
        rate_note,
    })
}

/// λ(s), b(s) as a modulation trajectory, passed to the rate fit.
pub fn rate_handoff(records: &[FlowRecord]) -> Result<RateReport> {
    let frames = records.iter().map(|r| Frame::from_b(r.s, r.b, r.lambda, r.t)).collect::<Result<Vec<_>>>()?;
    let first = frames.first().ok_or_else(|| BlowupError::InvalidArgument("empty run".into()))?.s;
    let traj = Trajectory { dynamics: Dynamics::Full(Default::default()), frames, exit: None };
    reconstruct_rate(&traj, first)
}
