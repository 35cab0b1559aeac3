//! `evolve` and `brouwer`: trajectories of the decomposed flow, their run
//! logs and diagnostics, and the exit map over (Ṽ₂(0), τ̃(0)).

use blowup_core::renormalized_flow::{
    brouwer_shoot, build_initial_data, lyapunov_monitor, residual_constant, run_trap, write_run_log, ExitCell, ExitMap,
    ExitSet, FlowConfig, FlowContext, FlowExit, RunOptions, TauControl,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{num, OutputDir};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolveSummary {
    pub flow: FlowConfig,
    pub v2_tilde0: f64,
    pub tau_tilde0: f64,
    pub exit_set: ExitSet,
    pub s_last: f64,
    pub steps: usize,
    pub halvings: usize,
    pub exit: Option<FlowExit>,
    pub max_defect_pre: f64,
    pub max_defect_post: f64,
    pub max_energy_increase: f64,
    pub energy_first: f64,
    pub energy_last: f64,
    /// Smallest C with |D| ≤ C(√Ξ₆/√log M + b₁³/|log b₁| + b₁^{7/2}) along the run.
    pub residual_constant: f64,
    pub lyapunov_c: Option<[f64; 3]>,
    pub xi6_growth_rate: Option<f64>,
    pub lyapunov_note: Option<String>,
    pub rate_note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelEntry {
    pub center: [f64; 2],
    pub half_width: f64,
    pub exit_map: String,
    pub run_logs: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BrouwerSummary {
    pub flow: FlowConfig,
    pub n: usize,
    pub s_budget: f64,
    pub exit_set: ExitSet,
    pub degenerate: bool,
    pub center_survives_longest: Option<bool>,
    pub boundary_outgoing: bool,
    pub best: ExitCell,
    pub levels: Vec<LevelEntry>,
}

pub const MODULATION_COLUMNS: [&str; 9] =
    ["s", "D0", "D1", "D2", "modulation_condition", "defect_pre", "defect_post", "energy_excess", "distance_to_Q"];

pub fn run_evolve(cfg: &RunConfig, out: &OutputDir) -> Result<Vec<String>> {
    let f = &cfg.flow;
    let ctx = FlowContext::new(cfg.flow_config())?;
    let (st, pr) = build_initial_data(&ctx, f.v2_tilde0, f.tau_tilde0)?;
    let run = run_trap(&ctx, st, pr, RunOptions { s_end: f.s_end, stop_on_exit: f.stop_on_exit, exit_set: f.exit_set })?;
    write_run_log(&out.file("run_log.csv"), &run.records)?;
    let rows: Vec<Vec<String>> = run
        .records
        .iter()
        .map(|r| {
            [r.s, r.d[0], r.d[1], r.d[2], r.modulation_condition, r.defect_pre, r.defect_post, r.energy_excess, r.distance_to_q]
                .iter()
                .map(|x| num(*x))
                .collect()
        })
        .collect();
    out.write_csv("modulation.csv", &MODULATION_COLUMNS, &rows)?;
    let (lyapunov_c, xi6_growth_rate, lyapunov_note) = match lyapunov_monitor(&run.records, f.m) {
        Ok(rep) => {
            out.write_json("lyapunov.json", &rep)?;
            (Some(rep.c_fit), Some(rep.xi6_growth_rate), None)
        }
        Err(e) => (None, None, Some(e.to_string())),
    };
    let first = run.records.first().expect("a run has its initial record");
    let last = run.records.last().expect("a run has its initial record");
    let summary = EvolveSummary {
        flow: ctx.cfg,
        v2_tilde0: f.v2_tilde0,
        tau_tilde0: f.tau_tilde0,
        exit_set: f.exit_set,
        s_last: last.s,
        steps: run.steps,
        halvings: run.halvings,
        exit: run.exit,
        max_defect_pre: run.max_defect_pre,
        max_defect_post: run.max_defect_post,
        max_energy_increase: run.max_energy_increase,
        energy_first: first.energy,
        energy_last: last.energy,
        residual_constant: residual_constant(&run.records, f.m)?,
        lyapunov_c,
        xi6_growth_rate,
        lyapunov_note,
        rate_note: run.rate_note.clone(),
    };
    out.write_json("run.json", &summary)?;
    let exit = match &summary.exit {
        Some(e) => format!("exit through {} at s = {:.6}", e.coordinate.name(), e.s),
        None => format!("no exit up to s = {:.6}", summary.s_last),
    };
    Ok(vec![
        format!("{} steps, {} halvings; {exit}", summary.steps, summary.halvings),
        format!("max orthogonality defect {:.2e}, max energy increase {:.2e}", summary.max_defect_pre, summary.max_energy_increase),
        format!("residual constant C = {:.4e}", summary.residual_constant),
    ])
}

fn exit_map_rows(map: &ExitMap) -> Vec<Vec<String>> {
    map.cells
        .iter()
        .map(|c| {
            vec![
                num(c.v2_0),
                num(c.tau_0),
                num(c.s_exit),
                c.exit_coord.clone(),
                num(c.outgoing_sign),
                num(c.dv2_sq),
                num(c.dtau_sq),
            ]
        })
        .collect()
}

pub const EXIT_MAP_COLUMNS: [&str; 7] = ["V2_0", "tau_0", "s_exit", "exit_coord", "outgoing_sign", "dV2_sq", "dtau_sq"];

/// The exit map needs τ free: pinning it removes the coordinate being shot.
pub fn run_brouwer(cfg: &RunConfig, out: &OutputDir) -> Result<Vec<String>> {
    let flow = FlowConfig { tau_control: TauControl::Free, ..cfg.flow_config() };
    let ctx = FlowContext::new(flow)?;
    let bcfg = cfg.brouwer_config();
    let res = brouwer_shoot(&ctx, &bcfg)?;
    let logs = out.subdir("runs")?;
    let mut levels = Vec::new();
    for (l, level) in res.levels.iter().enumerate() {
        let mut run_logs = Vec::new();
        for (i, run) in level.runs.iter().enumerate() {
            let name = format!("level{l}_cell{i}.csv");
            write_run_log(&logs.join(&name), &run.records)?;
            run_logs.push(format!("runs/{name}"));
        }
        let exit_map = if l == 0 { "exit_map.json".to_string() } else { format!("exit_map_level{l}.json") };
        out.write_json(&exit_map, &level.map)?;
        out.write_csv(&exit_map.replace(".json", ".csv"), &EXIT_MAP_COLUMNS, &exit_map_rows(&level.map))?;
        levels.push(LevelEntry { center: level.center, half_width: level.half_width, exit_map, run_logs });
    }
    let first = &res.levels[0].map;
    let summary = BrouwerSummary {
        flow,
        n: bcfg.n,
        s_budget: bcfg.s_budget,
        exit_set: bcfg.exit_set,
        degenerate: res.degenerate,
        center_survives_longest: first.center_survives_longest(),
        boundary_outgoing: first.boundary_outgoing(),
        best: res.best.clone(),
        levels,
    };
    out.write_json("brouwer.json", &summary)?;
    Ok(vec![
        format!("{} cells per level, {} level(s)", bcfg.n * bcfg.n, summary.levels.len()),
        format!(
            "best cell (V2, tau) = ({}, {}) exits at s = {:.6} through {}",
            summary.best.v2_0, summary.best.tau_0, summary.best.s_exit, summary.best.exit_coord
        ),
        format!(
            "boundary cells outgoing: {}; centre longest: {}; degenerate: {}",
            summary.boundary_outgoing,
            summary.center_survives_longest.map_or("n/a".into(), |b| b.to_string()),
            summary.degenerate
        ),
    ])
}
