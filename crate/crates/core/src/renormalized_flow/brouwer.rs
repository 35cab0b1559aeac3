//! The exit map over initial data (Ṽ₂(0), τ̃(0)) ∈ [−1, 1]², with refinement
//! toward the cell that stays trapped longest.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::context::FlowContext;
use super::initial::build_initial_data;
use super::run::{run_trap, FlowRun, RunOptions};
use super::state::ExitSet;
use crate::error::{BlowupError, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrouwerConfig {
    /// Points per side (at least 3).
    pub n: usize,
    pub s_budget: f64,
    pub refine_depth: usize,
    #[serde(default)]
    pub exit_set: ExitSet,
}

impl Default for BrouwerConfig {
    fn default() -> Self {
        Self { n: 3, s_budget: 1.1e3, refine_depth: 0, exit_set: ExitSet::All }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExitCell {
    #[serde(rename = "V2_0")]
    pub v2_0: f64,
    pub tau_0: f64,
    /// Exit s, or the budget when the cell stayed trapped.
    pub s_exit: f64,
    /// Name of the exited coordinate, "none" when trapped.
    pub exit_coord: String,
    /// Sign of d/ds of the squared exit coordinate; 0 when trapped.
    pub outgoing_sign: f64,
    pub dv2_sq: f64,
    pub dtau_sq: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExitMap {
    pub cells: Vec<ExitCell>,
}

impl ExitMap {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// Index of the latest exit (first one on ties).
    pub fn best(&self) -> usize {
        let mut best = 0;
        for (i, c) in self.cells.iter().enumerate() {
            if c.s_exit > self.cells[best].s_exit {
                best = i;
            }
        }
        best
    }

    /// Points per side, when the cells form a square grid.
    pub fn side(&self) -> Option<usize> {
        let n = (self.cells.len() as f64).sqrt().round() as usize;
        (n * n == self.cells.len() && n > 0).then_some(n)
    }

    /// The centre cell (odd sides only) exits no earlier than any other;
    /// None when there is no centre.
    pub fn center_survives_longest(&self) -> Option<bool> {
        let n = self.side().filter(|n| n % 2 == 1)?;
        let c = &self.cells[(n / 2) * n + n / 2];
        Some(self.cells.iter().all(|x| x.s_exit <= c.s_exit))
    }

    /// Every cell on the edge of the square exits, and does so outward.
    pub fn boundary_outgoing(&self) -> bool {
        let Some(n) = self.side() else { return false };
        self.cells.iter().enumerate().all(|(k, c)| {
            let (i, j) = (k / n, k % n);
            let edge = i == 0 || j == 0 || i == n - 1 || j == n - 1;
            !edge || (c.exit_coord != "none" && c.outgoing_sign > 0.0)
        })
    }

    /// Every cell leaves through the same coordinate on the same side.
    pub fn degenerate(&self) -> bool {
        let key = |c: &ExitCell| (c.exit_coord.clone(), c.outgoing_sign);
        match self.cells.first() {
            Some(f) => self.cells.iter().all(|c| key(c) == key(f) && c.exit_coord != "none"),
            None => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BrouwerLevel {
    pub center: [f64; 2],
    pub half_width: f64,
    pub map: ExitMap,
    pub runs: Vec<FlowRun>,
}

#[derive(Debug, Clone)]
pub struct BrouwerResult {
    pub levels: Vec<BrouwerLevel>,
    pub best: ExitCell,
    pub degenerate: bool,
}

fn axis(center: f64, half: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (center + half * (-1.0 + 2.0 * i as f64 / (n - 1) as f64)).clamp(-1.0, 1.0)).collect()
}

fn run_level(ctx: &FlowContext, cfg: &BrouwerConfig, center: [f64; 2], half: f64) -> Result<BrouwerLevel> {
    let v2s = axis(center[0], half, cfg.n);
    let taus = axis(center[1], half, cfg.n);
    let points: Vec<(f64, f64)> = taus.iter().flat_map(|&t| v2s.iter().map(move |&v| (v, t))).collect();
    let out: Vec<(ExitCell, FlowRun)> = points
        .par_iter()
        .map(|&(v2, tau)| {
            let (st, pr) = build_initial_data(ctx, v2, tau)?;
            let run = run_trap(ctx, st, pr, RunOptions { s_end: cfg.s_budget, stop_on_exit: true, exit_set: cfg.exit_set })?;
            let cell = match run.exit {
                Some(e) => ExitCell {
                    v2_0: v2,
                    tau_0: tau,
                    s_exit: e.s,
                    exit_coord: e.coordinate.name().into(),
                    outgoing_sign: e.outgoing_sign,
                    dv2_sq: e.dv2_sq,
                    dtau_sq: e.dtau_sq,
                },
                None => ExitCell {
                    v2_0: v2,
                    tau_0: tau,
                    s_exit: run.records.last().map_or(cfg.s_budget, |r| r.s),
                    exit_coord: "none".into(),
                    outgoing_sign: 0.0,
                    dv2_sq: 0.0,
                    dtau_sq: 0.0,
                },
            };
            Ok((cell, run))
        })
        .collect::<Result<Vec<_>>>()?;
    let (cells, runs): (Vec<_>, Vec<_>) = out.into_iter().unzip();
    Ok(BrouwerLevel { center, half_width: half, map: ExitMap { cells }, runs })
}

/// Runs the n×n grid, then `refine_depth` finer grids centred on the
/// latest-exiting cell with half-width one grid spacing.
pub fn brouwer_shoot(ctx: &FlowContext, cfg: &BrouwerConfig) -> Result<BrouwerResult> {
    if cfg.n < 3 {
        return Err(BlowupError::InvalidArgument(format!("grid of {} points per side; need at least 3", cfg.n)));
    }
    if !(cfg.s_budget > ctx.cfg.s0) {
        return Err(BlowupError::InvalidArgument(format!("budget {} not after s0 = {}", cfg.s_budget, ctx.cfg.s0)));
    }
    let mut levels = Vec::new();
    let (mut center, mut half) = ([0.0, 0.0], 1.0);
    for _ in 0..=cfg.refine_depth {
        let level = run_level(ctx, cfg, center, half)?;
        let b = &level.map.cells[level.map.best()];
        center = [b.v2_0, b.tau_0];
        half *= 2.0 / (cfg.n - 1) as f64 / 2.0;
        levels.push(level);
    }
    let first = &levels[0].map;
    let degenerate = first.degenerate();
    let last = &levels.last().expect("at least one level").map;
    let best = last.cells[last.best()].clone();
    Ok(BrouwerResult { levels, best, degenerate })
}
