//! Weighted error norms of Ψ_b and Ψ̃_b along a b₁ ladder, with log-log slope
//! fits against the expected powers of b₁.
//!
//! Each ladder point uses b₂ = b₂ᵉ(s) at the s where b₁ᵉ(s) = b₁. Constants in
//! the bounds are fitted at the first ladder point and then required to stay
//! within a factor band across the ladder.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::error_profile::{approximate_profile, error_profile, localize, outer_radius};
use super::inverse::{Kernels, TProfiles};
use super::ladder::build_ladder;
use crate::error::{BlowupError, Result};
use crate::linalg::fit_line;
use crate::modulation_ode::equilibrium::{b_e, s_for_b1};
use crate::radial_core::{ops, OuterBc, RadialGrid};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub y_min: f64,
    pub per_decade: usize,
    /// Scale for the (Psi4) window y ≤ 2M.
    pub m: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self { y_min: 1e-3, per_decade: 240, m: 3.9 }
    }
}

/// Norm key, expected b₁ exponent, slope tolerance, log power removed before
/// fitting the constant.
#[derive(Debug, Clone, Copy)]
pub struct Target {
    pub key: &'static str,
    pub slope: f64,
    pub tol: f64,
    pub log_power: f64,
}

pub const TARGETS: [Target; 24] = [
    Target { key: "psi1_k1", slope: 4.0, tol: 0.5, log_power: 0.0 },
    Target { key: "psi1_k2", slope: 6.0, tol: 0.5, log_power: 0.0 },
    Target { key: "psi2", slope: 8.0, tol: 0.5, log_power: -2.0 },
    Target { key: "psi3_i0", slope: 8.0, tol: 0.5, log_power: 0.0 },
    Target { key: "psi3_i1", slope: 8.0, tol: 0.5, log_power: 0.0 },
    Target { key: "psi3_i2", slope: 8.0, tol: 0.5, log_power: 0.0 },
    Target { key: "psi3_i3", slope: 8.0, tol: 0.5, log_power: 0.0 },
    Target { key: "psi3_i4", slope: 8.0, tol: 0.5, log_power: 0.0 },
    Target { key: "psi4_k0", slope: 10.0, tol: 0.7, log_power: 0.0 },
    Target { key: "psi4_k1", slope: 10.0, tol: 0.7, log_power: 0.0 },
    Target { key: "psi4_k2", slope: 10.0, tol: 0.7, log_power: 0.0 },
    Target { key: "psi4_k3", slope: 10.0, tol: 0.7, log_power: 0.0 },
    Target { key: "loc_psi1_k1", slope: 4.0, tol: 0.5, log_power: 0.0 },
    Target { key: "loc_psi1_k2", slope: 6.0, tol: 0.5, log_power: 0.0 },
    Target { key: "loc_psi2", slope: 8.0, tol: 0.5, log_power: -2.0 },
    Target { key: "loc_psi3_i0", slope: 8.0, tol: 0.5, log_power: 0.0 },
    Target { key: "loc_psi3_i1", slope: 8.0, tol: 0.5, log_power: 0.0 },
    Target { key: "loc_psi3_i2", slope: 8.0, tol: 0.5, log_power: 0.0 },
    Target { key: "loc_psi3_i3", slope: 8.0, tol: 0.5, log_power: 0.0 },
    Target { key: "loc_psi3_i4", slope: 8.0, tol: 0.5, log_power: 0.0 },
    Target { key: "loc_psi4_k0", slope: 10.0, tol: 0.7, log_power: 0.0 },
    Target { key: "loc_psi4_k1", slope: 10.0, tol: 0.7, log_power: 0.0 },
    Target { key: "loc_psi4_k2", slope: 10.0, tol: 0.7, log_power: 0.0 },
    Target { key: "loc_psi4_k3", slope: 10.0, tol: 0.7, log_power: 0.0 },
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderPoint {
    pub b1: f64,
    pub b2: f64,
    pub s: f64,
    pub c_b: f64,
    pub radius: f64,
    pub norms: BTreeMap<String, f64>,
}

fn norm_family(g: &RadialGrid, psi: &[f64], cap: f64, m: f64, prefix: &str, out: &mut BTreeMap<String, f64>) {
    let bc = OuterBc::Extrapolate;
    let mut hk = psi.to_vec();
    let mut pows = vec![psi.to_vec()];
    for _ in 0..3 {
        hk = ops::apply_h(g, &hk, bc);
        pows.push(hk.clone());
    }
    out.insert(format!("{prefix}psi1_k1"), g.norm_sq_below(&pows[1], cap));
    out.insert(format!("{prefix}psi1_k2"), g.norm_sq_below(&pows[2], cap));
    out.insert(format!("{prefix}psi2"), g.norm_sq_below(&pows[3], cap));
    for (k, p) in pows.iter().enumerate() {
        out.insert(format!("{prefix}psi4_k{k}"), g.norm_sq_below(p, 2.0 * m));
    }
    let mut d = psi.to_vec();
    for i in 0..=4 {
        if i > 0 {
            d = ops::derivative(g, &d, bc);
        }
        let masked: Vec<f64> = g.nodes().iter().zip(&d).map(|(y, v)| if *y <= cap { *v } else { 0.0 }).collect();
        let w = 12.0 - 2.0 * i as f64;
        let val = g.weighted_norm_sq(&masked, |y| (1.0 + y.ln().powi(2)) / (1.0 + y.powf(w)));
        out.insert(format!("{prefix}psi3_i{i}"), val);
    }
}

/// Norms of Ψ_b on y ≤ 2B₁ and of Ψ̃_b on y ≤ 3B₁ (its support up to the
/// b₁ΛQ tail, which H annihilates).
pub fn ladder_point(b1: f64, cfg: &ScalingConfig) -> Result<LadderPoint> {
    let s = s_for_b1(b1)?;
    let (_, b2) = b_e(s)?;
    let radius = outer_radius(b1);
    let y_max = (4.0 * radius).max(8.0 / b1.sqrt());
    if 2.0 * cfg.m > y_max {
        return Err(BlowupError::Precondition(format!("2M = {} beyond grid end {y_max}", 2.0 * cfg.m)));
    }
    let grid = Arc::new(RadialGrid::per_decade(cfg.y_min, y_max, cfg.per_decade)?);
    let k = Kernels::new(grid.clone());
    let t = TProfiles::build(&k);
    let l = build_ladder(&k, &t, b1)?;
    let ap = approximate_profile(&k, &t, &l, b2);
    let e = error_profile(&k, &l, &ap, true);
    let loc = localize(&k, &ap, &e);
    let mut norms = BTreeMap::new();
    norm_family(&grid, &e.psi, 2.0 * radius, cfg.m, "", &mut norms);
    norm_family(&grid, &loc.psi_tilde, 3.0 * radius, cfg.m, "loc_", &mut norms);
    for v in norms.values() {
        if !(v.is_finite() && *v >= 0.0) {
            return Err(BlowupError::Numerical(format!("non-finite error norm at b1 = {b1}")));
        }
    }
    Ok(LadderPoint { b1, b2, s, c_b: l.c_b(), radius, norms })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlopeRow {
    pub key: String,
    pub expected: f64,
    pub tol: f64,
    pub slope: f64,
    pub intercept: f64,
    /// norm / (b₁^expected |log b₁|^log_power) per ladder point.
    pub constants: Vec<f64>,
    pub slope_ok: bool,
    /// All constants within [0.5, 1.5] × the first one.
    pub constants_stable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingReport {
    pub config: ScalingConfig,
    pub points: Vec<LadderPoint>,
    pub rows: Vec<SlopeRow>,
}

impl ScalingReport {
    pub fn row(&self, key: &str) -> Option<&SlopeRow> {
        self.rows.iter().find(|r| r.key == key)
    }
}

pub fn verify_error_scaling(ladder: &[f64], cfg: &ScalingConfig, report_path: Option<&Path>) -> Result<ScalingReport> {
    if ladder.len() < 3 {
        return Err(BlowupError::InvalidArgument(format!("need at least 3 ladder points, got {}", ladder.len())));
    }
    let (lo, hi) = ladder.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    if hi / lo < 99.9 {
        return Err(BlowupError::InvalidArgument("ladder must span at least two decades".into()));
    }
    let points: Vec<LadderPoint> = ladder.par_iter().map(|&b1| ladder_point(b1, cfg)).collect::<Result<_>>()?;
    let lx: Vec<f64> = points.iter().map(|p| p.b1.ln()).collect();
    let rows = TARGETS
        .iter()
        .map(|t| {
            let ly: Vec<f64> = points.iter().map(|p| p.norms[t.key].ln()).collect();
            let (slope, intercept) = fit_line(&lx, &ly)?;
            let constants: Vec<f64> = points
                .iter()
                .map(|p| p.norms[t.key] / (p.b1.powf(t.slope) * p.b1.ln().abs().powf(t.log_power)))
                .collect();
            let c0 = constants[0];
            Ok(SlopeRow {
                key: t.key.to_string(),
                expected: t.slope,
                tol: t.tol,
                slope,
                intercept,
                constants_stable: constants.iter().all(|c| (c / c0) >= 0.5 && (c / c0) <= 1.5),
                constants,
                slope_ok: (slope - t.slope).abs() <= t.tol,
            })
        })
        .collect::<Result<_>>()?;
    let report = ScalingReport { config: cfg.clone(), points, rows };
    if let Some(p) = report_path {
        std::fs::write(p, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(report)
}
