//! `profiles`: the correction ladder at each b₁, one fixture directory per
//! ladder point, and the error-scaling slopes.

use std::sync::Arc;

use blowup_core::profile_builder::error_profile::outer_radius;
use blowup_core::profile_builder::fixtures::write_ladder_fixture;
use blowup_core::profile_builder::scaling::{verify_error_scaling, ScalingConfig, ScalingReport};
use blowup_core::profile_builder::{build_ladder, Kernels, TProfiles};
use blowup_core::radial_core::RadialGrid;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{num, OutputDir};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointEntry {
    pub b1: f64,
    pub b2: f64,
    pub s: f64,
    pub c_b: f64,
    pub radius: f64,
    /// Fixture directory relative to the command output, if written.
    pub fixture: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfilesManifest {
    pub b1_ladder: Vec<f64>,
    pub points: Vec<PointEntry>,
    pub scaling_report: String,
    pub slopes: String,
}

pub const SLOPE_COLUMNS: [&str; 7] = ["key", "expected", "tol", "slope", "intercept", "slope_ok", "constants_stable"];

pub fn slope_rows(report: &ScalingReport) -> Vec<Vec<String>> {
    report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.key.clone(),
                num(r.expected),
                num(r.tol),
                num(r.slope),
                num(r.intercept),
                r.slope_ok.to_string(),
                r.constants_stable.to_string(),
            ]
        })
        .collect()
}

pub fn run(cfg: &RunConfig, out: &OutputDir) -> Result<Vec<String>> {
    let p = &cfg.profiles;
    let sc = ScalingConfig { y_min: p.y_min, per_decade: p.per_decade, m: p.m };
    let report = verify_error_scaling(&p.b1_ladder, &sc, None)?;
    out.write_json("scaling.json", &report)?;
    out.write_csv("slopes.csv", &SLOPE_COLUMNS, &slope_rows(&report))?;

    let fixtures: Vec<Option<String>> = if p.fixtures {
        let dirs: Vec<String> = (0..report.points.len()).map(|i| format!("b1_{i}")).collect();
        for d in &dirs {
            out.subdir(d)?;
        }
        report
            .points
            .par_iter()
            .zip(&dirs)
            .map(|(pt, d)| {
                let y_max = (4.0 * outer_radius(pt.b1)).max(8.0 / pt.b1.sqrt());
                let grid = Arc::new(RadialGrid::per_decade(p.y_min, y_max, p.per_decade)?);
                let k = Kernels::new(grid);
                let t = TProfiles::build(&k);
                let l = build_ladder(&k, &t, pt.b1)?;
                write_ladder_fixture(&out.file(d), &k, &t, &l, pt.norms.clone())?;
                Ok(Some(d.clone()))
            })
            .collect::<Result<_>>()?
    } else {
        vec![None; report.points.len()]
    };

    let points = report
        .points
        .iter()
        .zip(fixtures)
        .map(|(pt, fixture)| PointEntry { b1: pt.b1, b2: pt.b2, s: pt.s, c_b: pt.c_b, radius: pt.radius, fixture })
        .collect();
    let manifest = ProfilesManifest {
        b1_ladder: p.b1_ladder.clone(),
        points,
        scaling_report: "scaling.json".into(),
        slopes: "slopes.csv".into(),
    };
    out.write_json("manifest.json", &manifest)?;

    let mut lines = vec![format!("ladder {:?}", p.b1_ladder)];
    for key in ["psi2", "psi4_k3", "loc_psi2", "loc_psi4_k3"] {
        if let Some(r) = report.row(key) {
            lines.push(format!(
                "{key}: slope {:.3} (expected {} +- {}) {}",
                r.slope,
                r.expected,
                r.tol,
                if r.slope_ok { "ok" } else { "off" }
            ));
        }
    }
    Ok(lines)
}
