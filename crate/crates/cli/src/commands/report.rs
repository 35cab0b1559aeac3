//! `report`: reads whatever the other commands left under the output root
//! and writes one markdown report with a pass/fail table per command, plus
//! plot-ready CSVs. Absent inputs become explicit "missing" sections.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use blowup_core::profile_builder::scaling::ScalingReport;
use blowup_core::renormalized_flow::ExitMap;
use serde::{Deserialize, Serialize};

use super::flow::{BrouwerSummary, EvolveSummary, EXIT_MAP_COLUMNS};
use super::ode::{OdeSummary, RateSummary, ShootSummary};
use super::profiles::{slope_rows, SLOPE_COLUMNS};
use super::spectrum::SpectrumSummary;
use crate::error::Result;
use crate::output::{num, read_json, OutputDir, Provenance, CODE_HASH};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub section: String,
    pub quantity: String,
    pub measured: f64,
    pub bound: String,
    pub pass: bool,
    /// Distance to the bound, positive when inside.
    pub margin: f64,
}

struct Section {
    name: &'static str,
    checks: Vec<Check>,
    missing: Vec<String>,
    notes: Vec<String>,
    code_hash: Option<String>,
}

impl Section {
    fn new(name: &'static str) -> Self {
        Self { name, checks: Vec::new(), missing: Vec::new(), notes: Vec::new(), code_hash: None }
    }

    fn check(&mut self, quantity: impl Into<String>, measured: f64, bound: impl Into<String>, margin: f64) {
        self.checks.push(Check {
            section: self.name.into(),
            quantity: quantity.into(),
            measured,
            bound: bound.into(),
            pass: margin >= 0.0,
            margin,
        });
    }

    /// |measured − target| ≤ tol.
    fn within(&mut self, quantity: impl Into<String>, measured: f64, target: f64, tol: f64) {
        let margin = if measured.is_finite() { tol - (measured - target).abs() } else { f64::NEG_INFINITY };
        self.check(quantity, measured, format!("{target} +- {tol}"), margin);
    }

    fn at_most(&mut self, quantity: impl Into<String>, measured: f64, cap: f64) {
        let margin = if measured.is_finite() { cap - measured } else { f64::NEG_INFINITY };
        self.check(quantity, measured, format!("<= {cap:e}"), margin);
    }

    fn at_least(&mut self, quantity: impl Into<String>, measured: f64, floor: f64) {
        let margin = if measured.is_finite() { measured - floor } else { f64::NEG_INFINITY };
        self.check(quantity, measured, format!(">= {floor}"), margin);
    }

    fn flag(&mut self, quantity: impl Into<String>, ok: bool) {
        self.check(quantity, if ok { 1.0 } else { 0.0 }, "true", if ok { 0.0 } else { -1.0 });
    }

    /// Reads `<root>/<name>/<file>`, recording it as missing on failure.
    fn load<T: for<'de> Deserialize<'de>>(&mut self, root: &Path, file: &str) -> Option<T> {
        let path = root.join(self.name).join(file);
        if self.code_hash.is_none() {
            self.code_hash = read_json::<Provenance>(&root.join(self.name).join("provenance.json")).ok().map(|p| p.code_hash);
        }
        match read_json(&path) {
            Ok(v) => Some(v),
            Err(e) => {
                let rel = format!("{}/{file}", self.name);
                self.missing.push(if path.exists() { format!("{rel} (unreadable: {e})") } else { rel });
                None
            }
        }
    }
}

fn rate_checks(sec: &mut Section, rate: &Option<RateSummary>, note: &Option<String>) {
    match rate {
        Some(r) => {
            sec.within("rate exponent p", r.fit.p, 2.0, 0.1);
            sec.within("rate exponent q", r.fit.q, -4.0 / 3.0, 0.15);
            sec.at_most("lambda s^(2/3) (log s)^(-4/9) drift over the final decade", r.drift, 0.05);
        }
        None => sec.notes.push(format!("no rate fit: {}", note.as_deref().unwrap_or("not attempted"))),
    }
}

fn profiles(root: &Path, plots: &mut Vec<(String, Vec<&'static str>, Vec<Vec<String>>)>) -> Section {
    let mut sec = Section::new("profiles");
    if let Some(rep) = sec.load::<ScalingReport>(root, "scaling.json") {
        for r in &rep.rows {
            sec.within(format!("log-log slope of {}", r.key), r.slope, r.expected, r.tol);
        }
        plots.push(("scaling_slopes.csv".into(), SLOPE_COLUMNS.to_vec(), slope_rows(&rep)));
    }
    sec
}

fn spectrum(root: &Path) -> Section {
    let mut sec = Section::new("spectrum");
    if let Some(s) = sec.load::<SpectrumSummary>(root, "spectral.json") {
        sec.within("negative eigenvalues of H", s.negative_count as f64, 1.0, 0.0);
        sec.at_most("relative shift of sigma under refinement", s.relative_shift, s.sigma_tol);
        sec.at_most("(Phi_M, T1) relative", s.phi_ortho[0], 1e-8);
        sec.at_most("(Phi_M, T2) relative", s.phi_ortho[1], 1e-8);
        sec.within("(Phi_M, LambdaQ) / (64 log M)", s.pairing_ratio, 1.0, 0.2);
        sec.at_most("Hardy violations", s.coercivity.hardy_violations as f64, 0.0);
        sec.at_most("sub-coercivity violations", s.coercivity.subcoercivity_violations as f64, 0.0);
        sec.notes.push(format!("sigma = {} on N = {}, y_max = {}", s.sigma, s.n, s.y_max));
    }
    sec
}

fn ode(root: &Path, fits: &mut Vec<Vec<String>>) -> Section {
    let mut sec = Section::new("ode");
    if let Some(s) = sec.load::<OdeSummary>(root, "ode.json") {
        match &s.exit {
            Some(e) => sec.at_least(format!("outgoing sign at the V{} exit", e.coordinate), e.outgoing_sign, 1.0),
            None => sec.notes.push(format!("no exit up to s = {}", s.s_last)),
        }
        rate_checks(&mut sec, &s.rate, &s.rate_note);
        if let Some(r) = &s.rate {
            fits.push(fit_row("ode", r));
        }
    }
    sec
}

fn shoot(root: &Path, fits: &mut Vec<Vec<String>>) -> Section {
    let mut sec = Section::new("shoot");
    if let Some(s) = sec.load::<ShootSummary>(root, "shoot.json") {
        sec.at_least("trapped-time gain of the shot trajectory", s.trapped_gain, 10.0);
        rate_checks(&mut sec, &s.rate, &s.rate_note);
        if let Some(r) = &s.rate {
            fits.push(fit_row("shoot", r));
        }
        sec.notes.push(format!("V2* = {} after {} probes", s.v2_star, s.probes));
    }
    sec
}

fn evolve(root: &Path) -> Section {
    let mut sec = Section::new("evolve");
    if let Some(s) = sec.load::<EvolveSummary>(root, "run.json") {
        sec.at_most("orthogonality defect before projection", s.max_defect_pre, 1e-9);
        sec.at_most("largest energy increase over a step", s.max_energy_increase, 0.0);
        sec.at_most("residual constant C", s.residual_constant, f64::MAX);
        match &s.exit {
            Some(e) => sec.notes.push(format!("left the bootstrap through {} at s = {}", e.coordinate.name(), e.s)),
            None => sec.notes.push(format!("no exit in [{}, {}]", s.flow.s0, s.s_last)),
        }
        if let Some(c) = s.lyapunov_c {
            sec.notes.push(format!("monotonicity constants (Xi6, Xi4, Xi2): {:e}, {:e}, {:e}", c[0], c[1], c[2]));
        }
    }
    sec
}

fn brouwer(root: &Path, plots: &mut Vec<(String, Vec<&'static str>, Vec<Vec<String>>)>) -> Section {
    let mut sec = Section::new("brouwer");
    if let Some(s) = sec.load::<BrouwerSummary>(root, "brouwer.json") {
        sec.flag("boundary cells exit outward", s.boundary_outgoing);
        match s.center_survives_longest {
            Some(c) => sec.flag("centre cell survives longest", c),
            None => sec.notes.push("even grid: no centre cell".into()),
        }
        sec.flag("exit map not degenerate", !s.degenerate);
    }
    if let Some(m) = sec.load::<ExitMap>(root, "exit_map.json") {
        let rows = m
            .cells
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
            .collect();
        plots.push(("exit_map.csv".into(), EXIT_MAP_COLUMNS.to_vec(), rows));
    }
    sec
}

fn fit_row(source: &str, r: &RateSummary) -> Vec<String> {
    vec![
        source.into(),
        num(r.fit.p),
        num(r.fit.q),
        num(r.fit.c),
        num(r.fit.residual),
        num(r.fit.s_range[0]),
        num(r.fit.s_range[1]),
        num(r.drift),
        num(r.t_blowup),
    ]
}

const FIT_COLUMNS: [&str; 9] = ["source", "p", "q", "c", "residual", "s_from", "s_to", "drift", "T"];

/// Compact form for the markdown tables; the CSVs keep full precision.
fn short(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e6 {
        format!("{x}")
    } else {
        format!("{x:.6e}")
    }
}

fn render(root: &Path, sections: &[Section], fits: &[Vec<String>]) -> String {
    let mut md = String::new();
    let _ = writeln!(md, "# Blow-up harness report\n");
    let _ = writeln!(md, "Inputs read from `{}`. Report code hash `{CODE_HASH}`.\n", root.display());
    let total: usize = sections.iter().map(|s| s.checks.len()).sum();
    let passed: usize = sections.iter().flat_map(|s| &s.checks).filter(|c| c.pass).count();
    let missing: Vec<&String> = sections.iter().flat_map(|s| &s.missing).collect();
    let _ = writeln!(md, "{passed} of {total} checks pass; {} input(s) missing.\n", missing.len());
    if !missing.is_empty() {
        let _ = writeln!(md, "Missing inputs:\n");
        for m in &missing {
            let _ = writeln!(md, "- `{m}`");
        }
        let _ = writeln!(md);
    }
    let _ = writeln!(md, "## Rate fits\n");
    if fits.is_empty() {
        let _ = writeln!(md, "missing: no rate fit in `ode/ode.json` or `shoot/shoot.json`\n");
    } else {
        let _ = writeln!(md, "| source | p | q | c | residual | s range | drift |");
        let _ = writeln!(md, "|---|---|---|---|---|---|---|");
        for f in fits {
            let v: Vec<String> = f[1..8].iter().map(|x| x.parse::<f64>().map_or(x.clone(), short)).collect();
            let _ = writeln!(md, "| {} | {} | {} | {} | {} | [{}, {}] | {} |", f[0], v[0], v[1], v[2], v[3], v[4], v[5], v[6]);
        }
        let _ = writeln!(md);
    }
    for s in sections {
        let _ = writeln!(md, "## {}\n", s.name);
        if let Some(h) = &s.code_hash {
            if h != CODE_HASH {
                let _ = writeln!(md, "Produced by a different code version (`{h}`).\n");
            }
        }
        if !s.missing.is_empty() {
            for m in &s.missing {
                let _ = writeln!(md, "missing: `{m}`");
            }
            let _ = writeln!(md);
        }
        if !s.checks.is_empty() {
            let _ = writeln!(md, "| quantity | measured | bound | status | margin |");
            let _ = writeln!(md, "|---|---|---|---|---|");
            for c in &s.checks {
                let status = if c.pass { "pass" } else { "FAIL" };
                let _ = writeln!(md, "| {} | {} | {} | {status} | {:.3e} |", c.quantity, short(c.measured), c.bound, c.margin);
            }
            let _ = writeln!(md);
        }
        for n in &s.notes {
            let _ = writeln!(md, "- {n}");
        }
        if !s.notes.is_empty() {
            let _ = writeln!(md);
        }
    }
    md
}

pub fn run(root: &Path, out: &OutputDir) -> Result<Vec<String>> {
    let mut plots = Vec::new();
    let mut fits = Vec::new();
    let sections = vec![
        profiles(root, &mut plots),
        spectrum(root),
        ode(root, &mut fits),
        shoot(root, &mut fits),
        evolve(root),
        brouwer(root, &mut plots),
    ];
    out.write_text("report.md", &render(root, &sections, &fits))?;
    let checks: Vec<Vec<String>> = sections
        .iter()
        .flat_map(|s| &s.checks)
        .map(|c| vec![c.section.clone(), c.quantity.clone(), num(c.measured), c.bound.clone(), c.pass.to_string(), num(c.margin)])
        .collect();
    out.write_csv("checks.csv", &["section", "quantity", "measured", "bound", "pass", "margin"], &checks)?;
    out.write_csv("rate_fits.csv", &FIT_COLUMNS, &fits)?;
    for (name, header, rows) in &plots {
        out.write_csv(name, header, rows)?;
    }
    let total: usize = sections.iter().map(|s| s.checks.len()).sum();
    let passed = checks.iter().filter(|r| r[4] == "true").count();
    let missing: Vec<PathBuf> = sections.iter().flat_map(|s| s.missing.iter().map(PathBuf::from)).collect();
    let mut lines = vec![format!("{passed} of {total} checks pass")];
    for m in missing {
        lines.push(format!("missing: {}", m.display()));
    }
    Ok(lines)
}
