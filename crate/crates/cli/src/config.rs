//! The TOML run configuration. Every section is optional and falls back to
//! its defaults; unknown keys anywhere are rejected, and the whole file is
//! validated before any command starts computing.

use std::path::{Path, PathBuf};

use blowup_core::modulation_ode::{CMode, Dynamics, IntegrateOptions, ShootConfig, Trap};
use blowup_core::radial_core::GridSpec;
use blowup_core::renormalized_flow::{BrouwerConfig, ExitSet, FlowConfig, Forcing, TauControl};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Profiles,
    Spectrum,
    Ode,
    Shoot,
    Evolve,
    Brouwer,
    Report,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::Profiles => "profiles",
            Self::Spectrum => "spectrum",
            Self::Ode => "ode",
            Self::Shoot => "shoot",
            Self::Evolve => "evolve",
            Self::Brouwer => "brouwer",
            Self::Report => "report",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub y_min: f64,
    pub y_max: f64,
    #[serde(rename = "N")]
    pub n: usize,
    /// End of the uniform inner patch; 0 for a purely logarithmic grid.
    pub inner_patch: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { y_min: 0.02, y_max: 5000.0, n: 400, inner_patch: 2.0 }
    }
}

impl GridSection {
    pub fn spec(&self) -> GridSpec {
        GridSpec {
            y_min: self.y_min,
            y_max: self.y_max,
            n: self.n,
            inner_patch: (self.inner_patch > 0.0).then_some(self.inner_patch),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfilesSection {
    pub b1_ladder: Vec<f64>,
    pub y_min: f64,
    pub per_decade: usize,
    /// Scale of the y ≤ 2M error norms.
    #[serde(rename = "M")]
    pub m: f64,
    /// Write the per-b₁ profile fixtures next to the scaling report.
    pub fixtures: bool,
}

impl Default for ProfilesSection {
    fn default() -> Self {
        Self { b1_ladder: vec![1e-3, 1e-4, 1e-5], y_min: 1e-3, per_decade: 240, m: 3.9, fixtures: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    #[serde(rename = "M")]
    pub m: f64,
    /// Grids in the ς refinement table (each halves the spacing).
    pub levels: usize,
    /// Accepted relative shift of ς between the last two grids.
    pub sigma_tol: f64,
    pub coercivity_samples: usize,
    pub seed: u64,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { m: 10.0, levels: 2, sigma_tol: 1e-3, coercivity_samples: 100, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DynamicsKind {
    Full,
    Linearized,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OdeSection {
    pub s0: f64,
    pub s_end: f64,
    /// V(s₀) for the `ode` command.
    pub v0: [f64; 2],
    pub c_mode: CMode,
    pub dynamics: DynamicsKind,
    pub v_bound: f64,
    pub rtol: f64,
    pub samples_per_decade: usize,
    pub max_steps: usize,
    /// Start of the rate fit; values below s₀ mean s₀.
    pub fit_from: f64,
}

impl Default for OdeSection {
    fn default() -> Self {
        let o = IntegrateOptions::default();
        Self {
            s0: 1e3,
            s_end: 1e9,
            v0: [0.0, 0.5],
            c_mode: CMode::Asymptotic,
            dynamics: DynamicsKind::Full,
            v_bound: Trap::default().v_bound,
            rtol: o.rtol,
            samples_per_decade: o.samples_per_decade,
            max_steps: o.max_steps,
            fit_from: 0.0,
        }
    }
}

impl OdeSection {
    pub fn dynamics(&self) -> Dynamics {
        match self.dynamics {
            DynamicsKind::Full => Dynamics::Full(self.c_mode),
            DynamicsKind::Linearized => Dynamics::Linearized,
        }
    }

    pub fn options(&self) -> IntegrateOptions {
        IntegrateOptions { rtol: self.rtol, samples_per_decade: self.samples_per_decade, max_steps: self.max_steps }
    }

    pub fn trap(&self) -> Trap {
        Trap { v_bound: self.v_bound }
    }

    pub fn fit_from(&self) -> f64 {
        self.fit_from.max(self.s0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShootSection {
    pub bracket: [f64; 2],
    pub s_budget: f64,
    pub width_tol: f64,
    pub max_iter: usize,
}

impl Default for ShootSection {
    fn default() -> Self {
        Self { bracket: [-1.5, 1.5], s_budget: 1e9, width_tol: 1e-13, max_iter: 80 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSection {
    pub s0: f64,
    pub s_end: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub delta: f64,
    pub ds: f64,
    pub defect_tol: f64,
    pub max_halvings: usize,
    pub forcing: Forcing,
    pub tau_control: TauControl,
    /// Initial data of the `evolve` run.
    pub v2_tilde0: f64,
    pub tau_tilde0: f64,
    pub exit_set: ExitSet,
    pub stop_on_exit: bool,
}

impl Default for FlowSection {
    fn default() -> Self {
        let f = FlowConfig::default();
        Self {
            s0: 1e4,
            s_end: 1.1e4,
            m: f.m,
            k: f.k_const,
            delta: f.delta,
            ds: f.ds,
            defect_tol: f.defect_tol,
            max_halvings: f.max_halvings,
            forcing: f.forcing,
            tau_control: TauControl::Pinned,
            v2_tilde0: 0.0,
            tau_tilde0: 0.0,
            exit_set: ExitSet::All,
            stop_on_exit: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BrouwerSection {
    pub n: usize,
    pub s_budget: f64,
    pub refine_depth: usize,
    pub exit_set: ExitSet,
}

impl Default for BrouwerSection {
    fn default() -> Self {
        Self { n: 3, s_budget: 1.005e4, refine_depth: 0, exit_set: ExitSet::Modulation }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// When set, must name the subcommand being run.
    pub experiment: Option<Experiment>,
    /// Output root; `--out` takes precedence.
    pub output_dir: Option<PathBuf>,
    pub grid: GridSection,
    pub profiles: ProfilesSection,
    pub spectrum: SpectrumSection,
    pub ode: OdeSection,
    pub shoot: ShootSection,
    pub flow: FlowSection,
    pub brouwer: BrouwerSection,
}

/// The parsed configuration and the text it came from, echoed into every
/// output directory.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub text: String,
}

fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(usage(msg()))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<LoadedConfig> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Io { path: p.to_path_buf(), source: e })?;
                Ok(LoadedConfig { config: Self::parse(&text)?, text })
            }
            None => {
                let config = RunConfig::default();
                let text = format!("# no --config given; built-in defaults\n{}", toml::to_string(&config)?);
                Ok(LoadedConfig { config, text })
            }
        }
    }

    pub fn flow_config(&self) -> FlowConfig {
        let f = &self.flow;
        FlowConfig {
            grid: self.grid.spec(),
            s0: f.s0,
            m: f.m,
            k_const: f.k,
            delta: f.delta,
            ds: f.ds,
            defect_tol: f.defect_tol,
            max_halvings: f.max_halvings,
            forcing: f.forcing,
            tau_control: f.tau_control,
        }
    }

    pub fn shoot_config(&self) -> ShootConfig {
        let s = &self.shoot;
        ShootConfig {
            s0: self.ode.s0,
            bracket: s.bracket,
            s_budget: s.s_budget,
            width_tol: s.width_tol,
            max_iter: s.max_iter,
            trap: self.ode.trap(),
            dynamics: self.ode.dynamics(),
            options: self.ode.options(),
        }
    }

    pub fn brouwer_config(&self) -> BrouwerConfig {
        let b = &self.brouwer;
        BrouwerConfig { n: b.n, s_budget: b.s_budget, refine_depth: b.refine_depth, exit_set: b.exit_set }
    }

    /// Range and consistency checks on every section.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        check(g.y_min > 0.0 && g.y_max > g.y_min && g.y_max.is_finite(), || {
            format!("grid: need 0 < y_min < y_max, got [{}, {}]", g.y_min, g.y_max)
        })?;
        check(g.n >= 16, || format!("grid: N = {} below 16", g.n))?;
        check(g.inner_patch == 0.0 || (g.inner_patch > g.y_min && g.inner_patch < g.y_max), || {
            format!("grid: inner_patch = {} outside (y_min, y_max)", g.inner_patch)
        })?;

        let p = &self.profiles;
        check(!p.b1_ladder.is_empty(), || "profiles: b1_ladder is empty".into())?;
        for &b in &p.b1_ladder {
            check(b > 0.0 && b < 0.1, || format!("profiles: b1 = {b} outside (0, 0.1)"))?;
        }
        check(p.y_min > 0.0 && p.per_decade >= 10 && p.m > 0.0, || {
            format!("profiles: need y_min > 0, per_decade >= 10, M > 0 (got {}, {}, {})", p.y_min, p.per_decade, p.m)
        })?;

        let sp = &self.spectrum;
        check(sp.m >= 10.0, || format!("spectrum: M = {} below 10", sp.m))?;
        check(sp.levels >= 2, || format!("spectrum: levels = {} below 2", sp.levels))?;
        check(sp.sigma_tol > 0.0 && sp.coercivity_samples > 0, || {
            "spectrum: sigma_tol and coercivity_samples must be positive".into()
        })?;

        let o = &self.ode;
        check(o.s0 > 1.0 && o.s_end > o.s0 && o.s_end.is_finite(), || {
            format!("ode: need 1 < s0 < s_end, got s0 = {}, s_end = {}", o.s0, o.s_end)
        })?;
        check(o.v_bound > 0.0 && o.v0.iter().all(|v| v.abs() <= o.v_bound), || {
            format!("ode: v0 = {:?} outside the trap |V| <= {}", o.v0, o.v_bound)
        })?;
        check(o.rtol > 0.0 && o.rtol < 1.0 && o.samples_per_decade > 0 && o.max_steps > 0, || {
            "ode: need 0 < rtol < 1 and positive samples_per_decade, max_steps".into()
        })?;

        let s = &self.shoot;
        check(s.bracket[0] < s.bracket[1], || format!("shoot: bracket {:?} is empty", s.bracket))?;
        check(s.s_budget > o.s0 && s.width_tol > 0.0, || {
            format!("shoot: need s_budget > ode.s0 = {} and width_tol > 0", o.s0)
        })?;

        let f = &self.flow;
        self.flow_config().validate().map_err(|e| usage(format!("flow: {e}")))?;
        check(f.s_end > f.s0, || format!("flow: s_end = {} not after s0 = {}", f.s_end, f.s0))?;
        check(f.v2_tilde0.abs() <= 1.0 && f.tau_tilde0.abs() <= 1.0, || {
            format!("flow: initial (V2, tau) = ({}, {}) outside [-1, 1]^2", f.v2_tilde0, f.tau_tilde0)
        })?;

        let b = &self.brouwer;
        check(b.n >= 3, || format!("brouwer: n = {} below 3", b.n))?;
        check(b.s_budget > f.s0, || format!("brouwer: s_budget = {} not after flow.s0 = {}", b.s_budget, f.s0))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let text = toml::to_string(&cfg).unwrap();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(toml::to_string(&back).unwrap(), text);
    }

    #[test]
    fn unknown_keys_are_rejected_in_every_section() {
        for text in ["bogus = 1", "[grid]\nNN = 3", "[flow]\nk = 3.0", "[brouwer]\nsize = 3", "[nosuch]\nx = 1"] {
            assert!(matches!(RunConfig::parse(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn partial_sections_keep_the_other_defaults() {
        let cfg = RunConfig::parse("[grid]\nN = 200\n[flow]\nK = 20.0").unwrap();
        assert_eq!(cfg.grid.n, 200);
        assert_eq!(cfg.grid.y_max, GridSection::default().y_max);
        assert_eq!(cfg.flow.k, 20.0);
        assert_eq!(cfg.flow_config().k_const, 20.0);
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        for text in [
            "[profiles]\nb1_ladder = []",
            "[grid]\ny_min = 2.0\ny_max = 1.0",
            "[ode]\nv0 = [0.0, 3.0]",
            "[shoot]\nbracket = [1.0, -1.0]",
            "[flow]\ntau_tilde0 = 1.5",
            "[brouwer]\nn = 2",
            "[spectrum]\nM = 5.0",
        ] {
            assert!(matches!(RunConfig::parse(text), Err(CliError::Usage(_))), "{text}");
        }
    }

    #[test]
    fn zero_inner_patch_means_a_log_grid() {
        let cfg = RunConfig::parse("[grid]\ninner_patch = 0.0").unwrap();
        assert_eq!(cfg.grid.spec().inner_patch, None);
    }
}
