//! Ladder fixtures: one CSV per profile plus a JSON manifest.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::inverse::{Kernels, TProfiles};
use super::ladder::{CorrectionLadder, MONOMIALS};
use crate::error::Result;
use crate::radial_core::function::write_columns;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderManifest {
    pub b1: f64,
    pub c_b: f64,
    pub d_b: f64,
    pub grid_n: usize,
    pub y_min: f64,
    pub y_max: f64,
    /// Profile name ↦ monomial exponents (i, j) of b₁ⁱb₂ʲ.
    pub monomials: BTreeMap<String, (u32, u32)>,
    pub files: Vec<String>,
    pub norms: BTreeMap<String, f64>,
}

pub fn write_ladder_fixture(
    dir: &Path,
    k: &Kernels,
    t: &TProfiles,
    l: &CorrectionLadder,
    norms: BTreeMap<String, f64>,
) -> Result<LadderManifest> {
    std::fs::create_dir_all(dir)?;
    let y = k.grid.nodes();
    let mut files = Vec::new();
    let mut put = |name: &str, v: &[f64]| -> Result<()> {
        let file = format!("{name}.csv");
        write_columns(&dir.join(&file), &["y", "value"], &[y, v])?;
        files.push(file);
        Ok(())
    };
    put("t1", &t.t1.value)?;
    put("t2", &t.t2.value)?;
    put("sigma", &l.rad.sigma)?;
    put("sigma_tilde", &l.rad.sigma_tilde)?;
    put("theta2", &l.theta2)?;
    put("theta3", &l.theta3)?;
    let mut monomials = BTreeMap::new();
    for (name, ij) in MONOMIALS {
        if let Some((p, _)) = l.monomial(name) {
            put(name, &p.value)?;
            monomials.insert(name.to_string(), ij);
        }
    }
    let manifest = LadderManifest {
        b1: l.b1,
        c_b: l.rad.c_b,
        d_b: l.rad.d_b,
        grid_n: y.len(),
        y_min: k.grid.y_min(),
        y_max: k.grid.y_max(),
        monomials,
        files,
        norms,
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}
