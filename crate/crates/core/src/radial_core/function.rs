//! Sampled radial functions and their CSV form (`y,value`).

use std::path::Path;
use std::sync::Arc;

use super::grid::RadialGrid;
use super::ops::{self, OuterBc, TailLaw};
use crate::error::{BlowupError, Result};

#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    tail: Option<TailLaw>,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(BlowupError::InvalidArgument(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(BlowupError::Numerical(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values, tail: None })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.map(f);
        Self::new(grid, values)
    }

    pub fn with_tail(mut self, law: TailLaw) -> Self {
        self.tail = Some(law);
        self
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn tail(&self) -> Option<TailLaw> {
        self.tail
    }

    pub fn outer_bc(&self) -> OuterBc {
        self.tail.map_or(OuterBc::Extrapolate, OuterBc::Tail)
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.nodes() == other.grid.nodes() {
            Ok(())
        } else {
            Err(BlowupError::InvalidArgument("functions live on different grids".into()))
        }
    }

    pub fn apply_lambda(&self) -> Result<Self> {
        Self::new(self.grid.clone(), ops::lambda(&self.grid, &self.values, self.outer_bc()))
    }

    /// Λ^i for i ≤ 4.
    pub fn apply_lambda_pow(&self, i: usize) -> Result<Self> {
        if i > 4 {
            return Err(BlowupError::Unsupported(format!("Λ^{i}: powers above 4 are not provided")));
        }
        let mut out = self.clone();
        for _ in 0..i {
            out = out.apply_lambda()?;
        }
        Ok(out)
    }

    pub fn apply_h(&self) -> Result<Self> {
        Self::new(self.grid.clone(), ops::apply_h(&self.grid, &self.values, self.outer_bc()))
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self.grid.inner(&self.values, &other.values))
    }

    /// |f(y_max) / law(y_max) - 1| for the declared tail.
    pub fn tail_mismatch(&self) -> Option<f64> {
        let law = self.tail?;
        let y = self.grid.y_max();
        Some((self.values[self.values.len() - 1] / law.eval(y) - 1.0).abs())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_columns(path, &["y", "value"], &[self.grid.nodes(), &self.values])
    }

    /// Reads `y,value` rows and checks the nodes against `grid`.
    pub fn read_csv(grid: Arc<RadialGrid>, path: &Path) -> Result<Self> {
        let (y, v) = read_pairs(path)?;
        if y.len() != grid.len() {
            return Err(BlowupError::Parse(format!("{} rows for {} nodes", y.len(), grid.len())));
        }
        for (a, b) in y.iter().zip(grid.nodes()) {
            if (a - b).abs() > 1e-12 * b.abs() {
                return Err(BlowupError::Parse(format!("node mismatch: {a} vs {b}")));
            }
        }
        Self::new(grid, v)
    }
}

/// Writes equal-length columns with a header; floats use shortest round-trip form.
pub fn write_columns(path: &Path, header: &[&str], cols: &[&[f64]]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    let rows = cols.first().map_or(0, |c| c.len());
    for i in 0..rows {
        w.write_record(cols.iter().map(|c| c[i].to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pairs(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "y" || &headers[1] != "value" {
        return Err(BlowupError::Parse(format!("expected header y,value, got {headers:?}")));
    }
    let mut y = Vec::new();
    let mut v = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| BlowupError::Parse(format!("{s}: {e}")));
        y.push(parse(&rec[0])?);
        v.push(parse(&rec[1])?);
    }
    Ok((y, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_lossless() {
        let g = Arc::new(RadialGrid::log_spaced(1e-3, 1e3, 64).unwrap());
        let f = RadialFunction::from_fn(g.clone(), |y| (y.ln() * 1.234_567_890_123).sin() / 3.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        f.write_csv(&p).unwrap();
        let back = RadialFunction::read_csv(g, &p).unwrap();
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn lambda_power_is_capped() {
        let g = Arc::new(RadialGrid::log_spaced(1e-2, 10.0, 32).unwrap());
        let f = RadialFunction::from_fn(g, |y| y).unwrap();
        assert!(f.apply_lambda_pow(4).is_ok());
        assert!(matches!(f.apply_lambda_pow(5), Err(BlowupError::Unsupported(_))));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let g = Arc::new(RadialGrid::log_spaced(1e-2, 10.0, 32).unwrap());
        assert!(RadialFunction::new(g, vec![0.0; 31]).is_err());
    }
}
