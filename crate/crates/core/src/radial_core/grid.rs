//! Radial grids with finite-volume cells and panel quadrature for the measure y³dy.
//!
//! Nodes are log-spaced, optionally preceded by a uniform patch. Each node
//! owns the cell between the neighbouring midpoints; the innermost cell
//! extends to the origin so the flux there vanishes, which is the regularity
//! condition f'(0) = 0. A ghost node beyond `y_max` closes the last cell.

use serde::{Deserialize, Serialize};

use crate::error::{BlowupError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub y_min: f64,
    pub y_max: f64,
    pub n: usize,
    /// End of the uniform patch that starts at `y_min`, if any.
    pub inner_patch: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    spec: GridSpec,
    y: Vec<f64>,
    ghost: f64,
    /// faces[0] = 0, faces[i] between y[i-1] and y[i], faces[n] between y[n-1] and the ghost.
    faces: Vec<f64>,
    volumes: Vec<f64>,
    /// conductance[i] = faces[i]³ / (y[i] - y[i-1]) for i ≥ 1; conductance[0] = 0.
    conductance: Vec<f64>,
    panel_lo: Vec<f64>,
    panel_hi: Vec<f64>,
}

/// ∫_a^b x³ dx without cancellation.
fn shell(a: f64, b: f64) -> f64 {
    (b - a) * (b + a) * (b * b + a * a) / 4.0
}

impl RadialGrid {
    pub fn new(y_min: f64, y_max: f64, n: usize, inner_patch: Option<f64>) -> Result<Self> {
        let spec = GridSpec { y_min, y_max, n, inner_patch };
        if !(y_min.is_finite() && y_max.is_finite()) || y_min <= 0.0 {
            return Err(BlowupError::InvalidGrid(format!("need 0 < y_min, got {y_min}")));
        }
        if y_max <= y_min {
            return Err(BlowupError::InvalidGrid(format!(
                "need y_max > y_min, got [{y_min}, {y_max}]"
            )));
        }
        if n < 8 {
            return Err(BlowupError::InvalidGrid(format!("need at least 8 nodes, got {n}")));
        }
        let nodes = match inner_patch {
            None => log_nodes(y_min, y_max, n),
            Some(join) => {
                if !(join > y_min && join < y_max) {
                    return Err(BlowupError::InvalidGrid(format!(
                        "inner patch end {join} outside ({y_min}, {y_max})"
                    )));
                }
                patched_nodes(y_min, y_max, n, join)?
            }
        };
        Self::assemble(spec, nodes)
    }

    /// Pure log-spaced grid.
    pub fn log_spaced(y_min: f64, y_max: f64, n: usize) -> Result<Self> {
        Self::new(y_min, y_max, n, None)
    }

    /// Log grid with a fixed number of nodes per decade.
    pub fn per_decade(y_min: f64, y_max: f64, per_decade: usize) -> Result<Self> {
        let decades = (y_max / y_min).log10().max(0.0);
        let n = (decades * per_decade as f64).ceil() as usize + 1;
        Self::new(y_min, y_max, n.max(8), None)
    }

    fn assemble(spec: GridSpec, y: Vec<f64>) -> Result<Self> {
        let n = y.len();
        for w in y.windows(2) {
            if !(w[1] > w[0]) {
                return Err(BlowupError::InvalidGrid("nodes not strictly increasing".into()));
            }
        }
        let h_last = y[n - 1] - y[n - 2];
        let h_prev = y[n - 2] - y[n - 3];
        let ghost = y[n - 1] + h_last * (h_last / h_prev);

        let mut faces = Vec::with_capacity(n + 1);
        faces.push(0.0);
        for i in 1..n {
            faces.push(0.5 * (y[i - 1] + y[i]));
        }
        faces.push(0.5 * (y[n - 1] + ghost));

        let volumes: Vec<f64> = (0..n).map(|i| shell(faces[i], faces[i + 1])).collect();

        let mut conductance = vec![0.0; n + 1];
        for i in 1..=n {
            let right = if i == n { ghost } else { y[i] };
            conductance[i] = faces[i].powi(3) / (right - y[i - 1]);
        }

        let mut panel_lo = Vec::with_capacity(n - 1);
        let mut panel_hi = Vec::with_capacity(n - 1);
        for w in y.windows(2) {
            let (a, h) = (w[0], w[1] - w[0]);
            panel_lo.push(h * (a.powi(3) / 2.0 + a * a * h / 2.0 + a * h * h / 4.0 + h.powi(3) / 20.0));
            panel_hi.push(h * (a.powi(3) / 2.0 + a * a * h + 0.75 * a * h * h + h.powi(3) / 5.0));
        }

        Ok(Self { spec, y, ghost, faces, volumes, conductance, panel_lo, panel_hi })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    /// Same layout with every spacing halved.
    pub fn refined(&self) -> Result<Self> {
        let s = self.spec;
        Self::new(s.y_min, s.y_max, 2 * s.n - 1, s.inner_patch)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.y
    }

    pub fn y_min(&self) -> f64 {
        self.y[0]
    }

    pub fn y_max(&self) -> f64 {
        self.y[self.y.len() - 1]
    }

    pub fn ghost(&self) -> f64 {
        self.ghost
    }

    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn conductance(&self) -> &[f64] {
        &self.conductance
    }

    /// Smallest and largest node spacing.
    pub fn spacing_range(&self) -> (f64, f64) {
        self.y.windows(2).fold((f64::INFINITY, 0.0_f64), |(lo, hi), w| {
            let h = w[1] - w[0];
            (lo.min(h), hi.max(h))
        })
    }

    /// Number of nodes with y ≤ cap.
    pub fn count_below(&self, cap: f64) -> usize {
        self.y.partition_point(|&v| v <= cap)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.y.iter().map(|&v| f(v)).collect()
    }

    /// Cell-volume inner product Σ V_i f_i g_i; H is symmetric in it.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.volumes.iter().zip(f).zip(g).map(|((v, a), b)| v * a * b).sum()
    }

    pub fn inner_below(&self, f: &[f64], g: &[f64], cap: f64) -> f64 {
        let m = self.count_below(cap);
        self.volumes[..m].iter().zip(f).zip(g).map(|((v, a), b)| v * a * b).sum()
    }

    pub fn norm_sq(&self, f: &[f64]) -> f64 {
        self.inner(f, f)
    }

    pub fn norm_sq_below(&self, f: &[f64], cap: f64) -> f64 {
        self.inner_below(f, f, cap)
    }

    /// Σ V_i w_i f_i² for a pointwise weight.
    pub fn weighted_norm_sq(&self, f: &[f64], weight: impl Fn(f64) -> f64) -> f64 {
        self.volumes
            .iter()
            .zip(&self.y)
            .zip(f)
            .map(|((v, &y), a)| v * weight(y) * a * a)
            .sum()
    }

    /// Contribution of [0, y_0] assuming a local power law through the first two nodes.
    fn origin_panel(&self, f: &[f64]) -> f64 {
        let (f0, f1) = (f[0], f[1]);
        if f0 == 0.0 {
            return 0.0;
        }
        let p = if f0 * f1 > 0.0 {
            ((f1 / f0).ln() / (self.y[1] / self.y[0]).ln()).clamp(-3.5, 12.0)
        } else {
            0.0
        };
        f0 * self.y[0].powi(4) / (4.0 + p)
    }

    /// ∫_{y_min}^{y_max} f y³ dy with f linear on each panel and y³ exact.
    pub fn integrate_panels(&self, f: &[f64]) -> f64 {
        self.panel_lo
            .iter()
            .zip(&self.panel_hi)
            .zip(f.windows(2))
            .map(|((a, b), w)| a * w[0] + b * w[1])
            .sum()
    }

    /// ∫_0^{y_max} f y³ dy: panels plus the origin cap.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.origin_panel(f) + self.integrate_panels(f)
    }

    /// Running integral ∫_0^{y_i} f x³ dx at every node.
    pub fn cumulative(&self, f: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(f.len());
        let mut acc = self.origin_panel(f);
        out.push(acc);
        for (i, w) in f.windows(2).enumerate() {
            acc += self.panel_lo[i] * w[0] + self.panel_hi[i] * w[1];
            out.push(acc);
        }
        out
    }

    /// Panel weights of panel i (lower node, upper node).
    pub fn panel_weights(&self, i: usize) -> (f64, f64) {
        (self.panel_lo[i], self.panel_hi[i])
    }
}

fn log_nodes(y_min: f64, y_max: f64, n: usize) -> Vec<f64> {
    let span = (y_max / y_min).ln();
    let mut y: Vec<f64> = (0..n)
        .map(|i| y_min * (span * i as f64 / (n - 1) as f64).exp())
        .collect();
    y[n - 1] = y_max;
    y
}

fn patched_nodes(y_min: f64, y_max: f64, n: usize, join: f64) -> Result<Vec<f64>> {
    // Continuous spacing at the join: h = join (r - 1).
    let count = |r: f64| {
        let h = join * (r - 1.0);
        (join - y_min) / h + (y_max / join).ln() / r.ln() + 1.0
    };
    let (mut lo, mut hi) = (1.0 + 1e-12, 1e3);
    if count(hi) > n as f64 || count(lo) < n as f64 {
        return Err(BlowupError::InvalidGrid(format!("{n} nodes cannot realise the inner patch")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count(mid) > n as f64 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    let h = join * (r - 1.0);
    let m = ((join - y_min) / h).round().max(1.0) as usize;
    if m + 2 >= n {
        return Err(BlowupError::InvalidGrid("inner patch leaves no log-spaced nodes".into()));
    }
    let k = n - 1 - m;
    let mut y = Vec::with_capacity(n);
    for i in 0..m {
        y.push(y_min + (join - y_min) * i as f64 / m as f64);
    }
    let ratio = (y_max / join).ln() / k as f64;
    for j in 0..=k {
        y.push(join * (ratio * j as f64).exp());
    }
    y[n - 1] = y_max;
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_domains() {
        assert!(RadialGrid::new(1.0, 1.0, 16, None).is_err());
        assert!(RadialGrid::new(0.0, 1.0, 16, None).is_err());
        assert!(RadialGrid::new(1e-2, 1.0, 4, None).is_err());
        assert!(RadialGrid::new(1e-2, 1.0, 64, Some(2.0)).is_err());
    }

    #[test]
    fn volumes_tile_the_ball() {
        let g = RadialGrid::new(1e-2, 1e7, 4096, None).unwrap();
        let total: f64 = g.volumes().iter().sum();
        let exact = g.faces()[g.len()].powi(4) / 4.0;
        assert!((total / exact - 1.0).abs() < 1e-12);
        assert!(g.volumes().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn panels_are_exact_for_linear_integrands() {
        let g = RadialGrid::new(1e-2, 10.0, 300, None).unwrap();
        let f = g.map(|y| y);
        let exact = (1e5 - 1e-10) / 5.0;
        assert!((g.integrate_panels(&f) / exact - 1.0).abs() < 1e-13);
        for i in [0, 17, 298] {
            let (a, b) = (g.nodes()[i], g.nodes()[i + 1]);
            let (wl, wh) = g.panel_weights(i);
            assert!(((wl + wh) / shell(a, b) - 1.0).abs() < 1e-13);
            assert!(((wl * a + wh * b) / ((b.powi(5) - a.powi(5)) / 5.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn origin_cap_completes_power_laws() {
        let g = RadialGrid::new(1e-2, 3.0, 400, None).unwrap();
        let f = g.map(|y| y * y);
        let exact = 3.0_f64.powi(6) / 6.0;
        assert!((g.integrate(&f) / exact - 1.0).abs() < 1e-4);
        let c = g.cumulative(&f);
        assert!((c[c.len() - 1] - g.integrate(&f)).abs() < 1e-9);
    }

    #[test]
    fn patched_grid_is_continuous() {
        let g = RadialGrid::new(1e-3, 1e3, 1200, Some(0.5)).unwrap();
        assert_eq!(g.len(), 1200);
        let h: Vec<f64> = g.nodes().windows(2).map(|w| w[1] - w[0]).collect();
        for w in h.windows(2) {
            assert!((w[1] / w[0] - 1.0).abs() < 0.05, "jump {}", w[1] / w[0]);
        }
    }
}
