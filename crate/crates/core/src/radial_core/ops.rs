//! Discrete radial operators on a [`RadialGrid`].
//!
//! Δ is the finite-volume form (1/y³)(y³ f')' with zero flux at the origin,
//! so it is symmetric in the cell-volume inner product. First derivatives use
//! three-point stencils; the origin stencil reflects f evenly.

use serde::{Deserialize, Serialize};

use super::grid::RadialGrid;
use super::kernels;

/// Far-field behaviour f ≈ c y^p (log y)^q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailLaw {
    pub p: f64,
    pub q: f64,
    pub c: f64,
}

impl TailLaw {
    pub fn eval(&self, y: f64) -> f64 {
        self.c * y.powf(self.p) * y.ln().powf(self.q)
    }
}

/// How the value past `y_max` is supplied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OuterBc {
    /// Ghost value zero.
    Dirichlet,
    /// Quadratic extrapolation through the last three nodes.
    Extrapolate,
    /// Ghost value continues the tail law from the last node.
    Tail(TailLaw),
}

pub fn ghost_value(grid: &RadialGrid, f: &[f64], bc: OuterBc) -> f64 {
    let n = grid.len();
    let y = grid.nodes();
    let g = grid.ghost();
    match bc {
        OuterBc::Dirichlet => 0.0,
        OuterBc::Extrapolate => {
            let (x0, x1, x2) = (y[n - 3], y[n - 2], y[n - 1]);
            let l0 = (g - x1) * (g - x2) / ((x0 - x1) * (x0 - x2));
            let l1 = (g - x0) * (g - x2) / ((x1 - x0) * (x1 - x2));
            let l2 = (g - x0) * (g - x1) / ((x2 - x0) * (x2 - x1));
            l0 * f[n - 3] + l1 * f[n - 2] + l2 * f[n - 1]
        }
        OuterBc::Tail(law) => {
            let last = law.eval(y[n - 1]);
            if last == 0.0 {
                0.0
            } else {
                f[n - 1] * law.eval(g) / last
            }
        }
    }
}

/// ∂_y f.
pub fn derivative(grid: &RadialGrid, f: &[f64], bc: OuterBc) -> Vec<f64> {
    let n = grid.len();
    let y = grid.nodes();
    let ghost = ghost_value(grid, f, bc);
    let mut out = vec![0.0; n];
    for i in 0..n {
        let (ym, fm) = if i == 0 { (-y[0], f[0]) } else { (y[i - 1], f[i - 1]) };
        let (yp, fp) = if i + 1 == n { (grid.ghost(), ghost) } else { (y[i + 1], f[i + 1]) };
        let hm = y[i] - ym;
        let hp = yp - y[i];
        out[i] = -hp / (hm * (hm + hp)) * fm + (hp - hm) / (hm * hp) * f[i] + hm / (hp * (hm + hp)) * fp;
    }
    out
}

/// Λf = f + y f'.
pub fn lambda(grid: &RadialGrid, f: &[f64], bc: OuterBc) -> Vec<f64> {
    let d = derivative(grid, f, bc);
    grid.nodes().iter().zip(f).zip(d).map(|((y, v), dv)| v + y * dv).collect()
}

/// Finite-volume 4D radial Laplacian.
pub fn laplacian(grid: &RadialGrid, f: &[f64], bc: OuterBc) -> Vec<f64> {
    let n = grid.len();
    let a = grid.conductance();
    let vol = grid.volumes();
    let ghost = ghost_value(grid, f, bc);
    let mut out = vec![0.0; n];
    for i in 0..n {
        let right = if i + 1 == n { ghost } else { f[i + 1] };
        let left_flux = if i == 0 { 0.0 } else { a[i] * (f[i] - f[i - 1]) };
        out[i] = (a[i + 1] * (right - f[i]) - left_flux) / vol[i];
    }
    out
}

/// H f = -Δf - 3Q² f.
pub fn apply_h(grid: &RadialGrid, f: &[f64], bc: OuterBc) -> Vec<f64> {
    let lap = laplacian(grid, f, bc);
    grid.nodes()
        .iter()
        .zip(f)
        .zip(lap)
        .map(|((&y, v), l)| -l - kernels::potential(y) * v)
        .collect()
}

/// H^k f.
pub fn apply_h_pow(grid: &RadialGrid, f: &[f64], k: usize, bc: OuterBc) -> Vec<f64> {
    let mut out = f.to_vec();
    for _ in 0..k {
        out = apply_h(grid, &out, bc);
    }
    out
}

/// Σ_faces y³ (f_i - f_{i-1})² / (y_i - y_{i-1}), the discrete ∫|∂f|².
pub fn dirichlet_form(grid: &RadialGrid, f: &[f64], bc: OuterBc) -> f64 {
    let n = grid.len();
    let a = grid.conductance();
    let ghost = ghost_value(grid, f, bc);
    let mut s = 0.0;
    for i in 1..=n {
        let right = if i == n { ghost } else { f[i] };
        let d = right - f[i - 1];
        s += a[i] * d * d;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_of_quadratic_is_exact_at_origin() {
        let g = RadialGrid::log_spaced(1e-3, 10.0, 400).unwrap();
        let f = g.map(|y| y * y);
        let lap = laplacian(&g, &f, OuterBc::Extrapolate);
        assert!((lap[0] - 8.0).abs() < 1e-9);
        assert!((lap[200] - 8.0).abs() < 1e-3);
    }

    #[test]
    fn h_is_symmetric_in_cell_volumes() {
        let g = RadialGrid::log_spaced(1e-2, 50.0, 300).unwrap();
        let f = g.map(|y| (-y * y / 30.0).exp());
        let k = g.map(|y| (1.0 + y).recip() * (-y / 10.0).exp());
        let a = g.inner(&apply_h(&g, &f, OuterBc::Dirichlet), &k);
        let b = g.inner(&f, &apply_h(&g, &k, OuterBc::Dirichlet));
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn quadratic_form_splits_exactly() {
        let g = RadialGrid::log_spaced(1e-2, 40.0, 250).unwrap();
        let f = g.map(|y| y * (-y).exp());
        let hf = apply_h(&g, &f, OuterBc::Dirichlet);
        let pot: Vec<f64> = g.map(kernels::potential).iter().zip(&f).map(|(v, u)| v * u).collect();
        let lhs = g.inner(&hf, &f);
        let rhs = dirichlet_form(&g, &f, OuterBc::Dirichlet) - g.inner(&pot, &f);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn lambda_of_power_law() {
        let g = RadialGrid::log_spaced(1e-2, 1e3, 1500).unwrap();
        let f = g.map(|y| y.powi(3));
        let lf = lambda(&g, &f, OuterBc::Extrapolate);
        for i in (1..g.len()).step_by(97) {
            assert!((lf[i] / (4.0 * f[i]) - 1.0).abs() < 1e-3, "i={i}");
        }
    }
}
