//! Small linear-algebra helpers: tridiagonal solves, dense solves, least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{BlowupError, Result};

/// Solves a tridiagonal system; `lower[i]` couples row i+1 to column i, `upper[i]` row i to column i+1.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if rhs.len() != n || lower.len() + 1 != n || upper.len() + 1 != n {
        return Err(BlowupError::InvalidArgument("tridiagonal dimensions disagree".into()));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv == 0.0 {
        return Err(BlowupError::Numerical("zero pivot in tridiagonal solve".into()));
    }
    if n > 1 {
        c[0] = upper[0] / piv;
    }
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i - 1] * c[i - 1];
        if piv == 0.0 || !piv.is_finite() {
            return Err(BlowupError::Numerical(format!("zero pivot at row {i}")));
        }
        if i + 1 < n {
            c[i] = upper[i] / piv;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Dense square solve with partial pivoting.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let v = DVector::from_column_slice(b);
    m.lu()
        .solve(&v)
        .map(|x| x.iter().copied().collect())
        .ok_or_else(|| BlowupError::Numerical("singular dense system".into()))
}

/// Least squares fit y ≈ X β; rows of `x` are samples. Returns (β, rms residual).
pub fn least_squares(x: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let rows = y.len();
    let cols = x.first().map_or(0, |r| r.len());
    if rows < cols || cols == 0 {
        return Err(BlowupError::InvalidArgument(format!("{rows} samples for {cols} unknowns")));
    }
    let a = DMatrix::from_fn(rows, cols, |i, j| x[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let beta = svd
        .solve(&b, 1e-14)
        .map_err(|e| BlowupError::Numerical(format!("least squares: {e}")))?;
    let r = &a * &beta - b;
    Ok((beta.iter().copied().collect(), (r.norm_squared() / rows as f64).sqrt()))
}

/// Slope and intercept of y against x.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let rows: Vec<Vec<f64>> = x.iter().map(|&v| vec![v, 1.0]).collect();
    let (beta, _) = least_squares(&rows, y)?;
    Ok((beta[0], beta[1]))
}

/// Ratio of the largest to the smallest singular value of a square matrix.
pub fn condition_number(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let sv = m.singular_values();
    let hi = sv.iter().copied().fold(0.0, f64::max);
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_dense() {
        let lower = [1.0, -2.0, 0.5];
        let diag = [4.0, 5.0, 6.0, 3.0];
        let upper = [0.3, 1.0, -1.0];
        let rhs = [1.0, 2.0, 3.0, 4.0];
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        let a = vec![
            vec![4.0, 0.3, 0.0, 0.0],
            vec![1.0, 5.0, 1.0, 0.0],
            vec![0.0, -2.0, 6.0, -1.0],
            vec![0.0, 0.0, 0.5, 3.0],
        ];
        let y = solve_dense(&a, &rhs).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn line_fit_recovers_slope() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let (s, c) = fit_line(&x, &y).unwrap();
        assert!((s - 3.0).abs() < 1e-12 && (c + 1.0).abs() < 1e-12);
    }
}
