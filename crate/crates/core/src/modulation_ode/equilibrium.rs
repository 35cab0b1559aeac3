//! The approximate solution bᵉ(s) of the b-system and its residual.

use crate::error::{BlowupError, Result};

pub fn b_e(s: f64) -> Result<(f64, f64)> {
    if !(s > std::f64::consts::E) {
        return Err(BlowupError::InvalidArgument(format!("b_e needs s > e, got {s}")));
    }
    let l = s.ln();
    Ok((2.0 / (3.0 * s) - 4.0 / (9.0 * s * l), -2.0 / (9.0 * s * s) + 20.0 / (27.0 * s * s * l)))
}

/// d bᵉ / ds.
pub fn b_e_ds(s: f64) -> Result<(f64, f64)> {
    b_e(s)?;
    let l = s.ln();
    let s2 = s * s;
    let s3 = s2 * s;
    let d1 = -2.0 / (3.0 * s2) + 4.0 * (l + 1.0) / (9.0 * s2 * l * l);
    let d2 = 4.0 / (9.0 * s3) - 20.0 * (2.0 * l + 1.0) / (27.0 * s3 * l * l);
    Ok((d1, d2))
}

/// Residual of the b-system along bᵉ with the asymptotic c = 2/|log b₁|:
/// ((b₁ᵉ)_s + (b₁ᵉ)²(1+c) − b₂ᵉ, (b₂ᵉ)_s + b₁ᵉb₂ᵉ(3+c)).
pub fn b_e_residual(s: f64, c: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let (b1, b2) = b_e(s)?;
    let (d1, d2) = b_e_ds(s)?;
    let cb = c(b1);
    Ok((d1 + b1 * b1 * (1.0 + cb) - b2, d2 + b1 * b2 * (3.0 + cb)))
}

/// The renormalised time s at which b₁ᵉ(s) = b₁ (Newton on log s).
pub fn s_for_b1(b1: f64) -> Result<f64> {
    if !(b1 > 0.0 && b1 < 0.05) {
        return Err(BlowupError::InvalidArgument(format!("b1 = {b1} outside (0, 0.05)")));
    }
    let mut s: f64 = 2.0 / (3.0 * b1);
    for _ in 0..60 {
        let (v, _) = b_e(s)?;
        let (d, _) = b_e_ds(s)?;
        let next = s - (v - b1) / d;
        let next = if next > std::f64::consts::E { next } else { 0.5 * (s + std::f64::consts::E) };
        if ((next - s) / s).abs() < 1e-15 {
            return Ok(next);
        }
        s = next;
    }
    Err(BlowupError::Numerical(format!("s_for_b1({b1}) did not converge")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_at_one_hundred() {
        let (b1, _) = b_e(100.0).unwrap();
        assert_eq!(b1, 2.0 / 300.0 - 4.0 / (900.0 * 100f64.ln()));
        assert!(b_e(2.0).is_err());
    }

    #[test]
    fn derivative_matches_differences() {
        for s in [50.0, 1e3, 1e6] {
            let h = s * 1e-5;
            let (p1, p2) = b_e(s + h).unwrap();
            let (m1, m2) = b_e(s - h).unwrap();
            let (d1, d2) = b_e_ds(s).unwrap();
            assert!(((p1 - m1) / (2.0 * h) / d1 - 1.0).abs() < 1e-7);
            assert!(((p2 - m2) / (2.0 * h) / d2 - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn inverse_time_round_trip() {
        for b1 in [1e-3, 1e-5, 1e-9] {
            let s = s_for_b1(b1).unwrap();
            assert!((b_e(s).unwrap().0 / b1 - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn second_parameter_sign_change_at_exp_ten_thirds() {
        let s_star = (10.0f64 / 3.0).exp();
        assert!(b_e(0.99 * s_star).unwrap().1 > 0.0);
        let mut s = 1.01 * s_star;
        while s < 1e12 {
            assert!(b_e(s).unwrap().1 < 0.0, "s={s}");
            s *= 1.1;
        }
    }
}
