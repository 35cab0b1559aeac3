//! Renormalised coordinates b_k = b_kᵉ + U_k / (s^k (log s)^{5/4}) and V = P·U,
//! in which the linearised system reads s U_s = A U and s V_s = D_A V.

use num_rational::Rational64;

use super::equilibrium::b_e;
use crate::error::Result;

pub const P: [[f64; 2]; 2] = [[1.0, -1.0], [2.0, 3.0]];
pub const P_INV: [[f64; 2]; 2] = [[3.0 / 5.0, 1.0 / 5.0], [-2.0 / 5.0, 1.0 / 5.0]];
pub const A: [[f64; 2]; 2] = [[-1.0 / 3.0, 1.0], [2.0 / 3.0, 0.0]];
/// Diagonal of D_A: the stable and the unstable rate.
pub const D_A: [f64; 2] = [-1.0, 2.0 / 3.0];

pub fn mat_vec(m: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn scale(s: f64, k: i32) -> f64 {
    s.powi(k) * s.ln().powf(1.25)
}

pub fn b_to_u(s: f64, b: [f64; 2]) -> Result<[f64; 2]> {
    let (e1, e2) = b_e(s)?;
    Ok([(b[0] - e1) * scale(s, 1), (b[1] - e2) * scale(s, 2)])
}

pub fn u_to_b(s: f64, u: [f64; 2]) -> Result<[f64; 2]> {
    let (e1, e2) = b_e(s)?;
    Ok([e1 + u[0] / scale(s, 1), e2 + u[1] / scale(s, 2)])
}

pub fn u_to_v(u: [f64; 2]) -> [f64; 2] {
    mat_vec(&P, u)
}

pub fn v_to_u(v: [f64; 2]) -> [f64; 2] {
    mat_vec(&P_INV, v)
}

pub fn change_coords(s: f64, b: [f64; 2]) -> Result<([f64; 2], [f64; 2])> {
    let u = b_to_u(s, b)?;
    Ok((u, u_to_v(u)))
}

type RMat = [[Rational64; 2]; 2];

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn rational_matrices() -> (RMat, RMat, RMat) {
    let p = [[r(1, 1), r(-1, 1)], [r(2, 1), r(3, 1)]];
    let a = [[r(-1, 3), r(1, 1)], [r(2, 3), r(0, 1)]];
    let d = [[r(-1, 1), r(0, 1)], [r(0, 1), r(2, 3)]];
    (p, a, d)
}

fn rmul(x: &RMat, y: &RMat) -> RMat {
    let mut out = [[r(0, 1); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

/// Structure of A checked in exact rational arithmetic.
#[derive(Debug, Clone, Copy)]
pub struct MatrixCheck {
    /// Roots of the characteristic polynomial, as (numerator, denominator).
    pub eigenvalues: [(i64, i64); 2],
    /// P·A − D_A·P is identically zero in rationals.
    pub exact_identity: bool,
    /// max |P·A·P⁻¹ − D_A| in floating point.
    pub float_defect: f64,
}

pub fn check_matrix_structure() -> MatrixCheck {
    let (p, a, d) = rational_matrices();
    let pa = rmul(&p, &a);
    let dp = rmul(&d, &p);
    let exact_identity = pa == dp;
    // λ² − tr λ + det with rational roots: discriminant tr² − 4det = 25/9.
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = tr * tr - det * r(4, 1);
    let root = exact_sqrt(disc).expect("discriminant of A is a rational square");
    let two = r(2, 1);
    let lo = (tr - root) / two;
    let hi = (tr + root) / two;
    let mut float_defect = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let mut v = 0.0;
            for k in 0..2 {
                for l in 0..2 {
                    v += P[i][k] * A[k][l] * P_INV[l][j];
                }
            }
            let want = if i == j { D_A[i] } else { 0.0 };
            float_defect = float_defect.max((v - want).abs());
        }
    }
    MatrixCheck {
        eigenvalues: [(*lo.numer(), *lo.denom()), (*hi.numer(), *hi.denom())],
        exact_identity,
        float_defect,
    }
}

fn exact_sqrt(x: Rational64) -> Option<Rational64> {
    let isqrt = |n: i64| -> Option<i64> {
        if n < 0 {
            return None;
        }
        let s = (n as f64).sqrt().round() as i64;
        (s * s == n).then_some(s)
    };
    Some(Rational64::new(isqrt(*x.numer())?, isqrt(*x.denom())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_are_minus_one_and_two_thirds() {
        let c = check_matrix_structure();
        assert_eq!(c.eigenvalues, [(-1, 1), (2, 3)]);
        assert!(c.exact_identity);
        assert!(c.float_defect < 1e-12);
    }

    #[test]
    fn equilibrium_has_zero_coordinates() {
        let s = 1e4;
        let (e1, e2) = b_e(s).unwrap();
        let (u, v) = change_coords(s, [e1, e2]).unwrap();
        assert_eq!(u, [0.0, 0.0]);
        assert_eq!(v, [0.0, 0.0]);
    }

    #[test]
    fn unit_first_coordinate_maps_to_one_two() {
        assert_eq!(u_to_v([1.0, 0.0]), [1.0, 2.0]);
        let back = v_to_u([1.0, 2.0]);
        assert!((back[0] - 1.0).abs() < 1e-15 && back[1].abs() < 1e-15);
    }

    #[test]
    fn round_trip_through_b() {
        for s in [20.0, 1e3, 1e8] {
            for u in [[0.3, -1.7], [2.0, 2.0], [-1e-3, 5.0]] {
                let b = u_to_b(s, u).unwrap();
                let back = b_to_u(s, b).unwrap();
                for k in 0..2 {
                    assert!((back[k] - u[k]).abs() < 1e-9 * (1.0 + u[k].abs()), "s={s} u={u:?}");
                }
            }
        }
    }
}
