//! Closed-form radial kernels: the ground state, its scaling derivatives,
//! the second homogeneous solution of H, the potential, and the smooth cutoff.

/// Ground state 1 / (1 + y²/8).
pub fn q(y: f64) -> f64 {
    8.0 / (8.0 + y * y)
}

/// ΛQ = (1 - y²/8) / (1 + y²/8)².
pub fn lambda_q(y: f64) -> f64 {
    let z = y * y / 8.0;
    (1.0 - z) / ((1.0 + z) * (1.0 + z))
}

/// Λ²Q = (1 - 6z + z²) / (1 + z)³ with z = y²/8.
pub fn lambda2_q(y: f64) -> f64 {
    let z = y * y / 8.0;
    (1.0 - 6.0 * z + z * z) / (1.0 + z).powi(3)
}

/// Potential 3Q².
pub fn potential(y: f64) -> f64 {
    let v = q(y);
    3.0 * v * v
}

/// Λ(3Q²) = 3(1 - 3z) / (1 + z)³.
pub fn lambda_potential(y: f64) -> f64 {
    let z = y * y / 8.0;
    3.0 * (1.0 - 3.0 * z) / (1.0 + z).powi(3)
}

/// Second solution of HΓ = 0, normalised by Γ(1) = 0. Wronskian y³(Γ'ΛQ - ΓΛQ') = -1.
pub fn gamma(y: f64) -> f64 {
    let y2 = y * y;
    let d = y2 + 8.0;
    (y2 - 8.0) / (d * d) * (y2 / 16.0 + 6.0 * y.ln() - 583.0 / 112.0 - 4.0 / y2) - 64.0 / (d * d)
}

/// y Γ'(y).
fn y_gamma_prime(y: f64) -> f64 {
    let y2 = y * y;
    let d = y2 + 8.0;
    let a = (y2 - 8.0) / (d * d);
    let da = 2.0 * y * (24.0 - y2) / d.powi(3);
    let b = y2 / 16.0 + 6.0 * y.ln() - 583.0 / 112.0 - 4.0 / y2;
    let db = y / 8.0 + 6.0 / y + 8.0 / (y2 * y);
    let dc = 256.0 * y / d.powi(3);
    y * (da * b + a * db + dc)
}

/// ΛΓ = Γ + yΓ'.
pub fn lambda_gamma(y: f64) -> f64 {
    gamma(y) + y_gamma_prime(y)
}

/// Root of ΛQ.
pub const LAMBDA_Q_ROOT: f64 = 2.828_427_124_746_190_3;

/// P(z)/(1+z)^k, the form closed under Λ = 1 + 2z d/dz.
#[derive(Debug, Clone, PartialEq)]
pub struct ZRational {
    pub numer: Vec<f64>,
    pub power: i32,
}

impl ZRational {
    pub fn eval(&self, y: f64) -> f64 {
        let z = y * y / 8.0;
        let p = self.numer.iter().rev().fold(0.0, |acc, c| acc * z + c);
        p / (1.0 + z).powi(self.power)
    }

    /// Λ[P/(1+z)^k] = [P(1+z) + 2z(1+z)P' - 2kzP] / (1+z)^{k+1}.
    pub fn apply_lambda(&self) -> Self {
        let p = &self.numer;
        let k = self.power as f64;
        let mut out = vec![0.0; p.len() + 1];
        for (j, &c) in p.iter().enumerate() {
            let jf = j as f64;
            // P(1+z)
            out[j] += c;
            out[j + 1] += c;
            // 2z(1+z) j c z^{j-1} = 2j c (z^j + z^{j+1})
            out[j] += 2.0 * jf * c;
            out[j + 1] += 2.0 * jf * c;
            // -2k z c z^j
            out[j + 1] -= 2.0 * k * c;
        }
        while out.len() > 1 && out[out.len() - 1] == 0.0 {
            out.pop();
        }
        Self { numer: out, power: self.power + 1 }
    }
}

/// Λ^i Q in closed form for i ≤ 4.
pub fn lambda_pow_q(i: usize) -> Option<ZRational> {
    if i > 4 {
        return None;
    }
    let mut r = ZRational { numer: vec![1.0], power: 1 };
    for _ in 0..i {
        r = r.apply_lambda();
    }
    Some(r)
}

/// Λ^i(3Q²) in closed form for i ≤ 4.
pub fn lambda_pow_potential(i: usize) -> Option<ZRational> {
    if i > 4 {
        return None;
    }
    let mut r = ZRational { numer: vec![3.0], power: 2 };
    for _ in 0..i {
        r = r.apply_lambda();
    }
    Some(r)
}

fn bump_exp(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

fn bump_exp_d1(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        bump_exp(t) / (t * t)
    }
}

fn bump_exp_d2(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        bump_exp(t) * (1.0 / t.powi(4) - 2.0 / t.powi(3))
    }
}

/// Smooth cutoff: 1 on [0,1], 0 on [2,∞), returns (χ, χ', χ'').
pub fn cutoff_unit(x: f64) -> (f64, f64, f64) {
    if x <= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    if x >= 2.0 {
        return (0.0, 0.0, 0.0);
    }
    let a = bump_exp(2.0 - x);
    let b = bump_exp(x - 1.0);
    let da = -bump_exp_d1(2.0 - x);
    let db = bump_exp_d1(x - 1.0);
    let dda = bump_exp_d2(2.0 - x);
    let ddb = bump_exp_d2(x - 1.0);
    let s = a + b;
    let ds = da + db;
    let num = da * b - a * db;
    let dnum = dda * b - a * ddb;
    (a / s, num / (s * s), dnum / (s * s) - 2.0 * num * ds / (s * s * s))
}

/// χ_R(y) = χ(y/R).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub radius: f64,
}

impl Cutoff {
    pub fn new(radius: f64) -> Self {
        Self { radius }
    }

    pub fn value(&self, y: f64) -> f64 {
        cutoff_unit(y / self.radius).0
    }

    /// ∂_y χ_R.
    pub fn dy(&self, y: f64) -> f64 {
        cutoff_unit(y / self.radius).1 / self.radius
    }

    /// ∂_y² χ_R.
    pub fn dyy(&self, y: f64) -> f64 {
        cutoff_unit(y / self.radius).2 / (self.radius * self.radius)
    }

    /// 4D radial Laplacian of χ_R.
    pub fn laplacian(&self, y: f64) -> f64 {
        let (_, d1, d2) = cutoff_unit(y / self.radius);
        let r = self.radius;
        d2 / (r * r) + 3.0 / y * d1 / r
    }

    /// ∂_R χ_R(y).
    pub fn d_radius(&self, y: f64) -> f64 {
        let r = self.radius;
        -cutoff_unit(y / r).1 * y / (r * r)
    }

    pub fn sample(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|&y| self.value(y)).collect()
    }
}
