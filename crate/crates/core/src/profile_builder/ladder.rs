//! The correction ladder S₂, S₃, S₄ as monomials in (b₁, b₂).
//!
//! S₂ = b₁² S̃₂,  S₃ = b₁b₂ P₁₁ + b₁³ P₃₀,  S₄ = b₁⁴ P₄₀ + b₁²b₂ P₂₁ + b₂² P₀₂.
//! Each profile depends on b₁ through c_b and Σ_b; that implicit dependence is
//! differentiated by central differences with relative step [`FD_STEP`].
//! Monomial sources (the right-hand sides handed to H⁻¹):
//!
//! * S̃₂:  3QT₁² − Θ₂
//! * P₁₁: −Θ₃ − D₂ + 6QT₁T₂
//! * P₃₀: (1+c)D₂ − ΛS̃₂ + 6QT₁S̃₂ + T₁³
//! * P₄₀: (1+c)E₃₀ − ΛP₃₀ + 6QT₁P₃₀ + 3QS̃₂² + 3T₁²S̃₂
//! * P₂₁: (1+c)E₁₁ − E₃₀ + (3+c)P₁₁ − ΛP₁₁ + 6QT₁P₁₁ + 6QT₂S̃₂ + 3T₁²T₂
//! * P₀₂: −E₁₁ + 3QT₂²
//!
//! with D₂ = 2S̃₂ + b₁∂S̃₂, E₁₁ = P₁₁ + b₁∂P₁₁, E₃₀ = 3P₃₀ + b₁∂P₃₀,
//! Θ₂ = ΛT₁ − T₁ + Σ and Θ₃ = ΛT₂ − 3T₂ − H⁻¹Σ.

use rayon::prelude::*;

use super::inverse::{invert_h, Kernels, Profile, TProfiles};
use super::radiation::{build_radiation, Radiation};
use crate::error::Result;

/// Relative step for ∂/∂b₁ of the implicit b₁ dependence.
pub const FD_STEP: f64 = 0.01;

/// Monomial exponents (i, j) of b₁^i b₂^j for each stored profile.
pub const MONOMIALS: [(&str, (u32, u32)); 6] = [
    ("s2", (2, 0)),
    ("p11", (1, 1)),
    ("p30", (3, 0)),
    ("p40", (4, 0)),
    ("p21", (2, 1)),
    ("p02", (0, 2)),
];

fn lin(terms: &[(f64, &[f64])]) -> Vec<f64> {
    let n = terms[0].1.len();
    let mut out = vec![0.0; n];
    for (c, v) in terms {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += c * x;
        }
    }
    out
}

fn central(plus: &[f64], minus: &[f64], h: f64) -> Vec<f64> {
    plus.iter().zip(minus).map(|(p, m)| (p - m) / (2.0 * h)).collect()
}

#[derive(Debug, Clone)]
struct StageA {
    rad: Radiation,
    theta2: Vec<f64>,
    theta3: Vec<f64>,
    s2: Profile,
}

fn stage_a(k: &Kernels, t: &TProfiles, b1: f64) -> Result<StageA> {
    let rad = build_radiation(k, t, b1)?;
    let (t1, t2) = (&t.t1, &t.t2);
    let theta2 = lin(&[(1.0, &t1.lambda), (-1.0, &t1.value), (1.0, &rad.sigma)]);
    let theta3 = lin(&[(1.0, &t2.lambda), (-3.0, &t2.value), (-1.0, &rad.inv_sigma.value)]);
    let qt1sq: Vec<f64> = (0..k.len()).map(|i| 3.0 * k.q[i] * t1.value[i] * t1.value[i]).collect();
    let s2 = invert_h(k, &lin(&[(1.0, &qt1sq), (-1.0, &theta2)]));
    Ok(StageA { rad, theta2, theta3, s2 })
}

#[derive(Debug, Clone)]
struct StageB {
    a: StageA,
    ds2: Vec<f64>,
    p11: Profile,
    p30: Profile,
}

fn stage_b(k: &Kernels, t: &TProfiles, b1: f64) -> Result<StageB> {
    let h = FD_STEP * b1;
    let (a, (ap, am)) = rayon::join(
        || stage_a(k, t, b1),
        || rayon::join(|| stage_a(k, t, b1 + h), || stage_a(k, t, b1 - h)),
    );
    let (a, ap, am) = (a?, ap?, am?);
    let ds2 = central(&ap.s2.value, &am.s2.value, h);
    let c = a.rad.c_b;
    let (t1, t2) = (&t.t1.value, &t.t2.value);
    let s2 = &a.s2;
    let d2 = lin(&[(2.0, &s2.value), (b1, &ds2)]);
    let n = k.len();
    let q = &k.q;
    let qt1t2: Vec<f64> = (0..n).map(|i| 6.0 * q[i] * t1[i] * t2[i]).collect();
    let src11 = lin(&[(-1.0, &a.theta3), (-1.0, &d2), (1.0, &qt1t2)]);
    let cubic: Vec<f64> = (0..n).map(|i| 6.0 * q[i] * t1[i] * s2.value[i] + t1[i].powi(3)).collect();
    let src30 = lin(&[(1.0 + c, &d2), (-1.0, &s2.lambda), (1.0, &cubic)]);
    let p11 = invert_h(k, &src11);
    let p30 = invert_h(k, &src30);
    Ok(StageB { a, ds2, p11, p30 })
}

#[derive(Debug, Clone)]
struct StageC {
    b: StageB,
    dp11: Vec<f64>,
    dp30: Vec<f64>,
    p40: Profile,
    p21: Profile,
    p02: Profile,
}

fn stage_c(k: &Kernels, t: &TProfiles, b1: f64) -> Result<StageC> {
    let h = FD_STEP * b1;
    let (b, (bp, bm)) = rayon::join(
        || stage_b(k, t, b1),
        || rayon::join(|| stage_b(k, t, b1 + h), || stage_b(k, t, b1 - h)),
    );
    let (b, bp, bm) = (b?, bp?, bm?);
    let dp11 = central(&bp.p11.value, &bm.p11.value, h);
    let dp30 = central(&bp.p30.value, &bm.p30.value, h);
    let c = b.a.rad.c_b;
    let n = k.len();
    let q = &k.q;
    let (t1, t2) = (&t.t1.value, &t.t2.value);
    let s2 = &b.a.s2.value;
    let (p11, p30) = (&b.p11, &b.p30);
    let e11 = lin(&[(1.0, &p11.value), (b1, &dp11)]);
    let e30 = lin(&[(3.0, &p30.value), (b1, &dp30)]);

    let extra40: Vec<f64> = (0..n)
        .map(|i| {
            6.0 * q[i] * t1[i] * p30.value[i] + 3.0 * q[i] * s2[i] * s2[i] + 3.0 * t1[i] * t1[i] * s2[i]
        })
        .collect();
    let src40 = lin(&[(1.0 + c, &e30), (-1.0, &p30.lambda), (1.0, &extra40)]);

    let extra21: Vec<f64> = (0..n)
        .map(|i| {
            6.0 * q[i] * t1[i] * p11.value[i] + 6.0 * q[i] * t2[i] * s2[i] + 3.0 * t1[i] * t1[i] * t2[i]
        })
        .collect();
    let src21 = lin(&[
        (1.0 + c, &e11),
        (-1.0, &e30),
        (3.0 + c, &p11.value),
        (-1.0, &p11.lambda),
        (1.0, &extra21),
    ]);

    let extra02: Vec<f64> = (0..n).map(|i| 3.0 * q[i] * t2[i] * t2[i]).collect();
    let src02 = lin(&[(-1.0, &e11), (1.0, &extra02)]);

    let (p40, (p21, p02)) = rayon::join(
        || invert_h(k, &src40),
        || rayon::join(|| invert_h(k, &src21), || invert_h(k, &src02)),
    );
    Ok(StageC { b, dp11, dp30, p40, p21, p02 })
}

/// All profiles of the ladder at one b₁, with their b₁-derivatives.
#[derive(Debug, Clone)]
pub struct CorrectionLadder {
    pub b1: f64,
    pub rad: Radiation,
    pub theta2: Vec<f64>,
    pub theta3: Vec<f64>,
    pub s2: Profile,
    pub p11: Profile,
    pub p30: Profile,
    pub p40: Profile,
    pub p21: Profile,
    pub p02: Profile,
    pub ds2: Vec<f64>,
    pub dp11: Vec<f64>,
    pub dp30: Vec<f64>,
    pub dp40: Vec<f64>,
    pub dp21: Vec<f64>,
    pub dp02: Vec<f64>,
}

impl CorrectionLadder {
    pub fn c_b(&self) -> f64 {
        self.rad.c_b
    }

    /// Profile and b₁-derivative for a monomial key of [`MONOMIALS`].
    pub fn monomial(&self, key: &str) -> Option<(&Profile, &[f64])> {
        match key {
            "s2" => Some((&self.s2, &self.ds2)),
            "p11" => Some((&self.p11, &self.dp11)),
            "p30" => Some((&self.p30, &self.dp30)),
            "p40" => Some((&self.p40, &self.dp40)),
            "p21" => Some((&self.p21, &self.dp21)),
            "p02" => Some((&self.p02, &self.dp02)),
            _ => None,
        }
    }
}

pub fn build_ladder(k: &Kernels, t: &TProfiles, b1: f64) -> Result<CorrectionLadder> {
    let h = FD_STEP * b1;
    let stages: Vec<Result<StageC>> =
        [b1, b1 + h, b1 - h].par_iter().map(|&b| stage_c(k, t, b)).collect();
    let mut it = stages.into_iter();
    let (c, cp, cm) = (it.next().unwrap()?, it.next().unwrap()?, it.next().unwrap()?);
    let dp40 = central(&cp.p40.value, &cm.p40.value, h);
    let dp21 = central(&cp.p21.value, &cm.p21.value, h);
    let dp02 = central(&cp.p02.value, &cm.p02.value, h);
    let StageC { b, dp11, dp30, p40, p21, p02 } = c;
    let StageB { a, ds2, p11, p30 } = b;
    let StageA { rad, theta2, theta3, s2 } = a;
    Ok(CorrectionLadder {
        b1,
        rad,
        theta2,
        theta3,
        s2,
        p11,
        p30,
        p40,
        p21,
        p02,
        ds2,
        dp11,
        dp30,
        dp40,
        dp21,
        dp02,
    })
}
