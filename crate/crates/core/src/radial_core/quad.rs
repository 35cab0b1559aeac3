//! Adaptive Gauss–Kronrod (7/15) quadrature for closed-form integrands.
//! Used where no grid is involved: exact radiation constants and test oracles.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// ∫_a^b f with absolute/relative tolerance, by bisection of the worst panel.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    integrate_panels(&f, &[a, b], rel_tol)
}

/// Same, starting from the supplied breakpoints.
pub fn integrate_panels(f: &impl Fn(f64) -> f64, breaks: &[f64], rel_tol: f64) -> f64 {
    let mut panels: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .map(|w| {
            let (v, e) = kronrod(f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    for _ in 0..4000 {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= rel_tol * total.abs().max(1e-300) {
            break;
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (a, b, _, _) = panels.swap_remove(idx);
        let m = 0.5 * (a + b);
        let (v1, e1) = kronrod(f, a, m);
        let (v2, e2) = kronrod(f, m, b);
        panels.push((a, m, v1, e1));
        panels.push((m, b, v2, e2));
    }
    panels.iter().map(|p| p.2).sum()
}

/// ∫_0^R g(y) y³ dy with log-spaced breakpoints; suited to integrands spanning many decades.
pub fn integrate_radial(g: impl Fn(f64) -> f64, r_max: f64, rel_tol: f64) -> f64 {
    let mut breaks = vec![0.0, 1e-3_f64.min(r_max / 2.0)];
    let mut x = breaks[1];
    while x * 2.0 < r_max {
        x *= 2.0;
        breaks.push(x);
    }
    breaks.push(r_max);
    integrate_panels(&|y: f64| g(y) * y * y * y, &breaks, rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_transcendental() {
        assert!((integrate(|x| x.powi(5), 0.0, 2.0, 1e-14) - 64.0 / 6.0).abs() < 1e-12);
        assert!((integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-14) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn radial_measure() {
        let v = integrate_radial(|y| (-y * y).exp(), 20.0, 1e-13);
        assert!((v - 0.5).abs() < 1e-12);
    }
}
