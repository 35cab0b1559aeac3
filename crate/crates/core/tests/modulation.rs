use std::sync::OnceLock;

use blowup_core::modulation_ode::coords::{b_to_u, u_to_b};
use blowup_core::modulation_ode::rate::tail_integral;
use blowup_core::modulation_ode::shoot::{growth_exponent, probe};
use blowup_core::modulation_ode::*;
use proptest::prelude::*;

fn cfg() -> ShootConfig {
    ShootConfig {
        s0: 1e3,
        bracket: [-1.5, 1.5],
        s_budget: 1e9,
        width_tol: 1e-13,
        max_iter: 80,
        trap: Trap::default(),
        dynamics: Dynamics::Full(CMode::Asymptotic),
        options: IntegrateOptions::default(),
    }
}

fn shot() -> &'static ShootResult {
    static SHOT: OnceLock<ShootResult> = OnceLock::new();
    SHOT.get_or_init(|| shoot_unstable(&cfg()).unwrap())
}

#[test]
fn shot_trajectory_survives_the_budget() {
    let r = shot();
    assert!(r.best.exit.is_none());
    assert!(r.best.s_end() >= 0.999e9);
    assert!(r.trapped_gain(1e3) >= 10.0);
    assert!(r.v2_star > -1.5 && r.v2_star < -0.5, "v2*={}", r.v2_star);
}

#[test]
fn unshot_trajectories_leave_through_the_unstable_direction() {
    for v in [-1.5, -0.5, -0.25, -0.1, 0.1, 0.25, 0.5, 1.0, 1.5] {
        let (p, tr) = probe(&cfg(), v).unwrap();
        let e = tr.exit.unwrap_or_else(|| panic!("v={v} stayed trapped"));
        assert_eq!(e.coordinate, 2, "v={v}");
        assert_eq!(e.outgoing_sign, 1.0, "v={v}");
        assert!(!p.trapped);
    }
}

#[test]
fn growth_matches_the_linear_rate() {
    for v in [-0.5, 0.5] {
        let (_, tr) = probe(&cfg(), v).unwrap();
        let g = growth_exponent(&shot().best, &tr).unwrap();
        assert!((g / (2.0 / 3.0) - 1.0).abs() < 0.2, "v={v} g={g}");
    }
}

#[test]
fn equilibrium_drift_decays_like_a_log_power() {
    // s dV₂/ds at U = 0 scaled by (log s)^{3/4} stays near a constant.
    let scaled: Vec<f64> = [1e3, 1e5, 1e8]
        .iter()
        .map(|&s0: &f64| {
            let f = Frame::from_v(s0, [0.0, 0.0], 1.0, 0.0).unwrap();
            let tr = integrate(&f, s0 * 1.001, Trap::default(), Dynamics::Full(CMode::Asymptotic), &IntegrateOptions::default()).unwrap();
            tr.last().v[1] / 1.001f64.ln() * s0.ln().powf(0.75)
        })
        .collect();
    for w in scaled.windows(2) {
        assert!((w[1] / w[0] - 1.0).abs() < 0.1, "{scaled:?}");
    }
}

#[test]
fn blowup_time_estimate_converges_monotonically() {
    let tr = &shot().best;
    let estimates: Vec<f64> = tr.frames.iter().filter(|f| f.s >= 1e4).step_by(25).map(|f| f.t + tail_integral(f.s, f.lambda, true)).collect();
    // λ decays more slowly than the asymptotic law on this window, so the
    // tail under-approximates and the estimate rises towards its limit.
    let steps: Vec<f64> = estimates.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(steps.iter().all(|&d| d > 0.0), "{estimates:?}");
    for w in steps.windows(2) {
        assert!(w[1] < w[0], "{steps:?}");
    }
}

#[test]
fn rate_report_on_the_shot_trajectory() {
    let rep = reconstruct_rate(&shot().best, 1e3).unwrap();
    assert!(rep.drift < 0.05, "drift={}", rep.drift);
    assert!(rep.tail_error < 0.2 * rep.tail_two_term);
    for w in rep.t.windows(2) {
        assert!(w[1] > w[0]);
    }
}

#[test]
fn trajectory_csv_has_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let (_, tr) = probe(&ShootConfig { s_budget: 1e5, ..cfg() }, 0.3).unwrap();
    tr.write_csv(&path).unwrap();
    let mut rd = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["s", "b1", "b2", "U1", "U2", "V1", "V2", "lambda", "t"]);
    assert_eq!(rd.records().count(), tr.frames.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coordinates_round_trip(ls in 1.2f64..25.0, u1 in -3.0f64..3.0, u2 in -3.0f64..3.0) {
        let s = ls.exp();
        let back = b_to_u(s, u_to_b(s, [u1, u2]).unwrap()).unwrap();
        prop_assert!((back[0] - u1).abs() < 1e-8 && (back[1] - u2).abs() < 1e-8);
    }

    #[test]
    fn first_parameter_stays_positive(v1 in -1.9f64..1.9, v2 in -1.9f64..1.9) {
        let f = Frame::from_v(1e3, [v1, v2], 1.0, 0.0).unwrap();
        let opts = IntegrateOptions { samples_per_decade: 20, ..Default::default() };
        let tr = integrate(&f, 1e6, Trap { v_bound: 50.0 }, Dynamics::Full(CMode::Asymptotic), &opts).unwrap();
        prop_assert!(tr.frames.iter().all(|fr| fr.b[0] > 0.0));
        prop_assert!(tr.frames.windows(2).all(|w| w[1].lambda < w[0].lambda && w[1].t > w[0].t));
    }

    #[test]
    fn linearized_stable_component_decays(v1 in -1.9f64..1.9) {
        let f = Frame::from_v(1e3, [v1, 0.0], 1.0, 0.0).unwrap();
        let tr = integrate(&f, 1e5, Trap::default(), Dynamics::Linearized, &IntegrateOptions::default()).unwrap();
        let last = tr.last();
        prop_assert!((last.v[0] - v1 * 1e-2).abs() < 1e-9);
        prop_assert!(last.v[1].abs() < 1e-12);
    }
}
