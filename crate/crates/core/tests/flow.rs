use std::sync::OnceLock;

use blowup_core::modulation_ode::coords::b_to_u;
use blowup_core::modulation_ode::equilibrium::b_e;
use blowup_core::radial_core::GridSpec;
use blowup_core::renormalized_flow::*;
use proptest::prelude::*;

const S0: f64 = 1e4;

fn ctx() -> &'static FlowContext {
    static CTX: OnceLock<FlowContext> = OnceLock::new();
    CTX.get_or_init(|| {
        let cfg = FlowConfig {
            grid: GridSpec { y_min: 0.02, y_max: 5000.0, n: 400, inner_patch: Some(2.0) },
            s0: S0,
            ..FlowConfig::default()
        };
        FlowContext::new(cfg).unwrap()
    })
}

fn with(f: impl FnOnce(&mut FlowConfig)) -> FlowContext {
    let mut c = ctx().clone();
    f(&mut c.cfg);
    c
}

fn advance(c: &FlowContext, mut st: FlowState, mut pr: MovingProfile, n: usize, ds: f64) -> (FlowState, MovingProfile) {
    for _ in 0..n {
        let (a, b, _) = step(c, &st, &pr, ds).unwrap();
        st = a;
        pr = b;
    }
    (st, pr)
}

fn ground_state(c: &FlowContext) -> (FlowState, MovingProfile) {
    let pr = MovingProfile::ground(c);
    let st = FlowState::new(c, &pr, S0, 1.0, 0.0, vec![0.0; c.grid.len()], 0.0).unwrap();
    (st, pr)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn center_of_the_square_is_the_equilibrium() {
    let c = ctx();
    let (st, _) = build_initial_data(c, 0.0, 0.0).unwrap();
    let be = b_e(S0).unwrap();
    assert!((st.b[0] - be.0).abs() <= 1e-15 * be.0);
    assert!((st.b[1] - be.1).abs() <= 1e-12 * be.1.abs());
    let u = b_to_u(S0, st.b).unwrap();
    assert!(u[0].abs() < 1e-9 && u[1].abs() < 1e-9, "{u:?}");
    assert_eq!(max_abs(&st.epsilon), 0.0);
    assert_eq!(st.xi, Xi::default());
    assert!(st.flags(c.cfg.k_const).all_pass());
    assert_eq!(st.flags(c.cfg.k_const).label(), "ok");
}

#[test]
fn stable_coordinate_follows_the_unstable_one() {
    let (st, _) = build_initial_data(ctx(), 1.0, 0.0).unwrap();
    assert!((st.v_tilde[0] + 1.0 / 3.0).abs() < 1e-9, "{:?}", st.v_tilde);
    assert!((st.v_tilde[1] - 1.0).abs() < 1e-9);
}

#[test]
fn initial_data_is_orthogonal_and_round_trips() {
    let c = ctx();
    for (v2, tau) in [(0.3, -0.7), (-1.0, 1.0), (0.9, 0.25)] {
        let (st, _) = build_initial_data(c, v2, tau).unwrap();
        assert!(c.orthogonality_defect(&st.epsilon) < 1e-10);
        assert!((st.v_tilde[1] - v2).abs() < 1e-9, "{v2}: {:?}", st.v_tilde);
        assert!((st.tau_tilde - tau).abs() < 1e-9, "{tau}: {}", st.tau_tilde);
        assert!((st.v_tilde[0] + v2 / 3.0).abs() < 1e-9);
    }
}

#[test]
fn initial_data_outside_the_square_is_rejected() {
    assert!(build_initial_data(ctx(), 1.5, 0.0).is_err());
    assert!(build_initial_data(ctx(), 0.0, -1.01).is_err());
    assert!(build_initial_data(ctx(), f64::NAN, 0.0).is_err());
}

#[test]
fn zero_remainder_stays_zero_without_forcing() {
    let c = with(|f| f.forcing = Forcing::Off);
    let (st, pr) = build_initial_data(&c, 0.0, 0.0).unwrap();
    let (b0, ds) = (st.b, c.cfg.ds);
    let mut log_lambda = 0.0;
    let (mut b1, mut b2) = (b0[0], b0[1]);
    let (mut s, mut p) = (st, pr);
    for _ in 0..6 {
        let cb = p.c;
        log_lambda -= ds * b1;
        let (n1, n2) = (b1 + ds * (-b1 * b1 * (1.0 + cb) + b2), b2 - ds * b1 * b2 * (3.0 + cb));
        (b1, b2) = (n1, n2);
        let (a, q, rep) = step(&c, &s, &p, ds).unwrap();
        assert_eq!(rep.d, [0.0; 3]);
        (s, p) = (a, q);
    }
    assert_eq!(max_abs(&s.epsilon), 0.0);
    assert!((s.b[0] - b1).abs() <= 1e-14 * b1);
    assert!((s.b[1] - b2).abs() <= 1e-12 * b2.abs());
    assert!((s.lambda.ln() - log_lambda).abs() < 1e-13);
}

#[test]
fn the_soliton_is_stationary() {
    let c = ctx();
    let (st, pr) = ground_state(c);
    let (s, p) = advance(c, st, pr, 5, c.cfg.ds);
    assert_eq!(s.b, [0.0, 0.0]);
    assert!(max_abs(&s.epsilon) < 1e-14, "{}", max_abs(&s.epsilon));
    assert!((s.lambda - 1.0).abs() < 1e-14);
    assert_eq!(p.q_tilde, c.kernels.q);
}

#[test]
fn modulation_residual_at_zero_remainder_is_of_order_b1_to_seven_halves() {
    let c = ctx();
    let (st, pr) = build_initial_data(c, 0.0, 0.0).unwrap();
    let m = modulation_solve(c, &pr, &st.epsilon, Forcing::Full).unwrap();
    let bound = st.b[0].powf(3.5);
    assert!(m.d.iter().all(|d| d.abs() <= bound), "{:?} vs {bound:e}", m.d);
    assert!(m.condition.is_finite() && m.relative_det > 1e-12);
}

#[test]
fn modulation_residual_responds_linearly_to_a_t1_component() {
    let c = ctx();
    let (_, pr) = build_initial_data(c, 0.0, 0.0).unwrap();
    let y = c.nodes();
    let shape: Vec<f64> = c.t.t1.value.iter().zip(y).map(|(t, &y)| t * (-(y / 20.0).powi(2)).exp()).collect();
    let solve = |eta: f64| {
        let eps: Vec<f64> = shape.iter().map(|v| eta * v).collect();
        modulation_solve(c, &pr, &eps, Forcing::Homogeneous).unwrap().d
    };
    let (d0, d1, d2) = (solve(0.0), solve(1e-10), solve(2e-10));
    for k in 0..3 {
        let (r1, r2) = (d1[k] - d0[k], d2[k] - d0[k]);
        assert!((r2 - 2.0 * r1).abs() <= 1e-6 * r2.abs(), "k={k}: {r1:e} {r2:e}");
    }
    assert!((d1[1] - d0[1]).abs() > 0.0);
}

/// Φ_M is orthogonal to the discrete kernels; the Green-formula T₁, T₂ used
/// as directions differ from them by multiples of lower kernels, so only the
/// part below the diagonal vanishes.
#[test]
fn jacobian_at_the_soliton_is_triangular() {
    let c = ctx();
    let j = jacobian(c, &MovingProfile::ground(c));
    let p = c.pack.phi.lambda_q_pairing;
    let expect = [p, -p, p];
    for k in 0..3 {
        assert!((j[k][k] / expect[k] - 1.0).abs() <= 2e-3, "{j:?}");
        for l in 0..k {
            assert!(j[k][l].abs() <= 1e-4 * p.abs(), "({k},{l}) {j:?}");
        }
    }
}

#[test]
fn one_step_and_two_half_steps_differ_at_second_order() {
    let c = ctx();
    let (st, pr) = build_initial_data(c, 0.5, 0.5).unwrap();
    let gap = |ds: f64| {
        let (a, _) = advance(c, st.clone(), pr.clone(), 1, ds);
        let (b, _) = advance(c, st.clone(), pr.clone(), 2, ds / 2.0);
        let d: Vec<f64> = a.epsilon.iter().zip(&b.epsilon).map(|(x, y)| x - y).collect();
        c.grid.norm_sq(&d).sqrt()
    };
    let (g1, g2) = (gap(0.2), gap(0.1));
    let ratio = g1 / g2;
    assert!((3.0..5.0).contains(&ratio), "{g1:e} {g2:e} ratio {ratio}");
}

#[test]
fn eigenfunction_diagnostics_are_spectral_powers() {
    let c = ctx();
    let pr = MovingProfile::ground(c);
    let amp = 1e-3;
    let psi = &c.pack.psi;
    let sigma = c.pack.sigma;
    let norm = c.grid.norm_sq(psi);
    let eps: Vec<f64> = psi.iter().map(|p| amp * p / norm.sqrt()).collect();
    let st = FlowState::new(c, &pr, S0, 1.0, 0.0, eps, 0.0).unwrap();
    let a2 = amp * amp;
    assert!((st.tau - amp).abs() < 1e-12 * amp, "{}", st.tau);
    assert!((st.xi.xi2 / (a2 * sigma.powi(2)) - 1.0).abs() < 1e-8, "{}", st.xi.xi2);
    assert!((st.xi.xi4 / (a2 * sigma.powi(4)) - 1.0).abs() < 1e-8);
    assert!((st.xi.xi6 / (a2 * sigma.powi(6)) - 1.0).abs() < 1e-8);
}

#[test]
fn initial_energy_lies_above_the_soliton() {
    let c = ctx();
    let (st, _) = build_initial_data(c, 0.0, 0.3).unwrap();
    let (e_q, _) = energy(c, &MovingProfile::ground(c), &vec![0.0; c.grid.len()]);
    assert!(st.energy > e_q, "{} vs {e_q}", st.energy);
    assert!(st.energy_excess > 0.0);
    assert!((st.energy - e_q - st.energy_excess).abs() < 1e-9 * st.energy.abs());
}

#[test]
fn energy_does_not_increase_along_a_short_run() {
    let c = ctx();
    let (st, pr) = build_initial_data(c, -0.5, 0.0).unwrap();
    let run = run_trap(c, st, pr, RunOptions { s_end: S0 + 10.0, stop_on_exit: false, exit_set: ExitSet::All }).unwrap();
    assert_eq!(run.steps, 20);
    assert!(run.max_energy_increase <= 0.0, "{:e}", run.max_energy_increase);
    assert!(run.max_defect_pre < c.cfg.defect_tol);
    assert!(run.records.windows(2).all(|w| w[1].lambda < w[0].lambda));
    assert!(run.rate.is_none() && run.rate_note.is_some());
}

#[test]
fn run_log_has_the_documented_columns() {
    let c = ctx();
    let (st, pr) = build_initial_data(c, 0.0, 0.0).unwrap();
    let run = run_trap(c, st, pr, RunOptions { s_end: S0 + 1.0, stop_on_exit: false, exit_set: ExitSet::All }).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    write_run_log(&path, &run.records).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "s,lambda,b1,b2,b2_tilde,Xi1,Xi2,Xi4,Xi6,tau,tau_tilde,V1_tilde,V2_tilde,E,flags"
    );
    assert_eq!(lines.count(), run.records.len());
}

#[test]
fn runs_starting_outside_the_bounds_are_refused() {
    let c = ctx();
    let (mut st, pr) = build_initial_data(c, 0.0, 0.0).unwrap();
    st.v_tilde[1] = 1.5;
    let r = run_trap(c, st, pr, RunOptions { s_end: S0 + 1.0, stop_on_exit: true, exit_set: ExitSet::Modulation });
    assert!(matches!(r, Err(blowup_core::BlowupError::Precondition(_))));
}

#[test]
fn tau_exits_leave_outward_at_twice_sigma() {
    let c = ctx();
    let (st, pr) = build_initial_data(c, 0.0, 1.0).unwrap();
    let run = run_trap(c, st, pr, RunOptions { s_end: S0 + 5.0, stop_on_exit: true, exit_set: ExitSet::Modulation }).unwrap();
    let e = run.exit.expect("tau = 1 starts on the boundary and leaves");
    assert_eq!(e.coordinate, Coordinate::Tau);
    assert_eq!(e.outgoing_sign, 1.0);
    assert!(e.dtau_sq > 0.0);
}

#[test]
fn lyapunov_monitor_is_quiet_on_the_zero_run() {
    let c = with(|f| f.forcing = Forcing::Off);
    let (st, pr) = build_initial_data(&c, 0.0, 0.0).unwrap();
    let run = run_trap(&c, st, pr, RunOptions { s_end: S0 + 3.0, stop_on_exit: false, exit_set: ExitSet::All }).unwrap();
    let rep = lyapunov_monitor(&run.records, c.cfg.m).unwrap();
    assert_eq!(rep.c_fit, [0.0; 3]);
    assert_eq!(rep.stability(), [1.0; 3]);
    assert!(lyapunov_monitor(&run.records[..2], c.cfg.m).is_err());
}

#[test]
fn lyapunov_monitor_flags_an_injected_unstable_mode() {
    let c = with(|f| {
        f.forcing = Forcing::Off;
        f.ds = 0.05;
    });
    let (st, pr) = build_initial_data(&c, 0.0, 1.0).unwrap();
    let run = run_trap(&c, st, pr, RunOptions { s_end: S0 + 10.0, stop_on_exit: false, exit_set: ExitSet::Modulation }).unwrap();
    // Past s0 + 5 the ψ component dominates Ξ₆; backward Euler grows it at
    // −log(1 − ds·ς)/ds per unit s.
    let rep = lyapunov_monitor(&run.records[100..], c.cfg.m).unwrap();
    let two_sigma = -2.0 * (1.0 - c.cfg.ds * c.pack.sigma).ln() / c.cfg.ds;
    assert!((rep.xi6_growth_rate / two_sigma - 1.0).abs() < 0.05, "{} vs {two_sigma}", rep.xi6_growth_rate);
    assert!(rep.flags_growth(0.9 * two_sigma));
    assert!(rep.c_fit[0] > 0.0);
}

#[test]
fn exit_map_of_a_small_grid_is_ordered_and_serialises() {
    let c = ctx();
    let cfg = BrouwerConfig { n: 3, s_budget: S0 + 2.0, refine_depth: 1, exit_set: ExitSet::Modulation };
    let r = brouwer_shoot(c, &cfg).unwrap();
    assert_eq!(r.levels.len(), 2);
    let cells = &r.levels[0].map.cells;
    assert_eq!(cells.len(), 9);
    assert_eq!((cells[0].v2_0, cells[0].tau_0), (-1.0, -1.0));
    assert_eq!((cells[1].v2_0, cells[1].tau_0), (0.0, -1.0));
    assert_eq!(r.levels[0].runs.len(), 9);
    let b = &r.levels[0].map.cells[r.levels[0].map.best()];
    assert_eq!(r.levels[1].center, [b.v2_0, b.tau_0]);
    assert!((r.levels[1].half_width - 0.5).abs() < 1e-15);
    let json = serde_json::to_value(&r.levels[0].map).unwrap();
    for key in ["V2_0", "tau_0", "s_exit", "exit_coord", "outgoing_sign"] {
        assert!(json["cells"][0].get(key).is_some(), "{key}");
    }
    assert!(brouwer_shoot(c, &BrouwerConfig { n: 2, ..cfg }).is_err());
}

fn linearity_defect(c: &FlowContext, center: f64, width: f64, amp: f64, n: usize) -> f64 {
    let (st, pr) = build_initial_data(c, 0.0, 0.0).unwrap();
    let bump: Vec<f64> = c.nodes().iter().map(|&y| (-((y - center) / width).powi(2)).exp()).collect();
    let bump = c.project(&bump).unwrap();
    let scale = amp / max_abs(&bump);
    let run = |k: f64| {
        let eps: Vec<f64> = bump.iter().map(|v| k * scale * v).collect();
        let s = FlowState::new(c, &pr, S0, 1.0, 0.0, eps, st.b[0]).unwrap();
        advance(c, s, pr.clone(), n, c.cfg.ds).0.epsilon
    };
    let (e1, e2) = (run(1.0), run(2.0));
    let diff: Vec<f64> = e1.iter().zip(&e2).map(|(a, b)| b - 2.0 * a).collect();
    c.grid.norm_sq(&diff).sqrt() / c.grid.norm_sq(&e2).sqrt()
}

#[test]
fn linearisation_error_is_quadratic() {
    let c = with(|f| f.forcing = Forcing::Homogeneous);
    let ratio = linearity_defect(&c, 10.0, 3.0, 1e-12, 4) / linearity_defect(&c, 10.0, 3.0, 1e-15, 4);
    assert!((300.0..3000.0).contains(&ratio), "{ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn flow_projection_is_idempotent(center in 0.1f64..80.0, width in 0.3f64..30.0, amp in -3.0f64..3.0) {
        let c = ctx();
        let f: Vec<f64> = c.nodes().iter().map(|&y| amp * (-((y - center) / width).powi(2)).exp()).collect();
        let p1 = c.project(&f).unwrap();
        let p2 = c.project(&p1).unwrap();
        let scale = max_abs(&p1).max(1e-300);
        for (a, b) in p1.iter().zip(&p2) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
        prop_assert!(c.orthogonality_defect(&p1) < 1e-12);
    }

    #[test]
    fn forcing_split_is_additive_and_l_is_linear(amp in -1e-3f64..1e-3, d0 in -1e-6f64..1e-6, d1 in -1e-6f64..1e-6) {
        let c = ctx();
        let (_, pr) = build_initial_data(c, 0.0, 0.0).unwrap();
        let q = &c.kernels.q;
        let eps: Vec<f64> = c.nodes().iter().map(|&y| amp * (-(y / 30.0).powi(2)).exp()).collect();
        let s = forcing_split(&pr, q, &eps, [d0, d1, 0.0]);
        for i in 0..eps.len() {
            prop_assert!((s.total[i] - s.f0[i] - s.f1[i]).abs() <= 1e-15 * (s.f0[i].abs() + s.f1[i].abs()));
        }
        let zero = vec![0.0; eps.len()];
        prop_assert!(pr.nonlinear_term(&zero).iter().all(|v| *v == 0.0));
        let twice: Vec<f64> = eps.iter().map(|e| 2.0 * e).collect();
        let (l1, l2) = (pr.linear_term(q, &eps), pr.linear_term(q, &twice));
        prop_assert!(l1.iter().zip(&l2).all(|(a, b)| (b - 2.0 * a).abs() <= 1e-15 * b.abs() + 1e-300));
    }

    // D(ε) feeds b and hence the profile, so the homogeneous flow is linear
    // only to first order; the far-field Mod directions amplify ‖ε‖ by about
    // 1e12 per step at this b₁, which sets the admissible amplitude.
    #[test]
    fn linearised_flow_is_linear(center in 2.0f64..40.0, width in 1.0f64..10.0) {
        let c = with(|f| f.forcing = Forcing::Homogeneous);
        let rel = linearity_defect(&c, center, width, 1e-17, 4);
        prop_assert!(rel <= 1e-5, "{}", rel);
    }

    #[test]
    fn tau_grows_at_the_negative_eigenvalue(amp in prop_oneof![-1.0f64..-0.1, 0.1f64..1.0]) {
        let c = with(|f| {
            f.forcing = Forcing::Off;
            f.ds = 0.02;
        });
        let (st, pr) = build_initial_data(&c, 0.0, amp).unwrap();
        let tau0 = st.tau;
        let (end, _) = advance(&c, st, pr, 100, c.cfg.ds);
        prop_assert!(end.tau.signum() == tau0.signum());
        let rate = (end.tau / tau0).ln() / 2.0;
        prop_assert!((rate / c.pack.sigma - 1.0).abs() < 0.03, "rate {} vs {}", rate, c.pack.sigma);
    }

    #[test]
    fn improved_b2_stays_within_b1_to_five_halves(v2 in -1.0f64..1.0, tau in -1.0f64..1.0) {
        let (st, _) = build_initial_data(ctx(), v2, tau).unwrap();
        prop_assert!((st.b2_tilde - st.b[1]).abs() <= st.b[0].powf(2.5));
    }
}





