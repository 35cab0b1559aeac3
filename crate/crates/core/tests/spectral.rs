use std::sync::{Arc, OnceLock};

use blowup_core::radial_core::RadialGrid;
use blowup_core::spectral::coercivity::project_out;
use blowup_core::spectral::*;
use proptest::prelude::*;

fn pack() -> &'static SpectralPack {
    static PACK: OnceLock<SpectralPack> = OnceLock::new();
    PACK.get_or_init(|| SpectralPack::build(Arc::new(RadialGrid::per_decade(1e-3, 300.0, 100).unwrap()), 10.0).unwrap())
}

#[test]
fn exactly_one_negative_direction() {
    let p = pack();
    let gs = ground_state(&p.op).unwrap();
    assert_eq!(gs.negative_count, 1);
    assert!((gs.sigma - 0.586).abs() < 5e-3, "sigma={}", gs.sigma);
    assert!((gs.rayleigh + gs.sigma).abs() < 1e-8 * gs.sigma);
    assert!(gs.psi.iter().all(|&x| x >= -1e-12));
}

#[test]
fn ground_state_needs_room() {
    let op = assemble_operator(Arc::new(RadialGrid::per_decade(1e-3, 20.0, 60).unwrap()));
    assert!(ground_state(&op).is_err());
}

#[test]
fn sigma_refines_at_second_order() {
    let g = RadialGrid::per_decade(1e-3, 200.0, 60).unwrap();
    let gold = sigma_convergence(&g, 3).unwrap();
    let t = &gold.convergence_table;
    let ratio = (t[1].sigma - t[0].sigma) / (t[2].sigma - t[1].sigma);
    assert!((ratio - 4.0).abs() < 1.0, "ratio={ratio}");
    assert!(gold.relative_shift < 1e-3);
}

#[test]
fn phi_is_orthogonal_to_both_kernels() {
    let p = pack();
    assert!(p.phi.ortho[0] < 1e-8 && p.phi.ortho[1] < 1e-8, "{:?}", p.phi.ortho);
    // The discrete and Green ratios agree once the grid resolves the core.
    assert!((p.phi.c1 / p.phi.c1_ratio - 1.0).abs() < 1e-2);
}

#[test]
fn phi_powers_are_compactly_supported() {
    let p = pack();
    let y = p.op.grid.nodes();
    for k in 1..4 {
        for (i, v) in p.phi.h_pow[k].iter().enumerate() {
            if y[i] < 9.0 {
                assert_eq!(*v, 0.0, "k={k} y={}", y[i]);
            }
            if y[i] > 25.0 {
                assert!(v.abs() < 1e-20, "k={k} y={}", y[i]);
            }
        }
    }
}

#[test]
fn phi_rejects_small_m_and_short_grids() {
    let g = Arc::new(RadialGrid::per_decade(1e-3, 20.0, 60).unwrap());
    let op = assemble_operator(g.clone());
    let t = blowup_core::profile_builder::TProfiles::build(&blowup_core::profile_builder::Kernels::new(g));
    assert!(build_phi_m(&op, &t, 5.0).is_err());
    assert!(build_phi_m(&op, &t, 10.0).is_err());
}

#[test]
fn dual_direction_meets_its_constraints() {
    let p = pack();
    let g = &p.op.grid;
    assert!((g.inner(&p.psi_dual.values, &p.psi) - 1.0).abs() < 1e-10);
    for k in 0..3 {
        let scale = g.norm_sq(&p.psi_dual.values).sqrt() * g.norm_sq(&p.phi.h_pow[k]).sqrt();
        assert!(g.inner(&p.psi_dual.values, &p.phi.h_pow[k]).abs() < 1e-10 * scale, "k={k}");
    }
}

#[test]
fn coercivity_suite_is_clean_and_reproducible() {
    let p = pack();
    let a = coercivity_suite(&p.op, &p.phi, &p.psi, 30, 7);
    let b = coercivity_suite(&p.op, &p.phi, &p.psi, 30, 7);
    assert_eq!(a.hardy_violations + a.sup_violations + a.subcoercivity_violations, 0);
    assert_eq!(a.worst_hardy_ratio, b.worst_hardy_ratio);
    assert_eq!(a.min_subcoercivity_c, b.min_subcoercivity_c);
}

fn bump(center: f64, width: f64, amp: f64) -> impl Fn(f64) -> f64 {
    move |y| amp * (-((y - center) / width).powi(2)).exp()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn operator_is_symmetric(c1 in 0.1f64..50.0, w1 in 0.2f64..10.0, c2 in 0.1f64..50.0, w2 in 0.2f64..10.0) {
        let op = &pack().op;
        let f = op.grid.map(bump(c1, w1, 1.0));
        let g = op.grid.map(bump(c2, w2, 1.0));
        prop_assert!(op.symmetry_defect(&[(f, g)]) < 1e-12);
    }

    #[test]
    fn projection_is_idempotent(c in 0.1f64..60.0, w in 0.2f64..20.0, amp in -5.0f64..5.0) {
        let p = pack();
        let g = &p.op.grid;
        let u = g.map(bump(c, w, amp));
        let once = project_out(&p.op, &p.phi, &u);
        let twice = project_out(&p.op, &p.phi, &once);
        let scale = g.norm_sq(&u).sqrt() * g.norm_sq(&p.phi.phi).sqrt();
        prop_assert!(g.inner(&once, &p.phi.phi).abs() <= 1e-12 * scale.max(1e-300));
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}
