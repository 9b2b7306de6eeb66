use std::f64::consts::PI;
use std::sync::Arc;

use logdiff_core::discretization::{integrate, truncated_l1, Barrier};
use logdiff_core::harness::experiments::{brezis_merle_for, radial_grid};
use logdiff_core::harness::sharpness::{delta_mass_error, predicted_growth};
use logdiff_core::harness::suite::{mobius_gaps, sample_mobius};
use logdiff_core::harness::theorems::constant_k;
use logdiff_core::harness::{
    build_v0_auto, find_k_for_time, generic_family, harnack_family, k_bound, sharpness_sweep, v0_postconditions,
};
use logdiff_core::potential::{brezis_merle_audit, h_samples, poisson_zero_dirichlet};
use logdiff_core::{ConformalField, DiskGrid, ExactSolution, Grid, MobiusMap, Region};
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn find_k_matches_constant_closed_form() {
    let g = radial_grid(128, 0.05).unwrap();
    let u0 = ConformalField::from_fn(g.clone(), 0.0, |_, _| 3.0).unwrap();
    let area = integrate(&g, &vec![1.0; g.len()], Region::Full).unwrap();
    for t in [0.05, 0.2, 0.5] {
        let ks = find_k_for_time(&u0, t, 0.1).unwrap();
        // ‖(c − k)₊‖₁ = A(c − k)
        let want = 3.0 - 4.0 * PI * t / (1.1 * area);
        assert!((ks.k - want).abs() < 1e-9, "t={t}: {} vs {want}", ks.k);
        assert!((ks.k - constant_k(3.0, area, t, 0.1)).abs() < 1e-9);
        assert!(!ks.zero_branch);
    }
    let late = find_k_for_time(&u0, 10.0, 0.1).unwrap();
    assert!(late.zero_branch);
    assert_eq!(late.k, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn k_never_exceeds_the_lp_bound(seed in 0u64..500, p in 1.2f64..4.0, frac in 0.05f64..0.95, delta in 0.05f64..1.0) {
        let g = radial_grid(96, 0.05).unwrap();
        let d = &generic_family(seed, 1)[0];
        let u0 = d.sample(g).unwrap();
        let full = truncated_l1(u0.grid(), u0.values(), Barrier::Constant(0.0), Region::Full).unwrap();
        let t = frac * full * (1.0 + delta) / (4.0 * PI);
        let ks = find_k_for_time(&u0, t, delta).unwrap();
        let bound = k_bound(&u0, p, t, delta).unwrap();
        prop_assert!(ks.k <= bound * (1.0 + 1e-12), "k={} bound={bound}", ks.k);
        prop_assert!(ks.time_residual <= 1e-9);
    }

    #[test]
    fn mu_shrinking_meets_the_budget(seed in 0u64..500, budget_exp in -4.0f64..-1.0) {
        let g = radial_grid(64, 0.05).unwrap();
        let d = &generic_family(seed, 1)[0];
        let u0 = d.sample(g.clone()).unwrap();
        let h = h_samples(&g);
        let budget = 10f64.powf(budget_exp);
        let c = build_v0_auto(&u0, &h, budget, 0.5).unwrap();
        prop_assert!(c.excess_mass <= c.truncated_mass + budget);
        prop_assert!(v0_postconditions(&u0, &h, &c.v0, c.gamma).pass);
    }
}

#[test]
fn brezis_merle_on_a_closed_form_potential() {
    // Δη = c on B₁ with η = 0 at |x| = 1: η = c(r² − 1)/4
    let g = radial_grid(256, 1e-3).unwrap();
    let c = 0.6;
    let f = vec![c; g.len()];
    let eta = poisson_zero_dirichlet(&g, &f).unwrap();
    for i in (0..g.len()).step_by(37) {
        let r = g.radius(i);
        let want = c * (r * r - g.radius(g.len() - 1).powi(2)) / 4.0;
        assert!((eta[i] - want).abs() < 1e-5, "r={r}");
    }
    let r = brezis_merle_audit(&g, &eta, &f, 2.0).unwrap();
    // ∫ e^{p|η|} = 2π ∫ r e^{pc(1−r²)/4} dr = 4π (e^{pc/4} − 1)/(pc)
    let exact = 4.0 * PI * ((2.0 * c / 4.0f64).exp() - 1.0) / (2.0 * c);
    assert!((r.lhs / exact - 1.0).abs() < 1e-3, "{} vs {exact}", r.lhs);
    assert!(r.pass);
}

#[test]
fn brezis_merle_outside_its_window_is_flagged() {
    let g = radial_grid(64, 0.05).unwrap();
    let f = vec![3.0; g.len()];
    let eta = poisson_zero_dirichlet(&g, &f).unwrap();
    let r = brezis_merle_audit(&g, &eta, &f, 2.0).unwrap();
    assert!(r.pass);
    assert!(r.notes.contains("inapplicable"), "{}", r.notes);
}

#[test]
fn brezis_merle_holds_on_the_family() {
    let g = radial_grid(256, 1.0 / 64.0).unwrap();
    for d in harnack_family(3, 4) {
        let r = brezis_merle_for(&d, &g, 0.5).unwrap();
        assert!(r.pass && r.margin > 0.0, "{}", r.summary_line());
    }
}

#[test]
fn sharpness_table_trends() {
    let s = sharpness_sweep(&[1e-2, 1e-4, 1e-6, 1e-8], 0.1, 1.0).unwrap();
    let post: Vec<f64> = s.rows.iter().filter(|r| r.t > 1.0).map(|r| r.value).collect();
    assert!(post.windows(2).all(|w| w[1] < w[0]));
    let mass = s.reports.iter().find(|r| r.name == "sharpness_mass_t0").unwrap();
    assert!(mass.pass);
    // per-decade growth of u(0, 1 − δ) equals the closed-form prediction
    let pre: Vec<f64> = s.rows.iter().filter(|r| r.t < 1.0).map(|r| r.value).collect();
    for (i, w) in pre.windows(2).enumerate() {
        let mu_a = 10f64.powi(-2 * (i as i32 + 1));
        let want = predicted_growth(mu_a, mu_a * 1e-2, 0.1);
        assert!((w[1] / w[0] / want - 1.0).abs() < 1e-10);
    }
    assert!(sharpness_sweep(&[1e-4, 1e-2], 0.1, 1.0).is_err());
}

#[test]
fn delta_mass_error_vanishes_with_mu() {
    let errs: Vec<f64> = [1e-6, 1e-9, 1e-12, 1e-15]
        .iter()
        .map(|&m| delta_mass_error(m, 0.5, 0.5).unwrap())
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn mobius_invariance_on_a_coarse_disk_grid() {
    let (sup_gap, mass_gap) = mobius_gaps(128, 1.0 / 16.0, 0.5, 1.0, &sample_mobius()).unwrap();
    assert!(sup_gap < 2e-2, "{sup_gap}");
    assert!(mass_gap < 2e-2, "{mass_gap}");
}

#[test]
fn rotation_pullback_is_exact_for_radial_data() {
    let g = Arc::new(Grid::Disk(DiskGrid::new(64, 0.1).unwrap()));
    let sol = ExactSolution::cigar_scaled(0.3).unwrap();
    let u = sol.sample(g.clone(), 0.2).unwrap();
    let rot = MobiusMap::new(Complex64::new(0.0, 0.0), 1.1).unwrap();
    let pulled = ExactSolution::pullback(sol, rot).unwrap().sample(g, 0.2).unwrap();
    for (a, b) in u.values().iter().zip(pulled.values()) {
        assert!((a / b - 1.0).abs() < 1e-13);
    }
}
