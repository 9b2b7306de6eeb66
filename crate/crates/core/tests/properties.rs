use std::f64::consts::PI;
use std::sync::Arc;

use logdiff_core::discretization::{integrate, lp_norm, truncated_l1, Barrier};
use logdiff_core::exact::cigar_l1_mass;
use logdiff_core::geometry::h;
use logdiff_core::harness::{build_v0, v0_postconditions, SmoothingGamma};
use logdiff_core::{ConformalField, DiskPoint, ExactSolution, Grid, HyperbolicMetric, MobiusMap, RadialGrid, Region};
use num_complex::Complex64;
use proptest::prelude::*;

fn hyp(r: f64) -> f64 {
    let d = 1.0 - r * r;
    4.0 / (d * d)
}

/// Composite Simpson on `[a, b]` with `m` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let dx = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * dx);
    }
    s * dx / 3.0
}

fn grid(n: usize, eps: f64) -> Arc<Grid> {
    Arc::new(Grid::Radial(RadialGrid::new(n, eps).unwrap()))
}

proptest! {
    #[test]
    fn h_matches_formula(r in 0.0f64..0.999) {
        prop_assert!((h(r) / hyp(r) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn metrics_are_ordered(a in 0.05f64..0.9, s in 0.0f64..1.0) {
        let r = a + (1.0 - a) * (0.001 + 0.998 * s);
        let full = HyperbolicMetric::FullDisk.eval_radius(r).unwrap();
        let punct = HyperbolicMetric::Punctured.eval_radius(r).unwrap();
        let ann = HyperbolicMetric::Annulus(a).eval_radius(r).unwrap();
        prop_assert!(full <= punct * (1.0 + 1e-12));
        prop_assert!(punct <= ann * (1.0 + 1e-12));
    }

    #[test]
    fn sub_ball_metric_scales(rho in 0.1f64..1.0, s in 0.0f64..0.99) {
        let r = rho * s;
        let got = HyperbolicMetric::SubBall(rho).eval_radius(r).unwrap();
        prop_assert!((got / (hyp(s) / (rho * rho)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mobius_is_a_hyperbolic_isometry(
        ar in -0.6f64..0.6, ai in -0.6f64..0.6, theta in -3.0f64..3.0,
        x in -0.6f64..0.6, y in -0.6f64..0.6,
    ) {
        let m = MobiusMap::new(Complex64::new(ar, ai), theta).unwrap();
        let (q, k) = m.apply_xy(x, y).unwrap();
        // h(φ(z)) |φ'(z)|² = h(z)
        let lhs = hyp(q.radius()) * k;
        let rhs = hyp((x * x + y * y).sqrt());
        prop_assert!((lhs / rhs - 1.0).abs() < 1e-10);
        prop_assert!(q.radius() < 1.0);
    }

    #[test]
    fn mobius_derivative_matches_difference_quotient(
        ar in -0.5f64..0.5, ai in -0.5f64..0.5, theta in -3.0f64..3.0,
        x in -0.5f64..0.5, y in -0.5f64..0.5,
    ) {
        let m = MobiusMap::new(Complex64::new(ar, ai), theta).unwrap();
        let d = 1e-6;
        let (p0, k) = m.apply_xy(x, y).unwrap();
        let (p1, _) = m.apply_xy(x + d, y).unwrap();
        let dz = Complex64::new(p1.x - p0.x, p1.y - p0.y) / d;
        prop_assert!((dz.norm_sqr() / k - 1.0).abs() < 1e-4);
    }

    #[test]
    fn cigar_solves_the_equation_pointwise(mu in 1e-4f64..0.9, r in 0.0f64..0.95, t in 0.05f64..2.0) {
        let u = ExactSolution::cigar_scaled(mu).unwrap();
        let ev = |r: f64, t: f64| u.eval(DiskPoint::new(r, 0.0).unwrap(), t).unwrap();
        let k = 1e-4;
        let dt = (ev(r, t + k) - ev(r, t - k)) / (2.0 * k);
        // radial Laplacian of log u by differences, with the r → 0 limit 2∂²
        let lg = |s: f64| ev(s.abs(), t).ln();
        let lap = if r < 1e-3 {
            2.0 * (lg(k) - 2.0 * lg(0.0) + lg(-k)) / (k * k)
        } else {
            (lg(r + k) - 2.0 * lg(r) + lg(r - k)) / (k * k) + (lg(r + k) - lg(r - k)) / (2.0 * k * r)
        };
        prop_assert!((dt - lap).abs() <= 1e-4 * dt.abs().max(1.0), "dt={dt} lap={lap}");
    }

    #[test]
    fn cigar_mass_matches_quadrature(mu in 1e-3f64..0.9, t in 0.0f64..1.5, r in 0.05f64..1.0) {
        let u = ExactSolution::cigar_scaled(mu).unwrap();
        let f = |s: f64| 2.0 * PI * s * u.eval(DiskPoint::new(s, 0.0).unwrap(), t).unwrap();
        let want = simpson(f, 0.0, r, 4000);
        let got = cigar_l1_mass(mu, t, r).unwrap();
        prop_assert!((got / want - 1.0).abs() < 1e-6, "{got} vs {want}");
    }

    #[test]
    fn cigar_mass_at_zero_is_four_pi(log_mu in -12.0f64..0.0) {
        let m = cigar_l1_mass(10f64.powf(log_mu), 0.0, 1.0).unwrap();
        prop_assert!((m / (4.0 * PI) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_solution_curvature_is_constant(alpha in 0.1f64..5.0, t in 0.0f64..3.0, r in 0.0f64..0.9) {
        let s = ExactSolution::hyperbolic(alpha, 1.0).unwrap();
        let k = s.curvature(DiskPoint::new(r, 0.0).unwrap(), t).unwrap();
        prop_assert!((k * (2.0 * t + alpha) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rescaled_solution_is_parabolic_rescaling(lambda in 0.2f64..5.0, r in 0.0f64..0.9, t in 0.0f64..1.0) {
        let base = ExactSolution::cigar_scaled(0.1).unwrap();
        let s = ExactSolution::rescaled(base.clone(), lambda).unwrap();
        let p = DiskPoint::new(r, 0.0).unwrap();
        let want = lambda * base.eval(p, t / lambda).unwrap();
        prop_assert!((s.eval(p, t).unwrap() / want - 1.0).abs() < 1e-13);
    }

    #[test]
    fn lp_norm_is_homogeneous(c in 0.1f64..10.0, p in 1.0f64..4.0) {
        let g = grid(64, 0.05);
        let f: Vec<f64> = g.points().iter().map(|&(x, y)| 1.0 + x * x + 0.5 * y).collect();
        let cf: Vec<f64> = f.iter().map(|v| c * v).collect();
        let a = lp_norm(&g, &f, p, Region::Full).unwrap();
        let b = lp_norm(&g, &cf, p, Region::Full).unwrap();
        prop_assert!((b / (c * a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncated_mass_is_monotone_in_the_barrier(k1 in 0.0f64..5.0, dk in 0.0f64..5.0) {
        let g = grid(64, 0.05);
        let f: Vec<f64> = g.points().iter().map(|&(x, _)| 4.0 + 3.0 * x).collect();
        let a = truncated_l1(&g, &f, Barrier::Constant(k1), Region::Full).unwrap();
        let b = truncated_l1(&g, &f, Barrier::Constant(k1 + dk), Region::Full).unwrap();
        prop_assert!(b <= a + 1e-14);
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn gamma_brackets_the_positive_part(mu in 1e-4f64..1.0, x in -3.0f64..3.0) {
        let g = SmoothingGamma::new(mu).unwrap();
        let v = g.eval(x);
        prop_assert!(v >= x.max(0.0) - 1e-15);
        prop_assert!(v <= x.max(0.0) + mu / 4.0 + 1e-15);
        let d = g.derivative(x);
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn build_v0_postconditions_hold(seed in 0u64..1000, mu in 1e-3f64..1.0) {
        let g = grid(64, 0.05);
        let s = seed as f64;
        let u0 = ConformalField::from_fn(g.clone(), 0.0, |x, y| {
            let r2 = x * x + y * y;
            hyp(r2.sqrt()) * (0.5 + (s * 0.37 + 5.0 * r2).sin().abs())
        }).unwrap();
        let barrier: Vec<f64> = g.points().iter().map(|&(x, y)| hyp((x * x + y * y).sqrt())).collect();
        let v0 = build_v0(&u0, &barrier, SmoothingGamma::new(mu).unwrap()).unwrap();
        let report = v0_postconditions(&u0, &barrier, &v0, SmoothingGamma::new(mu).unwrap());
        prop_assert!(report.pass, "{}", report.summary_line());
    }
}

#[test]
fn quadrature_of_h_on_a_ball() {
    let g = grid(512, 1.0 / 64.0);
    let hv: Vec<f64> = g.points().iter().map(|&(x, y)| hyp((x * x + y * y).sqrt())).collect();
    for r in [0.25, 0.5, 0.75] {
        let got = integrate(&g, &hv, Region::Ball(r)).unwrap();
        let want = 4.0 * PI * r * r / (1.0 - r * r);
        assert!((got / want - 1.0).abs() < 1e-2, "r={r}: {got} vs {want}");
    }
}

#[test]
fn cigar_grid_mass_matches_closed_form_at_high_resolution() {
    let g = grid(1024, 1e-3);
    let u = ExactSolution::cigar_scaled(1e-2).unwrap().sample(g.clone(), 0.0).unwrap();
    let m = integrate(&g, u.values(), Region::Full).unwrap();
    let want = cigar_l1_mass(1e-2, 0.0, g.radius(g.len() - 1)).unwrap();
    assert!((m / want - 1.0).abs() < 1e-4, "{m} vs {want}");
}
