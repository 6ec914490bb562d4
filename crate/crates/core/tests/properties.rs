use std::sync::Arc;

use fracwave_core::discretization::{frac_integral, frac_integral_bound, fully_discrete_solve, stability_report, InitRule, TimeGrid};
use fracwave_core::extension::{
    evaluate_extension, poincare_constant, trace_witness, ExtensionField, ExtensionProfile, WeightSpec,
};
use fracwave_core::spectral::{make_domain, DomainKind, ModeExpansion};
use fracwave_core::wavesolve::{evaluate_solution, Forcing, FracWaveProblem, ModeTrajectory, TimeProfile};
use proptest::prelude::*;

fn interval(n: usize) -> Arc<fracwave_core::spectral::SpectralDomain> {
    Arc::new(make_domain(DomainKind::Interval { length: std::f64::consts::PI }, n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mode_solution_is_linear_in_data(
        gm in 1.1f64..2.0, rate in 0.5f64..20.0,
        g1 in -1.0f64..1.0, h1 in -1.0f64..1.0, g2 in -1.0f64..1.0, h2 in -1.0f64..1.0,
        a in -2.0f64..2.0, t in 0.05f64..2.0,
    ) {
        let u = |g: f64, h: f64| ModeTrajectory::probe(gm, rate, g, h, None).unwrap().u(t).unwrap();
        let lhs = u(g1 + a * g2, h1 + a * h2);
        let rhs = u(g1, h1) + a * u(g2, h2);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn continuity_towards_wave_limit(rate in 0.5f64..10.0, g in -1.0f64..1.0, h in -1.0f64..1.0, t in 0.1f64..2.0) {
        let near = ModeTrajectory::probe(2.0 - 1e-6, rate, g, h, None).unwrap().u(t).unwrap();
        let wave = ModeTrajectory::probe(2.0, rate, g, h, None).unwrap().u(t).unwrap();
        prop_assert!((near - wave).abs() < 1e-4, "{} vs {}", near, wave);
    }

    // unforced modes are bounded by the data for 1 < γ < 2
    #[test]
    fn unforced_mode_is_bounded(gm in 1.1f64..1.95, rate in 0.5f64..100.0, t in 0.01f64..5.0) {
        let v = ModeTrajectory::probe(gm, rate, 1.0, 0.0, None).unwrap().u(t).unwrap();
        prop_assert!(v.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn extension_trace_is_solution(s in 0.1f64..0.9, gm in 1.2f64..2.0, c in proptest::collection::vec(-1.0f64..1.0, 4), x in 0.1f64..3.0, t in 0.05f64..1.0) {
        let d = interval(4);
        let g = ModeExpansion::new(d.clone(), c).unwrap();
        let p = FracWaveProblem::new(d.clone(), s, gm, 1.0, g, ModeExpansion::zeros(d.clone()), Forcing::zero(4)).unwrap();
        let u = evaluate_solution(&p, &[x], t).unwrap();
        let fld = ExtensionField::new(p, WeightSpec { beta: 0.0, theta: 0.0 }).unwrap();
        let e = evaluate_extension(&fld, &[x], 0.0, t).unwrap();
        prop_assert!((u - e).abs() <= 1e-12);
    }

    #[test]
    fn profile_is_monotone(s in 0.1f64..0.9, lam in 1.0f64..100.0, y in 0.0f64..3.0) {
        let p = ExtensionProfile::new(s, lam).unwrap();
        let a = p.psi(y).unwrap();
        let b = p.psi(y + 0.05).unwrap();
        prop_assert!(b <= a && a <= 1.0 + 1e-14 && b >= 0.0);
    }

    #[test]
    fn trace_witness_agrees(s in 0.15f64..0.85, c in proptest::collection::vec(-1.0f64..1.0, 6)) {
        let u = ModeExpansion::new(interval(6), c).unwrap();
        let (a, b) = trace_witness(&u, s).unwrap();
        prop_assert!((a - b).abs() <= 1e-6 * a.max(1e-300));
    }

    // I^a I^b = I^{a+b} up to interpolating the t^b kink of the inner integral
    #[test]
    fn frac_integral_semigroup(a in 0.3f64..1.2, b in 0.3f64..1.2, w in 0.5f64..3.0) {
        let grid = TimeGrid::uniform(1.0, 400).unwrap();
        let g: Vec<f64> = grid.nodes().iter().map(|t| (w * t).cos()).collect();
        let ab = frac_integral(a, &frac_integral(b, &g, &grid).unwrap(), &grid).unwrap();
        let direct = frac_integral(a + b, &g, &grid).unwrap();
        let diff: Vec<f64> = ab.iter().zip(&direct).map(|(x, y)| x - y).collect();
        let err = grid.l2_norm(&diff) / grid.l2_norm(&direct);
        prop_assert!(err < 2e-3, "{}", err);
    }

    #[test]
    fn frac_integral_continuity(sigma in 0.2f64..2.0, c in proptest::collection::vec(-1.0f64..1.0, 65)) {
        let grid = TimeGrid::uniform(2.0, 64).unwrap();
        let i = frac_integral(sigma, &c, &grid).unwrap();
        let bound = frac_integral_bound(sigma, 2.0) * grid.l2_norm(&c) * (1.0 + 5.0 * grid.tau());
        prop_assert!(grid.l2_norm(&i) <= bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn poincare_matches_rescaling(s in 0.2f64..0.8, lam in 1.0f64..50.0) {
        let c1 = poincare_constant(s, 1.0).unwrap();
        let c = poincare_constant(s, lam).unwrap();
        prop_assert!((c * lam.sqrt() - c1).abs() <= 1e-8 * c1);
    }

    #[test]
    fn discrete_solution_is_stable(s in 0.2f64..0.8, gm in 1.2f64..1.9, g in -1.0f64..1.0, h in -1.0f64..1.0) {
        let d = interval(3);
        let gg = ModeExpansion::new(d.clone(), vec![g, 0.0, 0.5 * g]).unwrap();
        let hh = ModeExpansion::new(d.clone(), vec![0.0, h, 0.0]).unwrap();
        let f = Forcing::zero(3).with_mode(1, TimeProfile::sine(1.0, 2.0, 0.0));
        let p = FracWaveProblem::new(d, s, gm, 1.0, gg, hh, f).unwrap();
        let sol = fully_discrete_solve(&p, &TimeGrid::uniform(1.0, 128).unwrap(), &InitRule::FractionalTaylor).unwrap();
        let r = stability_report(&p, &sol).unwrap();
        prop_assert!(r.is_finite() && r < 5.0, "{}", r);
    }
}
