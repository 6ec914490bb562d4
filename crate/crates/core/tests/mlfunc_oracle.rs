use fracwave_core::mlfunc::{ml, ml_value, MlMethod};
use proptest::prelude::*;
use serde::Deserialize;

#[derive(Deserialize)]
struct Point {
    gamma: f64,
    mu: f64,
    z: f64,
    value: f64,
}

#[derive(Deserialize)]
struct Fixture {
    ml_points: Vec<Point>,
}

#[test]
fn matches_high_precision_series() {
    let fx: Fixture = serde_json::from_str(include_str!("../fixtures/ml_points.json")).unwrap();
    let mut worst: f64 = 0.0;
    for p in &fx.ml_points {
        let r = ml(p.gamma, p.mu, p.z).unwrap();
        let tol = 1e-12f64.max(1e-12 * p.value.abs());
        let err = (r.value - p.value).abs();
        worst = worst.max(err / tol);
        assert!(err <= tol, "E_({},{})({}) = {} vs {} via {:?}", p.gamma, p.mu, p.z, r.value, p.value, r.method);
    }
    assert!(worst <= 1.0);
}

#[test]
fn report_method_follows_argument() {
    assert_eq!(ml(1.5, 1.0, -1.0).unwrap().method, MlMethod::TaylorSeries);
    assert_eq!(ml(1.5, 1.0, -1e6).unwrap().method, MlMethod::AsymptoticSeries);
    assert_eq!(ml(1.5, 1.0, -50.0).unwrap().method, MlMethod::IntegralRepresentation);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // E_{γ,μ}(z) = 1/Γ(μ) + z E_{γ,μ+γ}(z)
    #[test]
    fn shift_recurrence(g in 1.1f64..2.0, mu in 0.2f64..2.5, lz in -1.0f64..3.5) {
        let z = -(10f64.powf(lz));
        let lhs = ml_value(g, mu, z).unwrap();
        let rhs = fracwave_core::special::rgamma(mu) + z * ml_value(g, mu + g, z).unwrap();
        let scale = 1.0f64.max(lhs.abs()).max(z.abs() * 1e-3);
        prop_assert!((lhs - rhs).abs() <= 1e-11 * scale, "{} vs {}", lhs, rhs);
    }

    // E_{γ,1}(-x) decreases from 1 for 1 < γ < 2 near the origin and stays bounded by 1
    #[test]
    fn bounded_by_one(g in 1.05f64..1.95, lz in -3.0f64..6.0) {
        let v = ml_value(g, 1.0, -(10f64.powf(lz))).unwrap();
        prop_assert!(v.abs() <= 1.0 + 1e-12);
    }
}
