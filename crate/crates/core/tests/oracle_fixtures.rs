use fracwave_core::bessel::bessel_k;
use fracwave_core::extension::{phi_integral, psi_integral};
use fracwave_core::wavesolve::{ModeTrajectory, TimeProfile};
use serde::Deserialize;

#[derive(Deserialize)]
struct KPoint {
    nu: f64,
    z: f64,
    value: f64,
}

#[derive(Deserialize)]
struct PhiPoint {
    s: f64,
    delta: f64,
    theta_ratio: f64,
    value: f64,
}

#[derive(Deserialize)]
struct PsiPoint {
    s: f64,
    ell: usize,
    beta: f64,
    theta_ratio: f64,
    value: f64,
}

#[derive(Deserialize)]
struct ModePoint {
    gamma: f64,
    rate: f64,
    t: f64,
    value: f64,
}

#[derive(Deserialize)]
struct WavePoint {
    rate: f64,
    g: f64,
    h: f64,
    t: f64,
    value: f64,
}

#[derive(Deserialize)]
struct Fixture {
    bessel_k: Vec<KPoint>,
    phi: Vec<PhiPoint>,
    psi: Vec<PsiPoint>,
    const_forced: Vec<ModePoint>,
    sin_forced: Vec<ModePoint>,
    wave_forced: Vec<WavePoint>,
}

fn fixture() -> Fixture {
    serde_json::from_str(include_str!("../fixtures/ext_points.json")).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn bessel_k_matches_integral_representation() {
    for p in fixture().bessel_k {
        let v = bessel_k(p.nu, p.z).unwrap().value;
        assert!(rel(v, p.value) < 1e-11, "K_{}({}) = {v} vs {}", p.nu, p.z, p.value);
    }
}

#[test]
fn phi_matches_reference() {
    for p in fixture().phi {
        // λ = 1 so that θ/√λ equals the stored ratio
        let v = phi_integral(p.s, p.delta, p.theta_ratio, 1.0).unwrap();
        assert!(rel(v, p.value) < 1e-9, "Φ = {v} vs {}", p.value);
    }
}

#[test]
fn psi_matches_reference() {
    for p in fixture().psi {
        let v = psi_integral(p.s, p.ell, p.beta, p.theta_ratio, 1.0).unwrap();
        assert!(rel(v, p.value) < 1e-8, "Ψ_{} = {v} vs {}", p.ell, p.value);
    }
}

#[test]
fn constant_forcing_mode() {
    for p in fixture().const_forced {
        let m = ModeTrajectory::probe(p.gamma, p.rate, 0.0, 0.0, Some(TimeProfile::constant(1.0))).unwrap();
        let v = m.u(p.t).unwrap();
        assert!((v - p.value).abs() < 1e-10, "t={} {v} vs {}", p.t, p.value);
    }
}

#[test]
fn sine_forcing_mode() {
    for p in fixture().sin_forced {
        let m = ModeTrajectory::probe(p.gamma, p.rate, 0.0, 0.0, Some(TimeProfile::sine(1.0, 1.0, 0.0))).unwrap();
        let v = m.u(p.t).unwrap();
        assert!((v - p.value).abs() < 1e-10, "t={} {v} vs {}", p.t, p.value);
    }
}

#[test]
fn wave_forced_mode() {
    for p in fixture().wave_forced {
        let m = ModeTrajectory::probe(2.0, p.rate, p.g, p.h, Some(TimeProfile::exponential(1.0, -1.0))).unwrap();
        let v = m.u(p.t).unwrap();
        assert!((v - p.value).abs() < 1e-10, "t={} {v} vs {}", p.t, p.value);
    }
}
