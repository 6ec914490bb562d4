//! The acceptance suite: eleven numbered criteria, each reduced to a verdict
//! plus the measured quantities behind it. Shared by the `acceptance` test
//! target and `fracwave accept`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_k, k_pair_cf2_scaled, k_pair_temme_scaled};
use crate::discretization::{
    empirical_order, final_time_error, frac_integral, frac_integral_bound, fully_discrete_solve, InitRule, TimeGrid,
};
use crate::extension::{
    evaluate_extension, factorial_growth_fit, phi_integral, psi_integral, ExtensionField, ExtensionProfile, WeightSpec,
};
use crate::mlfunc::ml_value;
use crate::reglab::{
    critical_velocity_problem, fit_blowup_exponent, space_regularity_fit, weighted_time_norm, SpaceRegOptions,
    DEFAULT_MU,
};
use crate::spectral::{make_domain, DomainKind, ModeExpansion, SpectralDomain};
use crate::special::gamma;
use crate::wavesolve::{
    evaluate_solution, residual_check, solve_mode, Forcing, FracWaveProblem, ModeTrajectory, TimeProfile,
};

pub const CRITERIA: usize = 11;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub summary: String,
    pub metrics: BTreeMap<String, f64>,
    /// wall time; kept out of serialized output so reruns compare equal
    #[serde(skip)]
    pub elapsed_s: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.summary,
            self.elapsed_s
        )
    }
}

#[derive(Default)]
struct Tally {
    ok: bool,
    metrics: BTreeMap<String, f64>,
    notes: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self { ok: true, ..Default::default() }
    }

    /// Records `value` under `key`; `pass` decides the verdict.
    fn check(&mut self, key: &str, value: f64, pass: bool, note: String) {
        self.metrics.insert(key.to_string(), value);
        self.ok &= pass;
        if !pass {
            self.notes.push(format!("{key} failed: {note}"));
        } else {
            self.notes.push(note);
        }
    }

    fn info(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }
}

type Outcome = Result<Tally, String>;

pub fn name(id: usize) -> &'static str {
    match id {
        1 => "Mittag-Leffler correctness",
        2 => "mode residual",
        3 => "wave limit closed form",
        4 => "extension energy and trace",
        5 => "Bessel K accuracy",
        6 => "weighted profile integrals",
        7 => "time-regularity exponents",
        8 => "scheme order dichotomy",
        9 => "fractional-integral continuity",
        10 => "space-regularity factorial growth",
        11 => "determinism",
        _ => "unknown",
    }
}

/// Runs one criterion; an execution error counts as a failure.
pub fn run_criterion(id: usize, seed: u64) -> CriterionResult {
    let start = Instant::now();
    let out = match id {
        1 => c1_mittag_leffler(),
        2 => c2_residual(seed),
        3 => c3_wave_limit(),
        4 => c4_extension(seed),
        5 => c5_bessel(),
        6 => c6_profile_integrals(),
        7 => c7_time_regularity(),
        8 => c8_order(),
        9 => c9_frac_integral(seed),
        10 => c10_space_regularity(),
        11 => c11_determinism(seed),
        _ => Err(format!("no criterion {id}")),
    };
    let elapsed_s = start.elapsed().as_secs_f64();
    let (passed, summary, metrics) = match out {
        Ok(t) => (t.ok, t.notes.join("; "), t.metrics),
        Err(e) => (false, format!("error: {e}"), BTreeMap::new()),
    };
    CriterionResult { id, name: name(id).to_string(), passed, summary, metrics, elapsed_s }
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    (1..=CRITERIA).map(|id| run_criterion(id, seed)).collect()
}

/// Criterion ids parsed from "1,3,5-7" or "all".
pub fn parse_selection(spec: &str) -> Result<Vec<usize>, String> {
    if spec.trim() == "all" {
        return Ok((1..=CRITERIA).collect());
    }
    let mut ids = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| format!("bad criterion id '{s}'"));
        let (a, b) = match part.split_once('-') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let v = parse(part)?;
                (v, v)
            }
        };
        if a == 0 || b > CRITERIA || a > b {
            return Err(format!("criterion range '{part}' outside 1..={CRITERIA}"));
        }
        ids.extend(a..=b);
    }
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn interval(n: usize) -> Result<Arc<SpectralDomain>, String> {
    Ok(Arc::new(make_domain(DomainKind::Interval { length: PI }, n).map_err(err)?))
}

#[derive(Deserialize)]
struct MlPoint {
    gamma: f64,
    mu: f64,
    z: f64,
    value: f64,
}

#[derive(Deserialize)]
struct MlFixture {
    ml_points: Vec<MlPoint>,
}

#[derive(Deserialize)]
struct KPoint {
    nu: f64,
    z: f64,
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
struct ExtFixture {
    bessel_k: Vec<KPoint>,
    wave_forced: Vec<WavePoint>,
}

const ML_FIXTURE: &str = include_str!("../fixtures/ml_points.json");
const EXT_FIXTURE: &str = include_str!("../fixtures/ext_points.json");

fn c1_mittag_leffler() -> Outcome {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut worst: f64 = 0.0;
    for i in 0..=1050 {
        let z = -100.0 + 0.1 * i as f64;
        let r = (-z).abs().sqrt();
        let (c, sn) = if z < 0.0 { (r.cos(), if r > 0.0 { r.sin() / r } else { 1.0 }) } else { (r.cosh(), if r > 0.0 { r.sinh() / r } else { 1.0 }) };
        for (gm, mu, exact) in [(1.0, 1.0, z.exp()), (2.0, 1.0, c), (2.0, 2.0, sn)] {
            let v = ml_value(gm, mu, z).map_err(err)?;
            worst = worst.max((v - exact).abs() / exact.abs().max(1.0));
        }
    }
    t.check("closed_form_max_err", worst, worst <= 1e-10, format!("closed forms max err {worst:.2e} (tol 1e-10)"));
    let fx: MlFixture = serde_json::from_str(ML_FIXTURE).map_err(err)?;
    let mut worst: f64 = 0.0;
    for p in &fx.ml_points {
        let v = ml_value(p.gamma, p.mu, p.z).map_err(err)?;
        worst = worst.max((v - p.value).abs() / p.value.abs().max(1.0));
    }
    t.info("oracle_points", fx.ml_points.len() as f64);
    t.check("oracle_max_err", worst, worst <= 1e-12, format!("{} oracle points max err {worst:.2e} (tol 1e-12)", fx.ml_points.len()));
    let secs = start.elapsed().as_secs_f64();
    t.ok &= secs < 10.0;
    if secs >= 10.0 {
        t.notes.push(format!("runtime {secs:.1} s exceeds 10 s"));
    }
    Ok(t)
}

fn random_profile(rng: &mut ChaCha8Rng) -> Option<TimeProfile> {
    match rng.gen_range(0..5) {
        0 => None,
        1 => Some(TimeProfile::constant(rng.gen_range(-1.0..1.0))),
        2 => Some(TimeProfile::sine(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..4.0), rng.gen_range(0.0..PI))),
        3 => Some(TimeProfile::exponential(rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..1.0))),
        _ => Some(TimeProfile::polynomial((0..4).map(|_| rng.gen_range(-1.0..1.0)).collect())),
    }
}

fn c2_residual(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x02);
    let mut t = Tally::new();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let gm: f64 = rng.gen_range(1.1..2.0);
        let s: f64 = rng.gen_range(0.1..0.9);
        let lam: f64 = 10f64.powf(rng.gen_range(0.0..2.5));
        let tf: f64 = rng.gen_range(0.5..3.0);
        let dom = Arc::new(SpectralDomain::spectrum_only(vec![lam]).map_err(err)?);
        let g = ModeExpansion::new(dom.clone(), vec![rng.gen_range(-1.0..1.0)]).map_err(err)?;
        let h = ModeExpansion::new(dom.clone(), vec![rng.gen_range(-1.0..1.0)]).map_err(err)?;
        let f = match random_profile(&mut rng) {
            Some(p) => Forcing::zero(1).with_mode(1, p),
            None => Forcing::zero(1),
        };
        let prob = FracWaveProblem::new(dom, s, gm, tf, g, h, f).map_err(err)?;
        let grid: Vec<f64> = (0..12).map(|i| 0.01 * (tf / 0.01).powf(i as f64 / 11.0)).collect();
        worst = worst.max(residual_check(&prob, 1, &grid).map_err(err)?);
    }
    t.check("max_residual", worst, worst <= 1e-7, format!("20 random modes, max residual {worst:.2e} (tol 1e-7)"));
    Ok(t)
}

fn c3_wave_limit() -> Outcome {
    let mut t = Tally::new();
    let mut worst: f64 = 0.0;
    for &rate in &[0.5, 2.0, 9.0, 40.0] {
        let (g, h) = (0.7, -1.3);
        let m = ModeTrajectory::probe(2.0, rate, g, h, None).map_err(err)?;
        let w = f64::sqrt(rate);
        for i in 1..=20 {
            let x = 0.25 * i as f64;
            let exact = g * (w * x).cos() + h * (w * x).sin() / w;
            worst = worst.max((m.u(x).map_err(err)? - exact).abs());
        }
    }
    t.check("unforced_max_err", worst, worst <= 1e-10, format!("unforced trig max err {worst:.2e}"));
    let fx: ExtFixture = serde_json::from_str(EXT_FIXTURE).map_err(err)?;
    let mut worst: f64 = 0.0;
    for p in &fx.wave_forced {
        let m = ModeTrajectory::probe(2.0, p.rate, p.g, p.h, Some(TimeProfile::exponential(1.0, -1.0))).map_err(err)?;
        worst = worst.max((m.u(p.t).map_err(err)? - p.value).abs());
    }
    t.check("forced_max_err", worst, worst <= 1e-10, format!("forced vs high-precision convolution max err {worst:.2e} (tol 1e-10)"));
    Ok(t)
}

fn c4_extension(seed: u64) -> Outcome {
    let mut t = Tally::new();
    let (mut e_worst, mut c_worst): (f64, f64) = (0.0, 0.0);
    for &s in &[0.2, 0.5, 0.8] {
        for &lam in &[1.0, 9.0, 100.0] {
            let p = ExtensionProfile::new(s, lam).map_err(err)?;
            let exact = p.d_s * lam.powf(s);
            e_worst = e_worst.max((p.mode_energy().map_err(err)? - exact).abs() / exact);
            c_worst = c_worst.max((p.conormal_limit().map_err(err)? + 1.0).abs());
        }
    }
    t.check("energy_rel_err", e_worst, e_worst <= 1e-6, format!("energy rel err {e_worst:.2e} (tol 1e-6)"));
    t.check("conormal_err", c_worst, c_worst <= 1e-4, format!("conormal |limit+1| {c_worst:.2e} (tol 1e-4)"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x04);
    let dom = interval(6)?;
    let mut worst: f64 = 0.0;
    for &s in &[0.2, 0.5, 0.8] {
        let g = ModeExpansion::new(dom.clone(), (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect()).map_err(err)?;
        let h = ModeExpansion::new(dom.clone(), (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect()).map_err(err)?;
        let f = Forcing::zero(6).with_mode(2, TimeProfile::sine(1.0, 3.0, 0.0));
        let prob = FracWaveProblem::new(dom.clone(), s, 1.6, 1.0, g, h, f).map_err(err)?;
        let field = ExtensionField::new(prob.clone(), WeightSpec { beta: 0.0, theta: 0.0 }).map_err(err)?;
        for &x in &[0.3, 1.1, 2.5] {
            for &tt in &[0.1, 0.5, 1.0] {
                let u = evaluate_solution(&prob, &[x], tt).map_err(err)?;
                let e = evaluate_extension(&field, &[x], 0.0, tt).map_err(err)?;
                worst = worst.max((u - e).abs());
            }
        }
    }
    t.check("trace_err", worst, worst <= 1e-12, format!("trace |U(y=0) - u| {worst:.2e} (tol 1e-12)"));
    Ok(t)
}

fn c5_bessel() -> Outcome {
    let mut t = Tally::new();
    let mut worst: f64 = 0.0;
    for i in 0..=200 {
        let z = 1e-6 * (7e8f64).powf(i as f64 / 200.0);
        let exact = (PI / (2.0 * z)).sqrt() * (-z).exp();
        let v = bessel_k(0.5, z).map_err(err)?;
        if v.underflow {
            continue;
        }
        worst = worst.max((v.value - exact).abs() / exact);
    }
    t.check("half_order_rel_err", worst, worst <= 1e-11, format!("K_1/2 rel err {worst:.2e} (tol 1e-11)"));
    let mut worst: f64 = 0.0;
    for i in 0..=20 {
        let mu = -0.5 + 0.05 * i as f64;
        for j in 0..=30 {
            let z = 1.5 + 0.05 * j as f64;
            let (a0, a1) = k_pair_temme_scaled(mu, z).map_err(err)?;
            let (b0, b1) = k_pair_cf2_scaled(mu, z).map_err(err)?;
            worst = worst.max(((a0 - b0) / b0).abs()).max(((a1 - b1) / b1).abs());
        }
    }
    t.check("branch_rel_err", worst, worst <= 1e-10, format!("series/continued-fraction overlap rel err {worst:.2e} (tol 1e-10)"));
    let fx: ExtFixture = serde_json::from_str(EXT_FIXTURE).map_err(err)?;
    let mut worst: f64 = 0.0;
    for p in &fx.bessel_k {
        let v = bessel_k(p.nu, p.z).map_err(err)?.value;
        worst = worst.max((v - p.value).abs() / p.value);
    }
    t.check("oracle_rel_err", worst, worst <= 1e-11, format!("integral-representation oracle rel err {worst:.2e}"));
    Ok(t)
}

fn c6_profile_integrals() -> Outcome {
    let mut t = Tally::new();
    let lam1: f64 = 1.0;
    // the spread is (2/(2-θ/√λ_1))^{δ+1} at s = 1/2, so it is bounded for every
    // admissible θ but only below 3 for θ ≤ √λ_1; larger θ is reported only
    let spread_over = |thetas: &[f64]| -> Result<f64, String> {
        let mut spread: f64 = 1.0;
        for &s in &[0.3, 0.5, 0.7] {
            let alpha = 1.0 - 2.0 * s;
            for &delta in &[0.0, alpha] {
                for &theta in thetas {
                    let v: Vec<f64> = [1.0, 10.0, 100.0]
                        .iter()
                        .map(|m| phi_integral(s, delta, theta * lam1.sqrt(), m * lam1))
                        .collect::<Result<_, _>>()
                        .map_err(err)?;
                    let hi = v.iter().cloned().fold(f64::MIN, f64::max);
                    let lo = v.iter().cloned().fold(f64::MAX, f64::min);
                    spread = spread.max(hi / lo);
                }
            }
        }
        Ok(spread)
    };
    let spread = spread_over(&[0.0, 0.5, 1.0])?;
    t.check("phi_lambda_spread", spread, spread < 3.0, format!("Φ max/min over λ {spread:.3} (< 3) for θ ≤ √λ_1"));
    t.info("phi_lambda_spread_theta_1.5", spread_over(&[1.5])?);
    let mut kmin = f64::MAX;
    let mut norm_max: f64 = 0.0;
    for &s in &[0.3, 0.5, 0.7] {
        let fit = factorial_growth_fit(s, 0.0, lam1.sqrt(), lam1, 8).map_err(err)?;
        t.info(&format!("kappa_hat_s{s}"), fit.kappa_hat);
        kmin = kmin.min(fit.kappa_hat);
        norm_max = fit.normalized.iter().skip(1).cloned().fold(norm_max, f64::max);
    }
    t.check("kappa_hat_min", kmin, kmin > 1.0, format!("min κ̂ {kmin:.4} (> 1) at θ = √λ_1"));
    t.check("normalized_max", norm_max, norm_max <= 1.0 + 1e-12, format!("max normalized Ψ_ℓ, ℓ ≤ 8: {norm_max:.6}"));
    let mut worst: f64 = 0.0;
    worst = worst.max((phi_integral(0.5, 0.0, 0.0, 7.0).map_err(err)? - 0.5).abs() / 0.5);
    worst = worst.max((psi_integral(0.5, 1, 0.0, 0.0, 7.0).map_err(err)? - 0.25).abs() / 0.25);
    for ell in 0..=8usize {
        let p = 2.0 * ell as f64 + 1.3;
        let exact = gamma(p) / 0.5f64.powf(p);
        let v = psi_integral(0.5, ell, 0.3, 1.5, 1.0).map_err(err)?;
        worst = worst.max((v - exact).abs() / exact);
    }
    t.check("half_closed_form_err", worst, worst <= 1e-9, format!("s = 1/2 closed forms rel err {worst:.2e} (tol 1e-9)"));
    Ok(t)
}

fn c7_time_regularity() -> Outcome {
    let mut t = Tally::new();
    let dom = interval(1)?;
    let mut worst: f64 = 0.0;
    let mut norms_ok = true;
    for &gm in &[1.25, 1.5, 1.75] {
        let g = ModeExpansion::unit(dom.clone(), 1);
        let prob = FracWaveProblem::new(dom.clone(), 0.5, gm, 1.0, g, ModeExpansion::zeros(dom.clone()), Forcing::zero(1))
            .map_err(err)?;
        let q2 = fit_blowup_exponent(&prob, 2, 0.0).map_err(err)?.exponent_hat;
        let q3 = fit_blowup_exponent(&prob, 3, 0.0).map_err(err)?.exponent_hat;
        let crit = critical_velocity_problem(0.5, gm, 48).map_err(err)?;
        let qh = fit_blowup_exponent(&crit, 3, 0.0).map_err(err)?.exponent_hat;
        t.info(&format!("slope_g_q2_gamma{gm}"), q2);
        t.info(&format!("slope_g_q3_gamma{gm}"), q3);
        t.info(&format!("slope_h_q3_gamma{gm}"), qh);
        worst = worst.max((q2 - (gm - 2.0)).abs()).max((q3 - (gm - 3.0)).abs()).max((qh - (gm / 2.0 - 2.0)).abs());
        let above = weighted_time_norm(&prob, 5.0 - 2.0 * gm + 0.2).map_err(err)?;
        let below = weighted_time_norm(&prob, 5.0 - 2.0 * gm - 0.2).map_err(err)?;
        t.info(&format!("weighted_norm_above_gamma{gm}"), above.value);
        norms_ok &= !above.divergent && above.value.is_finite() && above.value > 0.0 && below.divergent;
    }
    t.check("slope_max_dev", worst, worst <= 0.05, format!("max slope deviation {worst:.4} (tol 0.05)"));
    t.check(
        "weighted_norm_threshold",
        if norms_ok { 1.0 } else { 0.0 },
        norms_ok,
        "weighted norm finite above and divergent below 5-2γ".into(),
    );
    Ok(t)
}

/// Observed order of the fully discrete scheme over τ = 2^{-6}..2^{-12}.
fn observed_order(prob: &FracWaveProblem) -> Result<f64, String> {
    let mut pts = Vec::new();
    for e in 6..=12 {
        let grid = TimeGrid::uniform(prob.t_final, 1 << e).map_err(err)?;
        let sol = fully_discrete_solve(prob, &grid, &InitRule::FractionalTaylor).map_err(err)?;
        pts.push((grid.tau(), final_time_error(prob, &sol).map_err(err)?));
    }
    Ok(empirical_order(&pts).map_err(err)?.order)
}

fn c8_order() -> Outcome {
    let mut t = Tally::new();
    let gm = 1.5;
    let dom = interval(2)?;
    let zero = ModeExpansion::zeros(dom.clone());
    let f = Forcing::zero(2)
        .with_mode(1, TimeProfile::manufactured_cubic(gm, 1.0))
        .with_mode(2, TimeProfile::manufactured_cubic(gm, 2f64.powf(2.0 * 0.5)));
    let smooth = FracWaveProblem::new(dom.clone(), 0.5, gm, 1.0, zero.clone(), zero.clone(), f).map_err(err)?;
    let p = observed_order(&smooth)?;
    t.check("smooth_order", p, (p - (3.0 - gm)).abs() <= 0.1, format!("manufactured order {p:.3} (target {:.2} ± 0.1)", 3.0 - gm));
    let rough = FracWaveProblem::new(dom.clone(), 0.5, gm, 1.0, ModeExpansion::unit(dom.clone(), 1), zero.clone(), Forcing::zero(2))
        .map_err(err)?;
    let q = observed_order(&rough)?;
    t.check("rough_order", q, q < 3.0 - gm - 0.2, format!("rough-data order {q:.3} (< {:.2})", 3.0 - gm - 0.2));
    Ok(t)
}

fn c9_frac_integral(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x09);
    let mut t = Tally::new();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let steps = [64usize, 128, 256][rng.gen_range(0..3)];
        let tf: f64 = rng.gen_range(0.5..2.0);
        let grid = TimeGrid::uniform(tf, steps).map_err(err)?;
        let g: Vec<f64> = (0..=steps).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let gn = grid.l2_norm(&g);
        for &sigma in &[0.5, 1.0, 1.5] {
            let i = frac_integral(sigma, &g, &grid).map_err(err)?;
            let bound = frac_integral_bound(sigma, tf) * gn * (1.0 + 5.0 * grid.tau());
            worst = worst.max(grid.l2_norm(&i) / bound);
        }
    }
    t.check("max_ratio", worst, worst <= 1.0, format!("10 sampled g, max ‖I^σg‖/bound {worst:.4} (≤ 1)"));
    Ok(t)
}

fn c10_space_regularity() -> Outcome {
    let mut t = Tally::new();
    let dom = interval(4)?;
    let mut worst: f64 = 0.0;
    let mut kmin = f64::MAX;
    for &s in &[0.3, 0.5, 0.7] {
        for &gm in &[1.5, 2.0] {
            let g = ModeExpansion::new(dom.clone(), vec![1.0, 0.5, 0.0, 0.0]).map_err(err)?;
            let h = ModeExpansion::unit(dom.clone(), 3);
            let f = Forcing::zero(4).with_mode(2, TimeProfile::sine(1.0, 1.0, 0.0));
            let prob = FracWaveProblem::new(dom.clone(), s, gm, 1.0, g, h, f).map_err(err)?;
            let field = ExtensionField::new(prob, WeightSpec { beta: 0.0, theta: 0.5 }).map_err(err)?;
            let opts = SpaceRegOptions { sigma: 0.5 * s, nu: 0.5, ell_max: 4, mu: DEFAULT_MU, t_window: (0.0, 1.0) };
            let r = space_regularity_fit(&field, &opts).map_err(err)?;
            worst = worst.max(r.max_normalized());
            for k in r.kappa_hat() {
                kmin = kmin.min(k);
            }
        }
    }
    t.check("normalized_max", worst, worst <= 1.0 + 1e-12, format!("6 (s,γ) pairs × 3 families, max normalized {worst:.6}"));
    t.check("kappa_hat_min", kmin, kmin.is_finite() && kmin > 0.0, format!("min κ̂ {kmin:.4}"));
    // single-mode s = 1/2, θ = 0: plain norms are Γ(2ℓ+1)/2^{2ℓ+1} ‖u‖²_{L²(0,T)}
    let d1 = interval(1)?;
    let prob = FracWaveProblem::new(d1.clone(), 0.5, 1.5, 1.0, ModeExpansion::unit(d1.clone(), 1), ModeExpansion::zeros(d1.clone()), Forcing::zero(1))
        .map_err(err)?;
    let field = ExtensionField::new(prob, WeightSpec { beta: 0.0, theta: 0.0 }).map_err(err)?;
    let r = space_regularity_fit(&field, &SpaceRegOptions { sigma: 0.0, nu: 0.0, ell_max: 4, mu: DEFAULT_MU, t_window: (0.0, 1.0) })
        .map_err(err)?;
    let u2 = solve_mode(&field.problem, 1).map_err(err)?.l2_time_norm_sq(1.0).map_err(err)?;
    let mut cf: f64 = 0.0;
    for ell in 0..=4usize {
        let exact = gamma(2.0 * ell as f64 + 1.0) / 2f64.powi(2 * ell as i32 + 1) * u2;
        cf = cf.max((r.sequences[0].norms[ell] - exact).abs() / exact);
    }
    t.check("half_closed_form_err", cf, cf <= 1e-9, format!("s = 1/2 closed-form norms rel err {cf:.2e}"));
    Ok(t)
}

/// Reruns the seeded criteria on a single-thread pool and compares the
/// serialized results with the default pool.
fn c11_determinism(seed: u64) -> Outcome {
    let mut t = Tally::new();
    let ids = [2usize, 4, 9];
    let serialize = |rs: &[CriterionResult]| serde_json::to_string(rs).map_err(err);
    let a: Vec<CriterionResult> = ids.iter().map(|&i| run_criterion(i, seed)).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(err)?;
    let b: Vec<CriterionResult> = pool.install(|| ids.iter().map(|&i| run_criterion(i, seed)).collect());
    let same = serialize(&a)? == serialize(&b)?;
    t.check(
        "identical",
        if same { 1.0 } else { 0.0 },
        same,
        "seeded criteria 2, 4, 9 byte-identical across thread counts".into(),
    );
    Ok(t)
}
