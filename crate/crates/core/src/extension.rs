//! Extension of the solution to the half-cylinder Ω × (0, ∞) with weight y^α,
//! α = 1 - 2s: profiles ψ(y) = c_s (√λ y)^s K_s(√λ y), their energies, the
//! weighted integrals Φ and Ψ_ℓ, and field-level evaluations.
//!
//! Derivatives of ψ in z = √λ y are carried symbolically as sums of
//! coef · z^m · f_{s-j}(z) with f_ν = z^ν K_ν, using f_ν' = -z f_{ν-1}.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::bessel::{k_shifted_sequence_scaled, BesselError};
use crate::quadrature::{gauss_jacobi, gauss_legendre};
use crate::spectral::ModeExpansion;
use crate::special::{gamma, pairwise_sum};
use crate::wavesolve::{solve_mode, FracWaveProblem, SolveError};

/// Largest admissible θ/√λ_1 (strictly below the critical value 2).
pub const THETA_FRACTION: f64 = 0.95;
const GL_NODES: usize = 16;
const INNER_PANELS: i32 = 41;
const TAIL_STALL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtError {
    #[error("integrand behaves like z^{exponent} at 0 and is not integrable")]
    NonIntegrable { exponent: f64 },
    #[error("theta = {theta} outside [0, {limit}]")]
    WeightOutOfRange { theta: f64, limit: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("extrapolated limit did not settle (last change {change:e})")]
    ExtrapolationDivergence { change: f64 },
    #[error("tail quadrature stalled at relative change {change:e}")]
    QuadratureFailure { change: f64 },
    #[error(transparent)]
    Bessel(#[from] BesselError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// c_s = 2^{1-s}/Γ(s), so that ψ(0) = 1.
pub fn c_s(s: f64) -> f64 {
    2f64.powf(1.0 - s) / gamma(s)
}

/// d_s = 2^{1-2s} Γ(1-s)/Γ(s).
pub fn d_s(s: f64) -> f64 {
    2f64.powf(1.0 - 2.0 * s) * gamma(1.0 - s) / gamma(s)
}

fn is_half(s: f64) -> bool {
    s == 0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtensionProfile {
    pub s: f64,
    pub lambda: f64,
    pub c_s: f64,
    pub d_s: f64,
}

impl ExtensionProfile {
    pub fn new(s: f64, lambda: f64) -> Result<Self, ExtError> {
        if !(s > 0.0 && s < 1.0) {
            return Err(ExtError::InvalidParameter(format!("s = {s} must lie in (0,1)")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(ExtError::InvalidParameter(format!("lambda = {lambda} must be positive")));
        }
        Ok(Self { s, lambda, c_s: c_s(s), d_s: d_s(s) })
    }

    pub fn alpha(&self) -> f64 {
        1.0 - 2.0 * self.s
    }

    pub fn psi(&self, y: f64) -> Result<f64, ExtError> {
        check_y(y)?;
        if y == 0.0 {
            return Ok(1.0);
        }
        let z = self.lambda.sqrt() * y;
        Ok(scaled_derivative(self.s, 0, z)? * (-z).exp())
    }

    /// dψ/dy = -√λ c_s z^s K_{1-s}(z).
    pub fn psi_prime(&self, y: f64) -> Result<f64, ExtError> {
        self.psi_derivative(1, y)
    }

    /// d^ℓψ/dy^ℓ = λ^{ℓ/2} ψ^{(ℓ)}(z).
    pub fn psi_derivative(&self, ell: usize, y: f64) -> Result<f64, ExtError> {
        check_y(y)?;
        if ell == 0 {
            return self.psi(y);
        }
        let rl = self.lambda.sqrt();
        if y == 0.0 {
            if is_half(self.s) {
                return Ok(rl.powi(ell as i32) * if ell % 2 == 0 { 1.0 } else { -1.0 });
            }
            // ψ = 1 - a z^{2s} + O(z²) with a > 0, so ψ^{(ℓ)} ~ -a (2s)_ℓ z^{2s-ℓ}
            if 2.0 * self.s > ell as f64 {
                return Ok(0.0);
            }
            let falling = (0..ell).map(|i| 2.0 * self.s - i as f64).product::<f64>();
            return Ok(f64::INFINITY.copysign(-falling));
        }
        let z = rl * y;
        Ok(rl.powi(ell as i32) * scaled_derivative(self.s, ell, z)? * (-z).exp())
    }

    /// lim_{y↓0} y^α ψ'(y) / (d_s λ^s), by Richardson extrapolation on y_j = 2^{-j}/√λ.
    pub fn conormal_limit(&self) -> Result<f64, ExtError> {
        let s = self.s;
        let alpha = self.alpha();
        let scale = self.d_s * self.lambda.powf(s);
        let rl = self.lambda.sqrt();
        let levels = 12;
        let mut samples = Vec::with_capacity(levels);
        for j in 0..levels {
            let y = 2f64.powi(-(j as i32) - 2) / rl;
            samples.push(y.powf(alpha) * self.psi_prime(y)? / scale);
        }
        // A(y) = A0 + Σ a_i y^{p_i}, p_i from {2-2s, 2, 4-2s, 4, ...}
        let mut exps: Vec<f64> = (0..levels).flat_map(|i| [2.0 - 2.0 * s + 2.0 * i as f64, 2.0 + 2.0 * i as f64]).collect();
        exps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        exps.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let mut row = samples.clone();
        let mut diag = vec![row[0]];
        for (i, p) in exps.iter().take(levels - 1).enumerate() {
            let f = 2f64.powf(*p);
            let next: Vec<f64> = (1..row.len()).map(|j| (f * row[j] - row[j - 1]) / (f - 1.0)).collect();
            row = next;
            diag.push(*row.last().unwrap());
            if i >= 6 {
                break;
            }
        }
        let n = diag.len();
        let change = (diag[n - 1] - diag[n - 2]).abs();
        let prev = (diag[n - 2] - diag[n - 3]).abs();
        if !(change <= 1e-8 || change < prev) || !diag[n - 1].is_finite() {
            return Err(ExtError::ExtrapolationDivergence { change });
        }
        Ok(diag[n - 1])
    }

    /// ∫_0^∞ y^α (λψ² + ψ'²) dy.
    pub fn mode_energy(&self) -> Result<f64, ExtError> {
        let a = self.alpha();
        let i0 = weighted_profile_integral(self.s, 0, a, 0.0)?;
        let i1 = weighted_profile_integral(self.s, 1, a, 0.0)?;
        Ok(self.lambda.powf(self.s) * (i0 + i1))
    }
}

fn check_y(y: f64) -> Result<(), ExtError> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(ExtError::InvalidParameter(format!("y = {y} must be finite and nonnegative")));
    }
    Ok(())
}

/// Terms (coef, m, j) of ψ^{(ℓ)}/c_s = Σ coef z^m f_{s-j}(z).
pub fn derivative_terms(ell: usize) -> Vec<(f64, i32, usize)> {
    let mut cur: BTreeMap<(i32, usize), f64> = BTreeMap::new();
    cur.insert((0, 0), 1.0);
    for _ in 0..ell {
        let mut next: BTreeMap<(i32, usize), f64> = BTreeMap::new();
        for (&(m, j), &c) in &cur {
            if m != 0 {
                *next.entry((m - 1, j)).or_insert(0.0) += c * m as f64;
            }
            *next.entry((m + 1, j + 1)).or_insert(0.0) -= c;
        }
        next.retain(|_, c| *c != 0.0);
        cur = next;
    }
    cur.into_iter().map(|((m, j), c)| (c, m, j)).collect()
}

/// e^z ψ^{(ℓ)}(z) in the scaled variable z = √λ y.
pub fn scaled_derivative(s: f64, ell: usize, z: f64) -> Result<f64, ExtError> {
    if is_half(s) {
        return Ok(if ell % 2 == 0 { 1.0 } else { -1.0 });
    }
    let terms = derivative_terms(ell);
    let jmax = terms.iter().map(|t| t.2).max().unwrap_or(0);
    let ks = k_shifted_sequence_scaled(s, jmax, z)?;
    let mut acc = 0.0;
    for (c, m, j) in terms {
        acc += c * z.powf(m as f64 + s - j as f64) * ks[j];
    }
    Ok(c_s(s) * acc)
}

/// ∫_0^∞ z^p e^{θ' z} |ψ^{(ℓ)}(z)|² dz.
pub fn weighted_profile_integral(s: f64, ell: usize, p: f64, theta_p: f64) -> Result<f64, ExtError> {
    if !(theta_p >= 0.0 && theta_p <= 2.0 * THETA_FRACTION) {
        return Err(ExtError::WeightOutOfRange { theta: theta_p, limit: 2.0 * THETA_FRACTION });
    }
    let e0 = if ell == 0 || is_half(s) { p } else { p - 2.0 * ell as f64 + 4.0 * s };
    if e0 <= -1.0 {
        return Err(ExtError::NonIntegrable { exponent: e0 });
    }
    let decay = theta_p - 2.0;
    let half_gap = 0.5 * (p - e0);
    // q(z) = integrand / z^{e0}, computed without forming z^{-…} products
    let q = |z: f64| -> Result<f64, ExtError> {
        let h = z.powf(half_gap) * scaled_derivative(s, ell, z)?;
        Ok((decay * z).exp() * h * h)
    };
    let mut parts: Vec<f64> = Vec::with_capacity(INNER_PANELS as usize + 2);

    let gl = gauss_legendre(GL_NODES);
    for k in 0..INNER_PANELS {
        let b = 2f64.powi(-k);
        let a = 0.5 * b;
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = 0.0;
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let z = c + r * x;
            acc += w * z.powf(e0) * q(z)?;
        }
        parts.push(acc * r);
    }
    let a_in = 2f64.powi(-INNER_PANELS);
    let gj = gauss_jacobi(GL_NODES, 0.0, e0);
    let mut acc = 0.0;
    for (x, w) in gj.nodes.iter().zip(&gj.weights) {
        acc += w * q(0.5 * a_in * (1.0 + x))?;
    }
    parts.push(acc * (0.5 * a_in).powf(e0 + 1.0));

    parts.push(tail_integral(&|z| Ok(z.powf(e0) * q(z)?), p, -decay)?);
    parts.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    Ok(pairwise_sum(&parts))
}

/// ∫_1^∞ F via z = 1 + L w/(1-w), composite Gauss–Legendre with doubling panels.
fn tail_integral(f: &dyn Fn(f64) -> Result<f64, ExtError>, p: f64, rate: f64) -> Result<f64, ExtError> {
    let l = ((p.max(0.0) + 1.0) / rate).max(1.0);
    let gl = gauss_legendre(GL_NODES);
    let eval = |panels: usize| -> Result<f64, ExtError> {
        let h = 1.0 / panels as f64;
        let mut per = Vec::with_capacity(panels);
        for i in 0..panels {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
            let mut acc = 0.0;
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                let wv = c + r * x;
                let om = 1.0 - wv;
                let z = 1.0 + l * wv / om;
                if rate * z > 745.0 {
                    continue;
                }
                acc += w * f(z)? * l / (om * om);
            }
            per.push(acc * r);
        }
        Ok(pairwise_sum(&per))
    };
    let mut panels = 8;
    let mut prev = eval(panels)?;
    let mut change = f64::INFINITY;
    while panels < 4096 {
        panels *= 2;
        let cur = eval(panels)?;
        change = (cur - prev).abs() / cur.abs().max(f64::MIN_POSITIVE);
        prev = cur;
        if change < TAIL_STALL {
            return Ok(cur);
        }
    }
    if change < 1e-9 {
        Ok(prev)
    } else {
        Err(ExtError::QuadratureFailure { change })
    }
}

fn theta_ratio(theta: f64, lambda: f64) -> Result<f64, ExtError> {
    if !(lambda > 0.0) {
        return Err(ExtError::InvalidParameter(format!("lambda = {lambda} must be positive")));
    }
    let limit = 2.0 * THETA_FRACTION * lambda.sqrt();
    if !(theta >= 0.0 && theta <= limit) {
        return Err(ExtError::WeightOutOfRange { theta, limit });
    }
    Ok(theta / lambda.sqrt())
}

/// Φ(δ, θ, λ) = ∫_0^∞ z^δ e^{θz/√λ} ψ(z)² dz.
pub fn phi_integral(s: f64, delta: f64, theta: f64, lambda: f64) -> Result<f64, ExtError> {
    if delta <= -1.0 {
        return Err(ExtError::NonIntegrable { exponent: delta });
    }
    weighted_profile_integral(s, 0, delta, theta_ratio(theta, lambda)?)
}

/// Ψ_ℓ(β, θ, λ) = ∫_0^∞ z^{β+2ℓ} e^{θz/√λ} |ψ^{(ℓ)}(z)|² dz.
pub fn psi_integral(s: f64, ell: usize, beta: f64, theta: f64, lambda: f64) -> Result<f64, ExtError> {
    if beta <= -1.0 - 4.0 * s {
        return Err(ExtError::NonIntegrable { exponent: beta + 4.0 * s });
    }
    weighted_profile_integral(s, ell, beta + 2.0 * ell as f64, theta_ratio(theta, lambda)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorialFit {
    pub kappa_hat: f64,
    pub exceeds_one: bool,
    /// ℓ at which the fit is attained
    pub attained_at: usize,
    /// Ψ_ℓ for ℓ = 0..=ell_max
    pub psi: Vec<f64>,
    /// Ψ_ℓ/(κ̂^{2ℓ}(ℓ!)²) for ℓ = 0..=ell_max
    pub normalized: Vec<f64>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// κ̂ = max_{1≤ℓ≤L} (Ψ_ℓ/(ℓ!)²)^{1/(2ℓ)}.
pub fn factorial_growth_fit(s: f64, beta: f64, theta: f64, lambda: f64, ell_max: usize) -> Result<FactorialFit, ExtError> {
    if ell_max == 0 || ell_max > 8 {
        return Err(ExtError::InvalidParameter(format!("ell_max = {ell_max} must lie in 1..=8")));
    }
    let psi: Result<Vec<f64>, ExtError> =
        (0..=ell_max).into_par_iter().map(|l| psi_integral(s, l, beta, theta, lambda)).collect();
    let psi = psi?;
    Ok(fit_factorial(psi))
}

fn fit_factorial(psi: Vec<f64>) -> FactorialFit {
    let mut kappa: f64 = 0.0;
    let mut at = 1;
    for (l, v) in psi.iter().enumerate().skip(1) {
        let k = (v / factorial(l).powi(2)).powf(1.0 / (2.0 * l as f64));
        if k > kappa {
            kappa = k;
            at = l;
        }
    }
    let normalized = psi
        .iter()
        .enumerate()
        .map(|(l, v)| v / (kappa.powi(2 * l as i32) * factorial(l).powi(2)))
        .collect();
    FactorialFit { kappa_hat: kappa, exceeds_one: kappa > 1.0, attained_at: at, psi, normalized }
}

/// Weighted Poincaré constant for a single mode: ‖𝒰‖_{L²(y^α)} = C ‖∇𝒰‖_{L²(y^α)}.
pub fn poincare_constant(s: f64, lambda: f64) -> Result<f64, ExtError> {
    let p = ExtensionProfile::new(s, lambda)?;
    let phi = phi_integral(s, p.alpha(), 0.0, lambda)?;
    // ‖𝒰‖² = λ^{s-1} Φ(α,0) u², ‖∇𝒰‖² = mode_energy u²
    Ok((lambda.powf(s - 1.0) * phi / p.mode_energy()?).sqrt())
}

/// (‖u‖²_{ℍ^s}, (1/d_s) Σ u_k² mode_energy_k); the two agree for every u.
pub fn trace_witness(u: &ModeExpansion, s: f64) -> Result<(f64, f64), ExtError> {
    let lam = u.domain.eigenvalues();
    let terms: Result<Vec<f64>, ExtError> = u
        .coeffs
        .par_iter()
        .zip(lam.par_iter())
        .map(|(c, l)| {
            if *c == 0.0 {
                return Ok(0.0);
            }
            let p = ExtensionProfile::new(s, *l)?;
            Ok(c * c * p.mode_energy()? / p.d_s)
        })
        .collect();
    Ok((u.hs_norm(s).powi(2), pairwise_sum(&terms?)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightSpec {
    pub beta: f64,
    pub theta: f64,
}

#[derive(Debug, Clone)]
pub struct ExtensionField {
    pub problem: Arc<FracWaveProblem>,
    pub profiles: Vec<ExtensionProfile>,
    pub weight: WeightSpec,
}

impl ExtensionField {
    pub fn new(problem: FracWaveProblem, weight: WeightSpec) -> Result<Self, ExtError> {
        let lim = 2.0 * THETA_FRACTION * problem.domain.lambda_1().sqrt();
        if !(weight.theta >= 0.0 && weight.theta <= lim) {
            return Err(ExtError::WeightOutOfRange { theta: weight.theta, limit: lim });
        }
        let profiles = problem
            .domain
            .eigenvalues()
            .iter()
            .map(|l| ExtensionProfile::new(problem.s, *l))
            .collect::<Result<_, _>>()?;
        Ok(Self { problem: Arc::new(problem), profiles, weight })
    }

    pub fn s(&self) -> f64 {
        self.problem.s
    }
}

/// 𝒰(x', y, t) = Σ_k u_k(t) φ_k(x') ψ_k(y).
pub fn evaluate_extension(field: &ExtensionField, x: &[f64], y: f64, t: f64) -> Result<f64, ExtError> {
    let prob = &field.problem;
    if !(0.0..=prob.t_final * (1.0 + 1e-12)).contains(&t) {
        return Err(SolveError::TimeOutOfRange { t }.into());
    }
    let terms: Result<Vec<f64>, ExtError> = (1..=prob.n_modes())
        .into_par_iter()
        .map(|k| {
            let m = solve_mode(prob, k)?;
            if m.g == 0.0 && m.h == 0.0 && m.forcing.is_none() {
                return Ok(0.0);
            }
            let phi = prob.domain.phi(k, x).map_err(SolveError::from)?;
            Ok(m.u(t)? * phi * field.profiles[k - 1].psi(y)?)
        })
        .collect();
    Ok(pairwise_sum(&terms?))
}

#[derive(Debug, Clone, Serialize)]
pub struct PointwiseBounds {
    pub kappa_hat: f64,
    /// per ℓ = 0..=ell_max: ‖∂_y^{ℓ+1}𝒰(t)‖²_{L²(ω_{α+2ℓ-2σ,θ})}
    pub norms: Vec<f64>,
    /// norms / ((ℓ+1)!² κ̂^{2(ℓ+1)} ‖u(t)‖²_{ℍ^{σ+s}})
    pub ratios: Vec<f64>,
}

/// Pointwise-in-time weighted norms of ∂_y^{ℓ+1}𝒰 against ‖u(t)‖_{ℍ^{σ+s}}.
pub fn pointwise_bound_ratio(field: &ExtensionField, sigma: f64, ell_max: usize, t: f64) -> Result<PointwiseBounds, ExtError> {
    let s = field.s();
    if !(sigma >= 0.0 && sigma < s) {
        return Err(ExtError::InvalidParameter(format!("sigma = {sigma} must lie in [0, s)")));
    }
    if ell_max + 1 > 8 {
        return Err(ExtError::InvalidParameter(format!("ell_max = {ell_max} too large")));
    }
    let prob = &field.problem;
    let u: Vec<f64> = crate::wavesolve::mode_coefficients(prob, t)?;
    let beta = -1.0 - 2.0 * s - 2.0 * sigma;
    let theta = field.weight.theta;
    let lam = prob.domain.eigenvalues();
    let fit = factorial_growth_fit(s, beta, theta, lam[0], ell_max + 1)?;
    let hs: f64 = u.iter().zip(lam).map(|(c, l)| l.powf(sigma + s) * c * c).sum();
    let mut norms = Vec::with_capacity(ell_max + 1);
    let mut ratios = Vec::with_capacity(ell_max + 1);
    for ell in 0..=ell_max {
        let n = ell + 1;
        let per: Result<Vec<f64>, ExtError> = u
            .par_iter()
            .zip(lam.par_iter())
            .map(|(c, l)| {
                if *c == 0.0 {
                    return Ok(0.0);
                }
                Ok(c * c * l.powf(sigma + s) * psi_integral(s, n, beta, theta, *l)?)
            })
            .collect();
        let norm = pairwise_sum(&per?);
        let denom = factorial(n).powi(2) * fit.kappa_hat.powi(2 * n as i32) * hs;
        norms.push(norm);
        ratios.push(if denom > 0.0 { norm / denom } else { 0.0 });
    }
    Ok(PointwiseBounds { kappa_hat: fit.kappa_hat, norms, ratios })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_tables() {
        // ψ'/c_s = -z f_{s-1}; ψ''/c_s = -f_{s-1} + z² f_{s-2}
        assert_eq!(derivative_terms(1), vec![(-1.0, 1, 1)]);
        let t2 = derivative_terms(2);
        assert!(t2.contains(&(-1.0, 0, 1)) && t2.contains(&(1.0, 2, 2)) && t2.len() == 2);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = ExtensionProfile::new(0.3, 2.0).unwrap();
        let y = 0.7;
        let h = 1e-5;
        for ell in 0..5 {
            let fd = (p.psi_derivative(ell, y + h).unwrap() - p.psi_derivative(ell, y - h).unwrap()) / (2.0 * h);
            let an = p.psi_derivative(ell + 1, y).unwrap();
            assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "ell={ell} {fd} {an}");
        }
    }

    #[test]
    fn half_profile_closed_form() {
        let p = ExtensionProfile::new(0.5, 4.0).unwrap();
        assert!((p.psi(1.0).unwrap() - (-2f64).exp()).abs() < 1e-15);
        let q = ExtensionProfile::new(0.5 + 1e-4, 4.0).unwrap();
        for &y in &[0.01f64, 0.5, 3.0] {
            assert!((q.psi(y).unwrap() - (-2.0 * y).exp()).abs() < 1e-3);
        }
    }

    #[test]
    fn psi_tends_to_one_at_origin() {
        for &s in &[0.2, 0.5, 0.8] {
            let p = ExtensionProfile::new(s, 3.0).unwrap();
            assert_eq!(p.psi(0.0).unwrap(), 1.0);
            let z: f64 = 3f64.sqrt() * 1e-9;
            assert!((p.psi(1e-9).unwrap() - 1.0).abs() < 5.0 * z.powf(2.0 * s));
            let mut prev = 1.0;
            for i in 1..60 {
                let v = p.psi(1e-6 * 1.3f64.powi(i)).unwrap();
                assert!(v < prev);
                prev = v;
            }
            assert!(p.psi(50.0 / 3f64.sqrt()).unwrap() < 1e-15);
        }
    }

    #[test]
    fn half_integrals_closed_form() {
        assert!((phi_integral(0.5, 0.0, 0.0, 7.0).unwrap() - 0.5).abs() < 1e-13);
        assert!((psi_integral(0.5, 1, 0.0, 0.0, 7.0).unwrap() - 0.25).abs() < 1e-13);
        let th: f64 = 1.5;
        for ell in 0..=8usize {
            let exact = gamma(2.0 * ell as f64 + 1.3) / (2.0 - th).powf(2.0 * ell as f64 + 1.3);
            let v = psi_integral(0.5, ell, 0.3, th, 1.0).unwrap();
            assert!((v - exact).abs() < 1e-10 * exact, "ell={ell} {v} {exact}");
        }
    }

    #[test]
    fn energy_equals_d_s_lambda_s() {
        for &s in &[0.3, 0.7] {
            let p = ExtensionProfile::new(s, 16.0).unwrap();
            let e = p.mode_energy().unwrap();
            let exact = p.d_s * 16f64.powf(s);
            assert!((e - exact).abs() < 1e-9 * exact, "s={s} {e} {exact}");
        }
    }

    #[test]
    fn conormal_limit_is_minus_one() {
        for &(s, l) in &[(0.25, 1.0), (0.5, 1.0), (0.75, 9.0)] {
            let c = ExtensionProfile::new(s, l).unwrap().conormal_limit().unwrap();
            assert!((c + 1.0).abs() < 1e-6, "s={s}: {c}");
        }
    }

    #[test]
    fn rejects_bad_exponents_and_weights() {
        assert!(matches!(phi_integral(0.3, -1.0, 0.0, 1.0), Err(ExtError::NonIntegrable { .. })));
        assert!(matches!(psi_integral(0.3, 2, -2.2, 0.0, 1.0), Err(ExtError::NonIntegrable { .. })));
        assert!(matches!(phi_integral(0.3, 0.0, 1.95, 1.0), Err(ExtError::WeightOutOfRange { .. })));
    }

    #[test]
    fn factorial_fit_attained() {
        let fit = factorial_growth_fit(0.5, 0.0, 1.0, 1.0, 8).unwrap();
        // θ/√λ = 1: Ψ_ℓ = (2ℓ)!, κ̂ = C(16,8)^{1/16}
        assert!((fit.kappa_hat - 12870f64.powf(1.0 / 16.0)).abs() < 1e-10);
        assert!(fit.exceeds_one && fit.attained_at == 8);
        assert!(fit.normalized.iter().skip(1).all(|r| *r <= 1.0 + 1e-12));
    }
}
