//! Regularity experiments: blow-up rates of time derivatives at t = 0,
//! weighted time norms of ∂_t³u, solution-operator bounds and
//! factorial-growth fits for y-derivatives of the extension.
//!
//! Every norm is assembled from the analytic mode derivatives; nothing here
//! differentiates sampled fields.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::discretization::linear_fit;
use crate::extension::{psi_integral, ExtError, ExtensionField};
use crate::quadrature::{composite_gl, gauss_jacobi, gauss_legendre};
use crate::spectral::{ModeExpansion, SpectralDomain};
use crate::special::pairwise_sum;
use crate::wavesolve::{solve_mode, Forcing, FracWaveProblem, ModeTrajectory, SolveError};

/// Default exponent in log(1+z) ≲ z^μ.
pub const DEFAULT_MU: f64 = 0.05;
const BLOWUP_POINTS: usize = 16;
const GRADED_INTERVALS: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegError {
    #[error("degenerate fit (r² = {r2})")]
    DegenerateFit { r2: f64 },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Ext(#[from] ExtError),
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorBoundRecord {
    /// sup_t ‖∂_t^q G_γ(t)w‖_{ℍ^r} / (t^{γ-q} ‖w‖_{ℍ^{r+2s}})
    pub g_ratio: f64,
    /// sup_t ‖∂_t^{q+1} H_γ(t)w‖_{ℍ^r} / (t^{γ/2-q} ‖w‖_{ℍ^{r+s}})
    pub h_ratio: f64,
    pub g_series: Vec<f64>,
    pub h_series: Vec<f64>,
}

/// Grid-wise ratios for G_γ(t) = E_{γ,1}(-t^γ L^s) and H_γ(t) = t E_{γ,2}(-t^γ L^s).
pub fn solution_operator_bound_check(
    s: f64,
    gamma_: f64,
    r: f64,
    q: u32,
    t_grid: &[f64],
    w: &ModeExpansion,
) -> Result<OperatorBoundRecord, RegError> {
    if !(1..=3).contains(&q) {
        return Err(RegError::OutOfRange(format!("q = {q} must be 1, 2 or 3")));
    }
    if !(r >= -s && r <= s) {
        return Err(RegError::OutOfRange(format!("r = {r} must lie in [-s, s]")));
    }
    if !(gamma_ > 1.0 && gamma_ < 2.0) {
        return Err(RegError::OutOfRange(format!("gamma = {gamma_} must lie in (1,2)")));
    }
    let lam = w.domain.eigenvalues();
    let wg = w.hs_norm(r + 2.0 * s);
    let wh = w.hs_norm(r + s);
    let rows: Result<Vec<(f64, f64)>, RegError> = t_grid
        .par_iter()
        .map(|&t| {
            let mut gn = 0.0;
            let mut hn = 0.0;
            for (c, l) in w.coeffs.iter().zip(lam) {
                if *c == 0.0 {
                    continue;
                }
                let rate = l.powf(s);
                let gm = ModeTrajectory::probe(gamma_, rate, 1.0, 0.0, None)?;
                let hm = ModeTrajectory::probe(gamma_, rate, 0.0, 1.0, None)?;
                let dg = gm.derivative(q, t)? * c;
                let dh = if q + 1 <= 3 { hm.derivative(q + 1, t)? } else { h_fourth(&hm, t)? } * c;
                gn += l.powf(r) * dg * dg;
                hn += l.powf(r) * dh * dh;
            }
            let g = if wg > 0.0 { gn.sqrt() / (t.powf(gamma_ - q as f64) * wg) } else { 0.0 };
            let h = if wh > 0.0 { hn.sqrt() / (t.powf(0.5 * gamma_ - q as f64) * wh) } else { 0.0 };
            Ok((g, h))
        })
        .collect();
    let rows = rows?;
    let g_series: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let h_series: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(OperatorBoundRecord {
        g_ratio: g_series.iter().cloned().fold(0.0, f64::max),
        h_ratio: h_series.iter().cloned().fold(0.0, f64::max),
        g_series,
        h_series,
    })
}

/// ∂_t⁴ [t E_{γ,2}(-ρ t^γ)] = -ρ t^{γ-3} E_{γ,γ-2}(-ρ t^γ).
fn h_fourth(m: &ModeTrajectory, t: f64) -> Result<f64, SolveError> {
    Ok(-m.rate * t.powf(m.gamma - 3.0) * m.kernel(m.gamma - 2.0, t)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupFit {
    pub exponent_hat: f64,
    pub r2: f64,
    pub t_range: (f64, f64),
}

/// Slope of log ‖∂_t^q u(t)‖_{ℍ^r} against log t on 16 log-spaced t ∈ [1e-6, 1e-2].
pub fn fit_blowup_exponent(prob: &FracWaveProblem, q: u32, r: f64) -> Result<BlowupFit, RegError> {
    fit_blowup_exponent_on(prob, q, r, (1e-6, 1e-2))
}

pub fn fit_blowup_exponent_on(prob: &FracWaveProblem, q: u32, r: f64, range: (f64, f64)) -> Result<BlowupFit, RegError> {
    if !(q == 2 || q == 3) {
        return Err(RegError::OutOfRange(format!("q = {q} must be 2 or 3")));
    }
    let (a, b) = range;
    let modes: Vec<ModeTrajectory> = (1..=prob.n_modes())
        .map(|k| solve_mode(prob, k))
        .collect::<Result<_, _>>()?;
    let lam = prob.domain.eigenvalues();
    let pts: Result<Vec<(f64, f64)>, RegError> = (0..BLOWUP_POINTS)
        .into_par_iter()
        .map(|i| {
            let t = a * (b / a).powf(i as f64 / (BLOWUP_POINTS - 1) as f64);
            let mut terms = Vec::with_capacity(modes.len());
            for (m, l) in modes.iter().zip(lam) {
                if m.g == 0.0 && m.h == 0.0 && m.forcing.is_none() {
                    continue;
                }
                let d = m.derivative(q, t)?;
                terms.push(l.powf(r) * d * d);
            }
            Ok((t.ln(), 0.5 * pairwise_sum(&terms).ln()))
        })
        .collect();
    let (slope, r2) = linear_fit(&pts?);
    if !(r2 >= 0.99) {
        return Err(RegError::DegenerateFit { r2 });
    }
    Ok(BlowupFit { exponent_hat: slope, r2, t_range: range })
}

/// Spectrum-only problem with λ_k^s = 2^{k-1}, k = 1..=n, and h_k = λ_k^{-s/2}:
/// h lies in L² with ‖h‖_{ℍ^s} only logarithmically divergent, which is the
/// data for which ∂_t³u blows up at the rate t^{γ/2-2}.
pub fn critical_velocity_problem(s: f64, gamma_: f64, n: usize) -> Result<FracWaveProblem, RegError> {
    let eigs: Vec<f64> = (0..n).map(|k| 2f64.powi(k as i32).powf(1.0 / s)).collect();
    let dom = Arc::new(SpectralDomain::spectrum_only(eigs).map_err(SolveError::from)?);
    let h: Vec<f64> = (0..n).map(|k| 2f64.powi(k as i32).powf(-0.5)).collect();
    let h = ModeExpansion::new(dom.clone(), h).map_err(SolveError::from)?;
    Ok(FracWaveProblem::new(dom.clone(), s, gamma_, 1.0, ModeExpansion::zeros(dom.clone()), h, Forcing::zero(n))?)
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightedTimeNorm {
    /// ∫_0^T t^ρ ‖∂_t³u‖²_{ℍ^{-s}} dt, or +∞ when divergent
    pub value: f64,
    pub divergent: bool,
    /// leading power of the integrand at t = 0
    pub endpoint_exponent: f64,
    pub diagnosis: String,
}

/// Leading power p in ∂_t³u_k ~ t^p as t ↓ 0.
fn third_derivative_power(m: &ModeTrajectory) -> f64 {
    let (f0, df0) = match &m.forcing {
        Some(p) => (p.value(0.0), p.df.as_ref().map(|d| d(0.0)).unwrap_or(0.0)),
        None => (0.0, 0.0),
    };
    if m.g != 0.0 || f0 != 0.0 {
        m.gamma - 3.0
    } else if m.h != 0.0 || df0 != 0.0 {
        m.gamma - 2.0
    } else {
        m.gamma - 1.0
    }
}

/// ∫_0^T t^ρ (∂_t³u_k)² dt on graded nodes t_j = T (j/N)^q; None when the
/// endpoint power is ≤ -1.
fn mode_weighted_integral(m: &ModeTrajectory, rho: f64, t_final: f64) -> Result<(Option<f64>, f64), RegError> {
    let e = rho + 2.0 * third_derivative_power(m);
    if e <= -1.0 {
        return Ok((None, e));
    }
    let grade = if rho + 2.0 * m.gamma - 5.0 > 0.0 { (3.0 / (rho + 2.0 * m.gamma - 5.0)).max(2.0) } else { 2.0 };
    let grade = grade.min(40.0);
    let n = GRADED_INTERVALS;
    let node = |j: usize| t_final * (j as f64 / n as f64).powf(grade);
    let gl = gauss_legendre(10);
    let mut parts = Vec::with_capacity(n);
    // first interval: Gauss–Jacobi against t^e
    let t1 = node(1);
    let gj = gauss_jacobi(10, 0.0, e);
    let mut acc = 0.0;
    for (x, w) in gj.nodes.iter().zip(&gj.weights) {
        let t = 0.5 * t1 * (1.0 + x);
        let d = m.d3u(t)?;
        acc += w * t.powf(rho - e) * d * d;
    }
    parts.push(acc * (0.5 * t1).powf(e + 1.0));
    for j in 1..n {
        let (a, b) = (node(j), node(j + 1));
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = 0.0;
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let t = c + r * x;
            let d = m.d3u(t)?;
            acc += w * t.powf(rho) * d * d;
        }
        parts.push(acc * r);
    }
    Ok((Some(pairwise_sum(&parts)), e))
}

pub fn weighted_time_norm(prob: &FracWaveProblem, rho: f64) -> Result<WeightedTimeNorm, RegError> {
    let per: Result<Vec<(Option<f64>, f64)>, RegError> = (1..=prob.n_modes())
        .into_par_iter()
        .map(|k| {
            let m = solve_mode(prob, k)?;
            if m.g == 0.0 && m.h == 0.0 && m.forcing.is_none() {
                return Ok((Some(0.0), f64::INFINITY));
            }
            let (v, e) = mode_weighted_integral(&m, rho, prob.t_final)?;
            Ok((v.map(|v| v / prob.domain.lambda(k).powf(prob.s)), e))
        })
        .collect();
    let per = per?;
    let e = per.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if per.iter().any(|p| p.0.is_none()) {
        return Ok(WeightedTimeNorm {
            value: f64::INFINITY,
            divergent: true,
            endpoint_exponent: e,
            diagnosis: format!("integrand ~ t^{e:.4} at t = 0; not integrable for exponent ≤ -1"),
        });
    }
    let vals: Vec<f64> = per.iter().map(|p| p.0.unwrap()).collect();
    Ok(WeightedTimeNorm {
        value: pairwise_sum(&vals),
        divergent: false,
        endpoint_exponent: e,
        diagnosis: if e.is_finite() { format!("integrand ~ t^{e:.4} at t = 0; integrable") } else { "zero data".into() },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DataNormBundle {
    pub g_norm_s: f64,
    pub g_norm_2s: f64,
    pub h_norm_0: f64,
    /// ‖f‖_{H²(0,T;ℍ^{-s})}
    pub f_norm_h2_dual: f64,
}

impl DataNormBundle {
    pub fn of(prob: &FracWaveProblem) -> Self {
        let s = prob.s;
        let tf = prob.t_final;
        let f2: f64 = (1..=prob.n_modes())
            .map(|k| match prob.f.mode(k) {
                Some(p) => {
                    let w = prob.domain.lambda(k).powf(-s);
                    let df = p.df.clone();
                    let d2f = p.d2f.clone();
                    w * composite_gl(
                        |t| {
                            p.value(t).powi(2)
                                + df.as_ref().map(|d| d(t).powi(2)).unwrap_or(0.0)
                                + d2f.as_ref().map(|d| d(t).powi(2)).unwrap_or(0.0)
                        },
                        0.0,
                        tf,
                        32,
                        16,
                    )
                }
                None => 0.0,
            })
            .sum();
        Self { g_norm_s: prob.g.hs_norm(s), g_norm_2s: prob.g.hs_norm(2.0 * s), h_norm_0: prob.h.hs_norm(0.0), f_norm_h2_dual: f2.sqrt() }
    }

    /// 𝒜(g,h,f) = ‖g‖_{ℍ^s} + ‖h‖ + ‖f‖_{H²(0,T;ℍ^{-s})}
    pub fn a_norm(&self) -> f64 {
        self.g_norm_s + self.h_norm_0 + self.f_norm_h2_dual
    }
}

/// Which y-derivative family is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum YNormKind {
    /// ∂_y^{ℓ+1}𝒰 in L²(ω_{α+2ℓ-2σ,θ})
    Plain,
    /// ∇_{x'}∂_y^{ℓ+1}𝒰 in L²(ω_{α+2(ℓ+1)-2ν,θ})
    Gradient,
    /// L_{x'}∂_y^{ℓ+1}𝒰 in L²(ω_{α+2(ℓ+1)-2ν,θ})
    Operator,
}

impl YNormKind {
    pub const ALL: [YNormKind; 3] = [YNormKind::Plain, YNormKind::Gradient, YNormKind::Operator];

    /// (β for Ψ_{ℓ+1}, ℍ-index r such that the mode weight is λ^r)
    fn params(&self, s: f64, sigma: f64, nu: f64) -> (f64, f64) {
        let alpha = 1.0 - 2.0 * s;
        match self {
            YNormKind::Plain => (alpha - 2.0 * sigma - 2.0, sigma + s),
            YNormKind::Gradient => (alpha - 2.0 * nu, nu + s),
            YNormKind::Operator => (alpha - 2.0 * nu, 1.0 + nu + s),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorialSequence {
    pub kind: YNormKind,
    pub kappa_hat: f64,
    /// per ℓ = 0..=ell_max
    pub norms: Vec<f64>,
    pub rhs: f64,
    pub normalized: Vec<f64>,
}

fn fit_sequence(kind: YNormKind, norms: Vec<f64>, rhs: f64) -> FactorialSequence {
    let mut kappa: f64 = 0.0;
    for (l, v) in norms.iter().enumerate() {
        let n = l + 1;
        if rhs > 0.0 && *v > 0.0 {
            kappa = kappa.max((v / (factorial(n).powi(2) * rhs)).powf(1.0 / (2.0 * n as f64)));
        }
    }
    let normalized = norms
        .iter()
        .enumerate()
        .map(|(l, v)| {
            let n = l + 1;
            let d = kappa.powi(2 * n as i32) * factorial(n).powi(2) * rhs;
            if d > 0.0 { v / d } else { 0.0 }
        })
        .collect();
    FactorialSequence { kind, kappa_hat: kappa, norms, rhs, normalized }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceRegOptions {
    pub sigma: f64,
    pub nu: f64,
    pub ell_max: usize,
    pub mu: f64,
    pub t_window: (f64, f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceRegularity {
    /// one fitted sequence per derivative family
    pub sequences: Vec<FactorialSequence>,
}

impl SpaceRegularity {
    pub fn kappa_hat(&self) -> [f64; 3] {
        [self.sequences[0].kappa_hat, self.sequences[1].kappa_hat, self.sequences[2].kappa_hat]
    }

    pub fn max_normalized(&self) -> f64 {
        self.sequences.iter().flat_map(|s| s.normalized.iter().cloned()).fold(0.0, f64::max)
    }
}

fn check_sigma_nu(s: f64, sigma: f64, nu: f64) -> Result<(), RegError> {
    if !(sigma >= 0.0 && sigma < s) {
        return Err(RegError::OutOfRange(format!("sigma = {sigma} must lie in [0, s)")));
    }
    if !(nu >= 0.0 && nu < 1.0 + s) {
        return Err(RegError::OutOfRange(format!("nu = {nu} must lie in [0, 1+s)")));
    }
    Ok(())
}

/// ‖u_k‖²_{L²(a,b)}
fn mode_l2_sq(m: &ModeTrajectory, a: f64, b: f64) -> Result<f64, RegError> {
    let full = m.l2_time_norm_sq(b)?;
    if a <= 0.0 {
        return Ok(full);
    }
    Ok(full - m.l2_time_norm_sq(a)?)
}

/// Weighted y-derivative norms over a time window against the data norms
/// on the matching right-hand sides.
pub fn space_regularity_fit(field: &ExtensionField, opts: &SpaceRegOptions) -> Result<SpaceRegularity, RegError> {
    let prob = &field.problem;
    let s = prob.s;
    check_sigma_nu(s, opts.sigma, opts.nu)?;
    if opts.ell_max > 4 {
        return Err(RegError::OutOfRange(format!("ell_max = {} must be ≤ 4", opts.ell_max)));
    }
    let (a, b) = opts.t_window;
    if !(a >= 0.0 && b > a && b <= prob.t_final * (1.0 + 1e-12)) {
        return Err(RegError::OutOfRange(format!("t_window = ({a}, {b})")));
    }
    let lam = prob.domain.eigenvalues().to_vec();
    let u2: Result<Vec<f64>, RegError> = (1..=prob.n_modes())
        .into_par_iter()
        .map(|k| {
            let m = solve_mode(prob, k)?;
            if m.g == 0.0 && m.h == 0.0 && m.forcing.is_none() {
                return Ok(0.0);
            }
            mode_l2_sq(&m, a, b)
        })
        .collect();
    let u2 = u2?;
    let theta = field.weight.theta;
    let f_sq = |k: usize, r: f64| -> f64 {
        match prob.f.mode(k) {
            Some(p) => lam[k - 1].powf(r) * composite_gl(|t| p.value(t).powi(2), 0.0, prob.t_final, 32, 16),
            None => 0.0,
        }
    };
    let mut sequences = Vec::with_capacity(3);
    for kind in YNormKind::ALL {
        let (beta, r) = kind.params(s, opts.sigma, opts.nu);
        // data index: σ for the plain family, ν for the others, shifted by 1 for L_{x'}
        let base = r - s;
        let f_shift = if prob.gamma < 2.0 { -s + 2.0 * opts.mu * s } else { 0.0 };
        let rhs = prob.g.hs_norm(base + s).powi(2)
            + prob.h.hs_norm(base).powi(2)
            + (1..=prob.n_modes()).map(|k| f_sq(k, base + f_shift)).sum::<f64>();
        let norms: Result<Vec<f64>, RegError> = (0..=opts.ell_max)
            .map(|ell| {
                let per: Result<Vec<f64>, RegError> = u2
                    .par_iter()
                    .zip(lam.par_iter())
                    .map(|(w, l)| {
                        if *w == 0.0 {
                            return Ok(0.0);
                        }
                        Ok(l.powf(r) * psi_integral(s, ell + 1, beta, theta, *l)? * w)
                    })
                    .collect();
                Ok(pairwise_sum(&per?))
            })
            .collect();
        sequences.push(fit_sequence(kind, norms?, rhs));
    }
    Ok(SpaceRegularity { sequences })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceTimeRegularity {
    pub divergent: bool,
    pub time_norm: WeightedTimeNorm,
    /// ∫ t^ρ ‖∂_t³∂_y^{ℓ+1}𝒰‖²_{L²(ω_{α+2ℓ-2σ,θ})} dt for ℓ = 0..=ell_max (∞ when divergent)
    pub norms: Vec<f64>,
    /// ‖g‖²_{ℍ^{σ+3s}} + ‖h‖²_{ℍ^{σ+2s}} + ‖f‖²_{H²(0,T;ℍ^{σ+s})}
    pub rhs: f64,
    pub kappa_hat: f64,
    pub normalized: Vec<f64>,
}

pub fn space_time_regularity_check(
    field: &ExtensionField,
    sigma: f64,
    nu: f64,
    rho: f64,
    ell_max: usize,
) -> Result<SpaceTimeRegularity, RegError> {
    let prob = &field.problem;
    let s = prob.s;
    check_sigma_nu(s, sigma, nu)?;
    if ell_max > 4 {
        return Err(RegError::OutOfRange(format!("ell_max = {ell_max} must be ≤ 4")));
    }
    let time_norm = weighted_time_norm(prob, rho)?;
    let lam = prob.domain.eigenvalues().to_vec();
    let per: Result<Vec<Option<f64>>, RegError> = (1..=prob.n_modes())
        .into_par_iter()
        .map(|k| {
            let m = solve_mode(prob, k)?;
            if m.g == 0.0 && m.h == 0.0 && m.forcing.is_none() {
                return Ok(Some(0.0));
            }
            Ok(mode_weighted_integral(&m, rho, prob.t_final)?.0)
        })
        .collect();
    let per = per?;
    let tf = prob.t_final;
    let f_h2 = |k: usize, r: f64| -> f64 {
        match prob.f.mode(k) {
            Some(p) => {
                let df = p.df.clone();
                let d2f = p.d2f.clone();
                lam[k - 1].powf(r)
                    * composite_gl(
                        |t| {
                            p.value(t).powi(2)
                                + df.as_ref().map(|d| d(t).powi(2)).unwrap_or(0.0)
                                + d2f.as_ref().map(|d| d(t).powi(2)).unwrap_or(0.0)
                        },
                        0.0,
                        tf,
                        32,
                        16,
                    )
            }
            None => 0.0,
        }
    };
    let rhs = prob.g.hs_norm(sigma + 3.0 * s).powi(2)
        + prob.h.hs_norm(sigma + 2.0 * s).powi(2)
        + (1..=prob.n_modes()).map(|k| f_h2(k, sigma + s)).sum::<f64>();
    let divergent = per.iter().any(|p| p.is_none());
    let (beta, r) = YNormKind::Plain.params(s, sigma, nu);
    let theta = field.weight.theta;
    let mut norms = Vec::with_capacity(ell_max + 1);
    for ell in 0..=ell_max {
        if divergent {
            norms.push(f64::INFINITY);
            continue;
        }
        let terms: Result<Vec<f64>, RegError> = per
            .par_iter()
            .zip(lam.par_iter())
            .map(|(w, l)| {
                let w = w.unwrap();
                if w == 0.0 {
                    return Ok(0.0);
                }
                Ok(l.powf(r) * psi_integral(s, ell + 1, beta, theta, *l)? * w)
            })
            .collect();
        norms.push(pairwise_sum(&terms?));
    }
    let fit = if divergent {
        FactorialSequence { kind: YNormKind::Plain, kappa_hat: f64::INFINITY, norms: norms.clone(), rhs, normalized: vec![f64::INFINITY; ell_max + 1] }
    } else {
        fit_sequence(YNormKind::Plain, norms.clone(), rhs)
    };
    Ok(SpaceTimeRegularity { divergent, time_norm, norms, rhs, kappa_hat: fit.kappa_hat, normalized: fit.normalized })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::WeightSpec;
    use crate::spectral::{make_domain, DomainKind};
    use std::f64::consts::PI;

    fn single(gamma_: f64, g: bool) -> FracWaveProblem {
        let d = Arc::new(make_domain(DomainKind::Interval { length: PI }, 1).unwrap());
        let (gv, hv) = if g { (ModeExpansion::unit(d.clone(), 1), ModeExpansion::zeros(d.clone())) } else { (ModeExpansion::zeros(d.clone()), ModeExpansion::unit(d.clone(), 1)) };
        FracWaveProblem::new(d, 0.5, gamma_, 1.0, gv, hv, Forcing::zero(1)).unwrap()
    }

    #[test]
    fn blowup_rates_single_mode() {
        let p = single(1.5, true);
        assert!((fit_blowup_exponent(&p, 2, 0.0).unwrap().exponent_hat + 0.5).abs() < 0.05);
        assert!((fit_blowup_exponent(&p, 3, 0.0).unwrap().exponent_hat + 1.5).abs() < 0.05);
    }

    #[test]
    fn threshold_sharpness() {
        let p = single(1.5, true);
        let fin = weighted_time_norm(&p, 2.2).unwrap();
        assert!(!fin.divergent && fin.value.is_finite() && fin.value > 0.0);
        let div = weighted_time_norm(&p, 1.8).unwrap();
        assert!(div.divergent && div.value.is_infinite());
        assert!((div.endpoint_exponent + 1.2).abs() < 1e-12);
    }

    #[test]
    fn weighted_norm_matches_direct_quadrature() {
        // rate 1: ∂³u = -t^{γ-3} E_{γ,γ-2}(-t^γ)
        let p = single(1.5, true);
        let rho: f64 = 2.5;
        let v = weighted_time_norm(&p, rho).unwrap().value;
        let m = solve_mode(&p, 1).unwrap();
        let direct = crate::quadrature::integrate_adaptive(
            |t| {
                let d = m.d3u(t).unwrap();
                // the t^e weight is applied by the rule
                t.powi(3) * d * d
            },
            0.0,
            1.0,
            Some(rho - 3.0),
            &crate::quadrature::AdaptiveOptions { abs_tol: 1e-12, rel_tol: 1e-10, max_panels: 20000, order: 10 },
        );
        let direct = match direct {
            Ok(i) => i.value,
            Err(crate::quadrature::QuadError::NotConverged { value, .. }) => value,
            Err(e) => panic!("{e}"),
        };
        assert!((v - direct).abs() < 1e-7 * direct, "{v} {direct}");
    }

    #[test]
    fn zero_operator_input() {
        let d = Arc::new(make_domain(DomainKind::Interval { length: PI }, 2).unwrap());
        let r = solution_operator_bound_check(0.5, 1.5, 0.0, 1, &[0.1, 0.5], &ModeExpansion::zeros(d)).unwrap();
        assert_eq!(r.g_ratio, 0.0);
        assert_eq!(r.h_ratio, 0.0);
    }

    #[test]
    fn space_fit_half_closed_form() {
        // s = 1/2, θ = 0, σ = 0, single mode: Ψ_{ℓ+1}(-2) = Γ(2ℓ+1)/2^{2ℓ+1}
        let p = single(1.5, true);
        let f = ExtensionField::new(p, WeightSpec { beta: 0.0, theta: 0.0 }).unwrap();
        let opts = SpaceRegOptions { sigma: 0.0, nu: 0.0, ell_max: 3, mu: DEFAULT_MU, t_window: (0.0, 1.0) };
        let r = space_regularity_fit(&f, &opts).unwrap();
        let u2 = solve_mode(&f.problem, 1).unwrap().l2_time_norm_sq(1.0).unwrap();
        for ell in 0..=3usize {
            let exact = crate::special::gamma(2.0 * ell as f64 + 1.0) / 2f64.powi(2 * ell as i32 + 1) * u2;
            let v = r.sequences[0].norms[ell];
            assert!((v - exact).abs() < 1e-9 * exact);
        }
        assert!(r.max_normalized() <= 1.0 + 1e-12);
        assert!(matches!(
            space_regularity_fit(&f, &SpaceRegOptions { sigma: 0.5, ..opts }),
            Err(RegError::OutOfRange(_))
        ));
    }
}
