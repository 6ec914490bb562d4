//! Time discretization: Riemann–Liouville integrals of sampled data, the
//! discrete Caputo operator δ_τ^γ, the fully discrete modal scheme and
//! convergence-order fits.
//!
//! δ_τ^γ is the L2-type product rule
//!   δ_τ^γ U^j = Σ_{i=1}^{j} b_{j-i} Δ²_i,   b_m = ((m+1)^{2-γ} - m^{2-γ}) τ^{2-γ}/Γ(3-γ),
//! with Δ²_i = (U^i - 2U^{i-1} + U^{i-2})/τ² for i ≥ 2 and Δ²_1 = (U^1 - U^0 - τ u'(0))/τ².
//! Its natural collocation point is the midpoint t_{j-1/2}, where it is
//! consistent to O(τ^{3-γ}) for C³ data; the scheme therefore pairs it with
//! the Crank–Nicolson average of the reaction term.

use rayon::prelude::*;
use serde::Serialize;

use crate::mlfunc::{ml_value, MlError};
use crate::quadrature::composite_gl;
use crate::special::{gamma, pairwise_sum, rgamma};
use crate::wavesolve::{solve_mode, FracWaveProblem, SolveError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiscError {
    #[error("order {0} must be positive")]
    InvalidOrder(f64),
    #[error("grid must be uniform for this operator (step spread {spread:e})")]
    GridNotUniform { spread: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("sample count {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("implicit step coefficient vanished")]
    SingularStep,
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Ml(#[from] MlError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    tau: f64,
}

impl TimeGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self, DiscError> {
        if nodes.len() < 2 || nodes[0] != 0.0 {
            return Err(DiscError::InvalidGrid("need t_0 = 0 and at least two nodes".into()));
        }
        let mut tau: f64 = 0.0;
        for w in nodes.windows(2) {
            let h = w[1] - w[0];
            if !(h > 0.0) {
                return Err(DiscError::InvalidGrid("nodes must be strictly increasing".into()));
            }
            tau = tau.max(h);
        }
        Ok(Self { nodes, tau })
    }

    pub fn uniform(t_final: f64, steps: usize) -> Result<Self, DiscError> {
        if steps == 0 || !(t_final > 0.0) {
            return Err(DiscError::InvalidGrid(format!("T = {t_final}, steps = {steps}")));
        }
        let h = t_final / steps as f64;
        let mut nodes: Vec<f64> = (0..=steps).map(|j| j as f64 * h).collect();
        nodes[steps] = t_final;
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn t_final(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn is_uniform(&self) -> bool {
        self.step_spread() <= 1e-12 * self.tau
    }

    fn step_spread(&self) -> f64 {
        let mut lo = f64::INFINITY;
        for w in self.nodes.windows(2) {
            lo = lo.min(w[1] - w[0]);
        }
        self.tau - lo
    }

    /// Trapezoid-rule L²(0,T) norm of samples.
    pub fn l2_norm(&self, v: &[f64]) -> f64 {
        let mut parts = Vec::with_capacity(v.len());
        for j in 1..self.nodes.len() {
            parts.push(0.5 * (self.nodes[j] - self.nodes[j - 1]) * (v[j] * v[j] + v[j - 1] * v[j - 1]));
        }
        pairwise_sum(&parts).sqrt()
    }
}

/// I^σ g at every node, integrating the piecewise-linear interpolant of g exactly.
pub fn frac_integral(sigma: f64, g: &[f64], grid: &TimeGrid) -> Result<Vec<f64>, DiscError> {
    if !(sigma > 0.0) {
        return Err(DiscError::InvalidOrder(sigma));
    }
    let t = grid.nodes();
    if g.len() != t.len() {
        return Err(DiscError::LengthMismatch { expected: t.len(), got: g.len() });
    }
    let rg = rgamma(sigma);
    let out: Vec<f64> = (0..t.len())
        .into_par_iter()
        .map(|j| {
            let tj = t[j];
            let mut parts = Vec::with_capacity(j);
            for i in 1..=j {
                let h = t[i] - t[i - 1];
                let a = tj - t[i];
                let b = tj - t[i - 1];
                let m0 = (b.powf(sigma) - a.powf(sigma)) / sigma;
                let m1 = (b.powf(sigma + 1.0) - a.powf(sigma + 1.0)) / (sigma + 1.0);
                let w_right = (b * m0 - m1) / h;
                let w_left = (m1 - a * m0) / h;
                parts.push(w_left * g[i - 1] + w_right * g[i]);
            }
            rg * pairwise_sum(&parts)
        })
        .collect();
    Ok(out)
}

/// Product-integration weights b_0..b_{n-1} of δ_τ^γ.
pub fn caputo_weights(gamma_: f64, tau: f64, n: usize) -> Vec<f64> {
    let p = 2.0 - gamma_;
    let c = tau.powf(p) * rgamma(3.0 - gamma_);
    (0..n).map(|m| ((m as f64 + 1.0).powf(p) - (m as f64).powf(p)) * c).collect()
}

fn second_differences(u: &[f64], du0: f64, tau: f64) -> Vec<f64> {
    let mut d = vec![f64::NAN; u.len()];
    if u.len() > 1 {
        d[1] = (u[1] - u[0] - tau * du0) / (tau * tau);
    }
    for i in 2..u.len() {
        d[i] = (u[i] - 2.0 * u[i - 1] + u[i - 2]) / (tau * tau);
    }
    d
}

/// δ_τ^γ u at nodes j ≥ 1 (approximating ∂_t^γ u at t_{j-1/2}); entry 0 is NaN.
pub fn caputo_apply(gamma_: f64, u: &[f64], du0: f64, grid: &TimeGrid) -> Result<Vec<f64>, DiscError> {
    if !(gamma_ > 1.0 && gamma_ < 2.0) {
        return Err(DiscError::InvalidOrder(gamma_));
    }
    if !grid.is_uniform() {
        return Err(DiscError::GridNotUniform { spread: grid.step_spread() });
    }
    if u.len() != grid.nodes().len() {
        return Err(DiscError::LengthMismatch { expected: grid.nodes().len(), got: u.len() });
    }
    let tau = grid.tau();
    let b = caputo_weights(gamma_, tau, u.len());
    let d2 = second_differences(u, du0, tau);
    let mut out = vec![f64::NAN; u.len()];
    for j in 1..u.len() {
        let mut acc = 0.0;
        for i in 1..=j {
            acc += b[j - i] * d2[i];
        }
        out[j] = acc;
    }
    Ok(out)
}

/// Registered discrete Caputo operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SchemeKind {
    /// second-difference product integration at midpoints with Crank–Nicolson reaction
    L2Midpoint,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 1] = [SchemeKind::L2Midpoint];

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::L2Midpoint => "l2-midpoint",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, DiscError> {
        Self::ALL.into_iter().find(|k| k.name() == name).ok_or_else(|| DiscError::UnknownScheme(name.into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitRule {
    /// U^1 = g + τh + τ^γ/Γ(1+γ) (f(0) - λ^s g)
    FractionalTaylor,
    /// U^1 = g + τh
    Linear,
    /// U^1 given per mode
    Given(Vec<f64>),
}

impl InitRule {
    pub fn name(&self) -> &'static str {
        match self {
            InitRule::FractionalTaylor => "fractional-taylor",
            InitRule::Linear => "linear",
            InitRule::Given(_) => "given",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscreteSolution {
    pub grid: TimeGrid,
    /// U[k-1][j]
    pub coeffs: Vec<Vec<f64>>,
    pub scheme: SchemeKind,
    pub init_rule: String,
    pub gamma: f64,
}

impl DiscreteSolution {
    pub fn final_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| *c.last().unwrap()).collect()
    }
}

/// Solves δ_τ^γ U^j + λ_k^s (U^j + U^{j-1})/2 = f_k(t_{j-1/2}) for every mode.
pub fn fully_discrete_solve(prob: &FracWaveProblem, grid: &TimeGrid, init: &InitRule) -> Result<DiscreteSolution, DiscError> {
    let g = prob.gamma;
    if !(g > 1.0 && g < 2.0) {
        return Err(DiscError::InvalidOrder(g));
    }
    if !grid.is_uniform() {
        return Err(DiscError::GridNotUniform { spread: grid.step_spread() });
    }
    if let InitRule::Given(v) = init {
        if v.len() != prob.n_modes() {
            return Err(DiscError::LengthMismatch { expected: prob.n_modes(), got: v.len() });
        }
    }
    let coeffs: Result<Vec<Vec<f64>>, DiscError> = (1..=prob.n_modes())
        .into_par_iter()
        .map(|k| {
            let m = solve_mode(prob, k)?;
            let f = m.forcing.clone();
            let u1 = match init {
                InitRule::FractionalTaylor => {
                    let f0 = f.as_ref().map(|p| p.value(0.0)).unwrap_or(0.0);
                    m.g + grid.tau() * m.h + grid.tau().powf(g) * rgamma(1.0 + g) * (f0 - m.rate * m.g)
                }
                InitRule::Linear => m.g + grid.tau() * m.h,
                InitRule::Given(v) => v[k - 1],
            };
            mode_recurrence(g, m.rate, m.g, m.h, u1, |t| f.as_ref().map(|p| p.value(t)).unwrap_or(0.0), grid)
        })
        .collect();
    Ok(DiscreteSolution {
        grid: grid.clone(),
        coeffs: coeffs?,
        scheme: SchemeKind::L2Midpoint,
        init_rule: init.name().to_string(),
        gamma: g,
    })
}

/// Scalar recurrence for one mode; `rate` may be 0.
pub fn mode_recurrence<F: Fn(f64) -> f64>(
    gamma_: f64,
    rate: f64,
    g: f64,
    h: f64,
    u1: f64,
    f: F,
    grid: &TimeGrid,
) -> Result<Vec<f64>, DiscError> {
    let n = grid.steps();
    let tau = grid.tau();
    let t = grid.nodes();
    let b = caputo_weights(gamma_, tau, n + 1);
    let tau2 = tau * tau;
    let diag = b[0] / tau2 + 0.5 * rate;
    if !(diag > 0.0) {
        return Err(DiscError::SingularStep);
    }
    let mut u = Vec::with_capacity(n + 1);
    u.push(g);
    u.push(u1);
    let mut d2 = vec![f64::NAN, (u1 - g - tau * h) / tau2];
    for j in 2..=n {
        let mut hist = 0.0;
        for i in 1..j {
            hist += b[j - i] * d2[i];
        }
        let fj = f(0.5 * (t[j] + t[j - 1]));
        let rhs = fj - 0.5 * rate * u[j - 1] - hist - b[0] * (-2.0 * u[j - 1] + u[j - 2]) / tau2;
        let uj = rhs / diag;
        d2.push((uj - 2.0 * u[j - 1] + u[j - 2]) / tau2);
        u.push(uj);
    }
    Ok(u)
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderFit {
    pub order: f64,
    pub r2: f64,
}

/// Least-squares slope of log err against log τ.
pub fn empirical_order(errors: &[(f64, f64)]) -> Result<OrderFit, DiscError> {
    if errors.len() < 3 {
        return Err(DiscError::DegenerateFit("need at least three levels".into()));
    }
    if errors.iter().any(|(t, e)| !(*t > 0.0 && *e > 0.0 && e.is_finite())) {
        return Err(DiscError::DegenerateFit("taus and errors must be positive".into()));
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    for w in sorted.windows(2) {
        if w[1].1 > 1.05 * w[0].1 {
            return Err(DiscError::DegenerateFit(format!("error grew from {:e} to {:e} under refinement", w[0].1, w[1].1)));
        }
    }
    let pts: Vec<(f64, f64)> = sorted.iter().map(|(t, e)| (t.ln(), e.ln())).collect();
    let (slope, r2) = linear_fit(&pts);
    Ok(OrderFit { order: slope, r2 })
}

/// Slope and R² of an ordinary least-squares line through `pts`.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { (sxy * sxy / (sxx * syy)).min(1.0) } else { 1.0 };
    (slope, r2)
}

/// |U^J - u(T)| in ℍ^s over all modes, against the analytic mode solutions.
pub fn final_time_error(prob: &FracWaveProblem, sol: &DiscreteSolution) -> Result<f64, DiscError> {
    let tf = sol.grid.t_final();
    let e: Result<Vec<f64>, DiscError> = (1..=prob.n_modes())
        .into_par_iter()
        .map(|k| {
            let m = solve_mode(prob, k)?;
            let d = sol.coeffs[k - 1].last().unwrap() - m.u(tf)?;
            Ok(m.rate * d * d)
        })
        .collect();
    Ok(pairwise_sum(&e?).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorSplit {
    /// ℍ^s error of the retained modes at T
    pub time_error: f64,
    /// (Σ_{k>m} λ_k^s u_k(T)²)^{1/2}
    pub projection_error: f64,
}

/// Splits the error at T into the time-discretization part on modes 1..=m
/// and the projection tail of the exact solution beyond m.
pub fn error_decomposition(prob: &FracWaveProblem, sol: &DiscreteSolution, m: usize) -> Result<ErrorSplit, DiscError> {
    let tf = sol.grid.t_final();
    let n = prob.n_modes();
    let m = m.min(n);
    let parts: Result<Vec<(f64, f64)>, DiscError> = (1..=n)
        .into_par_iter()
        .map(|k| {
            let mt = solve_mode(prob, k)?;
            let exact = mt.u(tf)?;
            if k <= m {
                let d = sol.coeffs[k - 1].last().unwrap() - exact;
                Ok((mt.rate * d * d, 0.0))
            } else {
                Ok((0.0, mt.rate * exact * exact))
            }
        })
        .collect();
    let parts = parts?;
    let a: Vec<f64> = parts.iter().map(|p| p.0).collect();
    let b: Vec<f64> = parts.iter().map(|p| p.1).collect();
    Ok(ErrorSplit { time_error: pairwise_sum(&a).sqrt(), projection_error: pairwise_sum(&b).sqrt() })
}

/// Discrete ‖U‖_{L²(0,T;ℍ^s)} over ‖f‖_{L²(0,T;ℍ^{-s})} + ‖g‖_{ℍ^s} + ‖h‖.
pub fn stability_report(prob: &FracWaveProblem, sol: &DiscreteSolution) -> Result<f64, DiscError> {
    let grid = &sol.grid;
    let nt = grid.nodes().len();
    let mut hs = vec![0.0; nt];
    for (k, c) in sol.coeffs.iter().enumerate() {
        let r = prob.rate(k + 1);
        for j in 0..nt {
            hs[j] += r * c[j] * c[j];
        }
    }
    let sol_norm = grid.l2_norm(&hs.iter().map(|v| v.sqrt()).collect::<Vec<_>>());
    let tf = prob.t_final;
    let f_neg: f64 = (1..=prob.n_modes())
        .map(|k| match prob.f.mode(k) {
            Some(p) => composite_gl(|t| p.value(t).powi(2), 0.0, tf, 32, 16) / prob.rate(k),
            None => 0.0,
        })
        .sum::<f64>()
        .sqrt();
    let data = f_neg + prob.g.hs_norm(prob.s) + prob.h.hs_norm(0.0);
    Ok(if data > 0.0 { sol_norm / data } else { 0.0 })
}

/// Smooth test functions for the operator-norm bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TestFunction {
    Square,
    Cube,
    Sine,
}

impl TestFunction {
    pub fn eval(&self, t: f64, d: usize) -> f64 {
        match (self, d) {
            (TestFunction::Square, 0) => t * t,
            (TestFunction::Square, 1) => 2.0 * t,
            (TestFunction::Square, 2) => 2.0,
            (TestFunction::Square, _) => 0.0,
            (TestFunction::Cube, 0) => t * t * t,
            (TestFunction::Cube, 1) => 3.0 * t * t,
            (TestFunction::Cube, 2) => 6.0 * t,
            (TestFunction::Cube, 3) => 6.0,
            (TestFunction::Cube, _) => 0.0,
            (TestFunction::Sine, d) => match d % 4 {
                0 => t.sin(),
                1 => t.cos(),
                2 => -t.sin(),
                _ => -t.cos(),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorBoundLevel {
    pub tau: f64,
    /// ‖δ_τ^γ w‖ / ‖∂_t² w‖_{L²}
    pub ratio_k2: f64,
    /// ‖δ_τ^γ w‖ / ‖∂_t³ w‖_{L²}; infinite when w''' ≡ 0
    pub ratio_k3: f64,
}

/// ‖δ_τ^γ w‖_{ℓ²_τ} against ‖∂_t^k w‖_{L²(0,T)} on a sequence of uniform grids.
pub fn operator_bound_sweep(gamma_: f64, w: TestFunction, t_final: f64, steps: &[usize]) -> Result<Vec<OperatorBoundLevel>, DiscError> {
    let n2 = composite_gl(|t| w.eval(t, 2).powi(2), 0.0, t_final, 16, 16).sqrt();
    let n3 = composite_gl(|t| w.eval(t, 3).powi(2), 0.0, t_final, 16, 16).sqrt();
    steps
        .iter()
        .map(|&n| {
            let grid = TimeGrid::uniform(t_final, n)?;
            let u: Vec<f64> = grid.nodes().iter().map(|&t| w.eval(t, 0)).collect();
            let d = caputo_apply(gamma_, &u, w.eval(0.0, 1), &grid)?;
            let norm = (grid.tau() * d.iter().skip(1).map(|v| v * v).sum::<f64>()).sqrt();
            Ok(OperatorBoundLevel {
                tau: grid.tau(),
                ratio_k2: norm / n2,
                ratio_k3: if n3 > 0.0 { norm / n3 } else { f64::INFINITY },
            })
        })
        .collect()
}

/// max over midpoints in [T/4, T] of |δ_τ^γ u - ∂_t^γ u| for u = E_{γ,1}(-t^γ).
pub fn ml_consistency_error(gamma_: f64, t_final: f64, steps: usize) -> Result<f64, DiscError> {
    let grid = TimeGrid::uniform(t_final, steps)?;
    let u: Result<Vec<f64>, MlError> = grid.nodes().iter().map(|&t| ml_value(gamma_, 1.0, -t.powf(gamma_))).collect();
    let d = caputo_apply(gamma_, &u?, 0.0, &grid)?;
    let t = grid.nodes();
    let mut worst: f64 = 0.0;
    for j in 1..t.len() {
        let tm = 0.5 * (t[j] + t[j - 1]);
        if tm < 0.25 * t_final {
            continue;
        }
        let exact = -ml_value(gamma_, 1.0, -tm.powf(gamma_))?;
        worst = worst.max((d[j] - exact).abs());
    }
    Ok(worst)
}

/// Continuous bound T^σ/Γ(σ+1) of I^σ on L²(0,T).
pub fn frac_integral_bound(sigma: f64, t_final: f64) -> f64 {
    t_final.powf(sigma) / gamma(sigma + 1.0)
}
