//! Gauss rules and a panel-adaptive integrator with an optional algebraic
//! endpoint singularity at the left end.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use crate::special::{ln_gamma, pairwise_sum};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("adaptive quadrature did not reach tolerance: estimate {value:e}, error {abs_error:e} after {panels} panels")]
    NotConverged { value: f64, abs_error: f64, panels: usize },
    #[error("integrand produced a non-finite value at x = {x}")]
    NonFinite { x: f64 },
    #[error("invalid Jacobi exponent {0} (must exceed -1)")]
    BadExponent(f64),
}

/// Nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

type RuleKey = (usize, u64, u64);

fn rule_cache() -> &'static Mutex<HashMap<RuleKey, Arc<GaussRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<GaussRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss–Legendre rule with `n` points (cached).
pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    gauss_jacobi(n, 0.0, 0.0)
}

/// Gauss–Jacobi rule for the weight (1-x)^a (1+x)^b on [-1, 1] (cached).
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Arc<GaussRule> {
    assert!(n >= 1, "rule needs at least one node");
    assert!(a > -1.0 && b > -1.0, "Jacobi exponents must exceed -1");
    let key = (n, a.to_bits(), b.to_bits());
    if let Some(r) = rule_cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let rule = Arc::new(if a == 0.0 && b == 0.0 {
        build_legendre(n)
    } else {
        build_jacobi(n, a, b)
    });
    rule_cache().lock().unwrap().insert(key, rule.clone());
    rule
}

fn build_legendre(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

/// Golub–Welsch for starting values, then Newton on P_n^{(a,b)} for nodes
/// and the closed-form weight formula.
fn build_jacobi(n: usize, a: f64, b: f64) -> GaussRule {
    let ab = a + b;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for (k, d) in diag.iter_mut().enumerate() {
        let kf = k as f64;
        *d = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
    }
    for (i, o) in off.iter_mut().enumerate() {
        let k = (i + 1) as f64;
        let v = if i == 0 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * k * (k + a) * (k + b) * (k + ab)
                / ((2.0 * k + ab).powi(2) * (2.0 * k + ab + 1.0) * (2.0 * k + ab - 1.0))
        };
        *o = v.sqrt();
    }
    let mut mat = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        mat[(i, i)] = diag[i];
        if i + 1 < n {
            mat[(i, i + 1)] = off[i];
            mat[(i + 1, i)] = off[i];
        }
    }
    let mut roots: Vec<f64> = nalgebra::SymmetricEigen::new(mat).eigenvalues.iter().copied().collect();
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let nf = n as f64;
    let mu0 = ((a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0)).exp();
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &z0 in &roots {
        // Newton polish on P_n^{(a,b)}
        let mut z = z0;
        for _ in 0..10 {
            let mut temp = 2.0 + ab;
            let mut p1 = (a - b + temp * z) / 2.0;
            let mut p2 = 1.0;
            for j in 2..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                temp = 2.0 * jf + ab;
                let aa = 2.0 * jf * (jf + ab) * (temp - 2.0);
                let bb = (temp - 1.0) * (a * a - b * b + temp * (temp - 2.0) * z);
                let c = 2.0 * (jf - 1.0 + a) * (jf - 1.0 + b) * temp;
                p1 = (bb * p2 - c * p3) / aa;
            }
            if n == 1 {
                temp = 2.0 + ab;
            }
            let pp = (nf * (a - b - temp * z) * p1 + 2.0 * (nf + a) * (nf + b) * p2) / (temp * (1.0 - z * z));
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 4.0 * f64::EPSILON * z.abs().max(1e-3) {
                break;
            }
        }
        // Christoffel numbers from the orthonormal three-term recurrence
        let mut pm1 = 0.0;
        let mut p = 1.0 / mu0.sqrt();
        let mut acc = p * p;
        for k in 0..n - 1 {
            let bk = if k == 0 { 0.0 } else { off[k - 1] };
            let next = ((z - diag[k]) * p - bk * pm1) / off[k];
            pm1 = p;
            p = next;
            acc += p * p;
        }
        nodes.push(z);
        weights.push(1.0 / acc);
    }
    GaussRule { nodes, weights }
}

/// ∫_a^b f with a fixed composite Gauss–Legendre rule.
pub fn composite_gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let rule = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let parts: Vec<f64> = (0..panels)
        .map(|p| {
            let lo = a + p as f64 * h;
            let c = lo + 0.5 * h;
            rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * f(c + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .collect();
    pairwise_sum(&parts)
}

/// ∫_a^b (x-a)^p f(x) dx with a single Gauss–Jacobi rule.
pub fn gj_left<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, p: f64, n: usize) -> f64 {
    let rule = gauss_jacobi(n, 0.0, p);
    let h = 0.5 * (b - a);
    let scale = h.powf(p + 1.0);
    rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * f(a + h * (1.0 + x))).sum::<f64>() * scale
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Base rule size; the error estimate compares it with twice as many nodes.
    pub order: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-12, max_panels: 4000, order: 10 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err).then(o.a.total_cmp(&self.a))
    }
}

/// Adaptive bisection for ∫_a^b w(x) f(x) dx where w(x) = (x-a)^p if
/// `left_exponent = Some(p)` and w = 1 otherwise. Panels touching `a` use
/// Gauss–Jacobi, all others Gauss–Legendre.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    left_exponent: Option<f64>,
    opts: &AdaptiveOptions,
) -> Result<Integral, QuadError> {
    if let Some(p) = left_exponent {
        if p <= -1.0 {
            return Err(QuadError::BadExponent(p));
        }
    }
    if b <= a {
        return Ok(Integral { value: 0.0, abs_error: 0.0, panels: 0 });
    }
    let n = opts.order;
    let gl_lo = gauss_legendre(n);
    let gl_hi = gauss_legendre(2 * n);
    let apply = |rule: &GaussRule, lo: f64, hi: f64| -> f64 {
        let h = 0.5 * (hi - lo);
        let c = lo + h;
        rule.nodes.iter().zip(&rule.weights).map(|(x, w)| {
            let xx = c + h * x;
            let wx = match left_exponent {
                Some(p) => (xx - a).powf(p),
                None => 1.0,
            };
            w * wx * f(xx)
        }).sum::<f64>() * h
    };
    let eval = |lo: f64, hi: f64| -> Panel {
        let (v1, v2) = match left_exponent {
            Some(p) if lo == a => (gj_left(&f, lo, hi, p, n), gj_left(&f, lo, hi, p, 2 * n)),
            _ => (apply(&gl_lo, lo, hi), apply(&gl_hi, lo, hi)),
        };
        Panel { a: lo, b: hi, value: v2, err: (v2 - v1).abs() }
    };

    let mut heap = BinaryHeap::new();
    // a few initial panels so narrow features are not missed entirely
    let init = 4;
    for i in 0..init {
        let lo = a + (b - a) * i as f64 / init as f64;
        let hi = if i + 1 == init { b } else { a + (b - a) * (i + 1) as f64 / init as f64 };
        heap.push(eval(lo, hi));
    }
    loop {
        let total_err: f64 = heap.iter().map(|p| p.err).sum();
        let total_val: f64 = heap.iter().map(|p| p.value).sum();
        if !total_val.is_finite() {
            return Err(QuadError::NonFinite { x: heap.peek().map(|p| p.a).unwrap_or(a) });
        }
        if total_err <= opts.abs_tol.max(opts.rel_tol * total_val.abs()) {
            break;
        }
        if heap.len() >= opts.max_panels {
            return Err(QuadError::NotConverged { value: total_val, abs_error: total_err, panels: heap.len() });
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel cannot be split further in floating point
            return Err(QuadError::NotConverged { value: total_val, abs_error: total_err, panels: heap.len() + 1 });
        }
        heap.push(eval(worst.a, mid));
        heap.push(eval(mid, worst.b));
    }
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let vals: Vec<f64> = panels.iter().map(|p| p.value).collect();
    Ok(Integral {
        value: pairwise_sum(&vals),
        abs_error: panels.iter().map(|p| p.err).sum(),
        panels: panels.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(7);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-15);
    }

    #[test]
    fn jacobi_matches_beta_integrals() {
        // ∫_{-1}^{1} (1-x)^a (1+x)^b dx = 2^{a+b+1} B(a+1, b+1)
        for &(a, b) in &[(0.5, -0.5), (-0.7, 0.3), (0.0, -0.25), (1.5, 2.0)] {
            let r = gauss_jacobi(16, a, b);
            let s: f64 = r.weights.iter().sum();
            let exact = (2f64.powf(a + b + 1.0).ln() + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0)).exp();
            assert!((s - exact).abs() < 1e-13 * exact, "{a} {b} {s} {exact}");
            // first moment of x
            let m1: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x).sum();
            let exact1 = exact * (b - a) / (a + b + 2.0);
            assert!((m1 - exact1).abs() < 1e-13 * exact.max(1.0));
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫_0^1 x^{-0.7} cos(x) dx against a fine composite reference on the substituted integrand
        let v = integrate_adaptive(|x: f64| x.cos(), 0.0, 1.0, Some(-0.7), &AdaptiveOptions::default()).unwrap();
        // substitute x = u^{1/0.3}: ∫_0^1 cos(u^{10/3}) / 0.3 du
        let reference = composite_gl(|u: f64| (u.powf(1.0 / 0.3)).cos() / 0.3, 0.0, 1.0, 200, 20);
        assert!((v.value - reference).abs() < 1e-12, "{} {}", v.value, reference);
    }

    #[test]
    fn adaptive_resolves_narrow_peak() {
        let eps: f64 = 1e-4;
        let v = integrate_adaptive(|x: f64| eps / ((x - 0.3).powi(2) + eps * eps), 0.0, 1.0, None, &AdaptiveOptions::default()).unwrap();
        let exact = (0.7 / eps).atan() + (0.3 / eps).atan();
        assert!((v.value - exact).abs() < 1e-11);
    }
}
