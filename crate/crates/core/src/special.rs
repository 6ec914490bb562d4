//! Gamma-function helpers shared by the series, quadrature and Bessel code.

/// Γ(x). Poles return ±∞ or NaN as `libm::tgamma` does.
#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// ln|Γ(x)|.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// True when `x` is a pole of Γ (0, -1, -2, ...).
#[inline]
pub fn is_gamma_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// 1/Γ(x), entire: exactly zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if is_gamma_pole(x) {
        return 0.0;
    }
    if x > 170.0 {
        return (-ln_gamma(x)).exp();
    }
    if x < -170.0 {
        // reflection: 1/Γ(x) = Γ(1-x) sin(πx)/π
        let s = sin_pi(x);
        return s * (ln_gamma(1.0 - x) - std::f64::consts::PI.ln()).exp();
    }
    1.0 / gamma(x)
}

/// sin(πx) with exact zeros at integers.
pub fn sin_pi(x: f64) -> f64 {
    if x == x.floor() {
        return 0.0;
    }
    // reduce to [-1, 1] so that large arguments keep their accuracy
    let r = x - 2.0 * (x / 2.0).round();
    (std::f64::consts::PI * r).sin()
}

/// cos(πx) with exact zeros at half-integers.
pub fn cos_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if (r.abs() - 0.5).abs() == 0.0 {
        return 0.0;
    }
    (std::f64::consts::PI * r).cos()
}

/// Sign and log-magnitude of 1/Γ(x) for x away from the poles.
pub fn rgamma_sign_ln(x: f64) -> (f64, f64) {
    if is_gamma_pole(x) {
        return (0.0, f64::NEG_INFINITY);
    }
    if x > 0.0 {
        return (1.0, -ln_gamma(x));
    }
    // Γ(x) for x < 0 has sign (-1)^ceil(-x)
    let n = (-x).ceil();
    let sign = if (n as i64) % 2 == 0 { 1.0 } else { -1.0 };
    (sign, -ln_gamma(x))
}

/// Pairwise summation in a fixed order, independent of thread count.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rgamma_poles_and_values() {
        assert_eq!(rgamma(0.0), 0.0);
        assert_eq!(rgamma(-3.0), 0.0);
        assert!((rgamma(0.5) - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-16);
        assert!((rgamma(5.0) - 1.0 / 24.0).abs() < 1e-17);
        let big = rgamma(172.5);
        assert!(big > 0.0 && (big / (-ln_gamma(172.5)).exp() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn rgamma_sign_matches_direct() {
        for &x in &[-0.5, -1.5, -2.5, -3.3, 0.7, 4.2] {
            let (s, l) = rgamma_sign_ln(x);
            let direct = rgamma(x);
            assert!((s * l.exp() - direct).abs() <= 1e-14 * direct.abs());
        }
    }

    #[test]
    fn trig_pi_exact_zeros() {
        assert_eq!(sin_pi(3.0), 0.0);
        assert_eq!(cos_pi(1.5), 0.0);
        assert!((sin_pi(0.5) - 1.0).abs() < 1e-16);
    }
}
