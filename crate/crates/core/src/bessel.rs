//! Modified Bessel function of the second kind K_ν(z) for real ν and z > 0.
//!
//! K_μ, K_{μ+1} with |μ| ≤ 1/2 come from Temme's series for z ≤ 2 and from
//! Steed's continued fraction (CF2) for z > 2; other orders follow by the
//! upward recurrence K_{ν+1} = K_{ν-1} + (2ν/z) K_ν. Everything is computed
//! in the scaled form e^z K_ν(z).

use std::f64::consts::PI;

const EPS: f64 = 1e-16;
const MAXIT: usize = 20_000;
/// Beyond this argument e^{-z} underflows in double precision.
pub const UNDERFLOW_Z: f64 = 705.0;

/// Taylor coefficients c_k of 1/Γ(z) = Σ c_k z^k, k = 0..=29.
const RGAMMA_TAYLOR: [f64; 30] = [
    0.0,
    1.0,
    0.577_215_664_901_532_860_61,
    -0.655_878_071_520_253_881_08,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_748,
    -0.009_621_971_527_876_973_562_1,
    0.007_218_943_246_663_099_542_4,
    -0.001_165_167_591_859_065_112_1,
    -0.000_215_241_674_114_950_972_82,
    0.000_128_050_282_388_116_186_15,
    -0.000_020_134_854_780_788_238_656,
    -1.250_493_482_142_670_657_3e-6,
    1.133_027_231_981_695_882_4e-6,
    -2.056_338_416_977_607_103_5e-7,
    6.116_095_104_481_415_817_9e-9,
    5.002_007_644_469_222_930_1e-9,
    -1.181_274_570_487_020_144_6e-9,
    1.043_426_711_691_100_510_5e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708_2e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783_2e-14,
    -5.348_122_539_423_017_982_4e-15,
    1.226_778_628_238_260_790_2e-15,
    -1.181_259_301_697_458_769_5e-16,
    1.186_692_254_751_600_332_6e-18,
    1.412_380_655_318_031_781_6e-18,
    -2.298_745_684_435_370_206_6e-19,
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BesselError {
    #[error("K_nu(z) needs z > 0, got {0}")]
    Domain(f64),
    #[error("series for K_nu did not converge at z = {0}")]
    NoConvergence(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselK {
    pub value: f64,
    /// set when e^{-z} K_ν(z) underflows; `value` is then 0
    pub underflow: bool,
}

/// (1/Γ(1-μ) - 1/Γ(1+μ))/(2μ) and (1/Γ(1-μ) + 1/Γ(1+μ))/2 without cancellation.
fn temme_gammas(mu: f64) -> (f64, f64) {
    let m2 = mu * mu;
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    let mut p = 1.0;
    for k in (2..30).step_by(2) {
        g1 -= RGAMMA_TAYLOR[k] * p;
        g2 += RGAMMA_TAYLOR[k - 1] * p;
        p *= m2;
    }
    (g1, g2)
}

/// Scaled (e^z K_μ(z), e^z K_{μ+1}(z)) from Temme's series, |μ| ≤ 1/2.
pub fn k_pair_temme_scaled(mu: f64, x: f64) -> Result<(f64, f64), BesselError> {
    let x2 = 0.5 * x;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let (g1, g2) = temme_gammas(mu);
    let gampl = g2 - mu * g1;
    let gammi = g2 + mu * g1;
    let mut ff = fact * (g1 * e.cosh() + g2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / gampl;
    let mut q = 0.5 / (ee * gammi);
    let mut c = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    let m2 = mu * mu;
    let mut converged = false;
    for i in 1..MAXIT {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - m2);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - fi * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * EPS && del1.abs() < sum1.abs() * EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(BesselError::NoConvergence(x));
    }
    let ex = x.exp();
    Ok((sum * ex, sum1 * 2.0 / x * ex))
}

/// Scaled (e^z K_μ(z), e^z K_{μ+1}(z)) from Steed's CF2, |μ| ≤ 1/2.
pub fn k_pair_cf2_scaled(mu: f64, x: f64) -> Result<(f64, f64), BesselError> {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    let mut converged = false;
    for i in 2..MAXIT {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS && (delh / h).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(BesselError::NoConvergence(x));
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (mu + x + 0.5 - h) / x;
    Ok((k0, k1))
}

/// Scaled pair with the branch chosen by argument.
pub fn k_pair_scaled(mu: f64, x: f64) -> Result<(f64, f64), BesselError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(BesselError::Domain(x));
    }
    if x <= 2.0 {
        k_pair_temme_scaled(mu, x)
    } else {
        k_pair_cf2_scaled(mu, x)
    }
}

/// e^z K_ν(z).
pub fn bessel_k_scaled(nu: f64, z: f64) -> Result<f64, BesselError> {
    let nu = nu.abs();
    let n = nu.round();
    let mu = nu - n;
    let (mut k0, mut k1) = k_pair_scaled(mu, z)?;
    let mut order = mu;
    for _ in 0..n as usize {
        let k2 = k0 + 2.0 * (order + 1.0) / z * k1;
        k0 = k1;
        k1 = k2;
        order += 1.0;
    }
    Ok(k0)
}

/// K_ν(z); returns 0 with `underflow` set once e^{-z} leaves the double range.
pub fn bessel_k(nu: f64, z: f64) -> Result<BesselK, BesselError> {
    let scaled = bessel_k_scaled(nu, z)?;
    if z > UNDERFLOW_Z {
        return Ok(BesselK { value: 0.0, underflow: true });
    }
    Ok(BesselK { value: scaled * (-z).exp(), underflow: false })
}

/// e^z K_{j-s}(z) for j = 0..=jmax and 0 < s < 1.
pub fn k_shifted_sequence_scaled(s: f64, jmax: usize, z: f64) -> Result<Vec<f64>, BesselError> {
    let (ks, k1ms) = if s <= 0.5 {
        k_pair_scaled(-s, z)?
    } else {
        let (a, b) = k_pair_scaled(s - 1.0, z)?;
        (b, a)
    };
    let mut out = Vec::with_capacity(jmax + 1);
    out.push(ks);
    if jmax >= 1 {
        out.push(k1ms);
    }
    for j in 1..jmax {
        let nu = j as f64 - s;
        let next = out[j - 1] + 2.0 * nu / z * out[j];
        out.push(next);
    }
    Ok(out)
}
