"""High-precision reference values for Bessel K, the Φ/Ψ integrals and
forced mode solutions. Writes ../../fixtures/ext_points.json."""

import json
import os

import mpmath as mp

mp.mp.dps = 40


def besselk_integral(nu, z):
    # e^{-z cosh t} < 1e-60 beyond the cutoff
    top = mp.acosh(max(mp.mpf(140) / z, 2))
    pts = [0, 1, 4] + [p for p in (8, 12, 16) if p < top] + [top]
    return mp.quad(lambda t: mp.exp(-z * mp.cosh(t)) * mp.cosh(nu * t), sorted(set(pts)))


def c_s(s):
    return mp.mpf(2) ** (1 - s) / mp.gamma(s)


def psi(s, z):
    return c_s(s) * z**s * mp.besselk(s, z)


def phi_int(s, delta, thp):
    return mp.quad(lambda z: z**delta * mp.exp(thp * z) * psi(s, z) ** 2, [0, 1e-6, 1e-3, 1, 5, 20, 80, 200])


def psi_int(s, ell, beta, thp):
    def d(z):
        return mp.re(mp.diff(lambda x: psi(s, x), z, ell))

    return mp.quad(lambda z: z ** (beta + 2 * ell) * mp.exp(thp * z) * d(z) ** 2, [0, 1e-8, 1e-4, 0.1, 1, 5, 20, 60])


def ml(g, m, z, terms=400):
    return mp.nsum(lambda k: z**k / mp.gamma(g * k + m), [0, mp.inf])


def sin_forced(g, rate, t):
    # ∫_0^t ρ^{γ-1} E_{γ,γ}(-rate ρ^γ) sin(t-ρ) dρ as a double series
    tot = mp.mpf(0)
    for k in range(0, 400):
        inner = mp.mpf(0)
        for n in range(0, 200):
            e = g * k + g + 2 * n + 1
            term = (-1) ** n * t**e / mp.gamma(e + 1)
            inner += term
            if abs(term) < mp.mpf(10) ** (-45):
                break
        term_k = (-rate) ** k * inner
        tot += term_k
        if k > 5 and abs(term_k) < mp.mpf(10) ** (-40):
            break
    return tot


def wave_forced(omega, g, h, t):
    # u'' + ω²u = e^{-t}
    conv = mp.quad(lambda r: mp.sin(omega * (t - r)) * mp.exp(-r), [0, t]) / omega
    return g * mp.cos(omega * t) + h * mp.sin(omega * t) / omega + conv


def main():
    out = {}
    out["bessel_k"] = [
        {"nu": nu, "z": z, "value": float(besselk_integral(mp.mpf(nu), mp.mpf(z)))}
        for nu, z in [(0.3, 2.0), (0.3, 0.01), (0.7, 5.0), (0.2, 50.0), (0.9, 1e-6)]
    ]
    s = mp.mpf("0.3")
    out["phi"] = [{"s": 0.3, "delta": 0.0, "theta_ratio": 0.5, "value": float(phi_int(s, 0, mp.mpf("0.5")))}]
    out["psi"] = [
        {"s": 0.3, "ell": ell, "beta": 0.0, "theta_ratio": 0.0, "value": float(psi_int(s, ell, 0, 0))}
        for ell in (1, 2, 3)
    ]
    g = mp.mpf("1.5")
    out["const_forced"] = [
        {"gamma": 1.5, "rate": 2.0, "t": t, "value": float(mp.mpf(t) ** g * ml(g, g + 1, -2 * mp.mpf(t) ** g))}
        for t in (0.3, 1.0, 2.0)
    ]
    out["sin_forced"] = [
        {"gamma": 1.5, "rate": 2.0, "t": t, "value": float(sin_forced(g, 2, mp.mpf(t)))} for t in (0.3, 1.0, 2.0)
    ]
    om = mp.sqrt(2)
    out["wave_forced"] = [
        {"rate": 2.0, "g": 0.5, "h": -0.25, "t": t, "value": float(wave_forced(om, mp.mpf("0.5"), mp.mpf("-0.25"), mp.mpf(t)))}
        for t in (0.5, 1.0, 3.0)
    ]
    here = os.path.dirname(os.path.abspath(__file__))
    path = os.path.join(here, "..", "..", "fixtures", "ext_points.json")
    with open(path, "w") as f:
        json.dump(out, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
