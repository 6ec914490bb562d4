"""High-precision Mittag-Leffler values by direct summation of the defining
power series, with the working precision raised to absorb the cancellation.

Writes the frozen reference points used by the Rust tests."""
import json
import math
import sys

import mpmath as mp


def ml_series(gamma, mu, z):
    x = abs(float(z))
    growth = x ** (1.0 / float(gamma)) if x > 0 else 0.0
    dps = int(growth / math.log(10)) + 40
    with mp.workdps(dps):
        g = mp.mpf(gamma)
        m = mp.mpf(mu)
        zz = mp.mpf(z)
        total = mp.mpf(0)
        k = 0
        peak_passed = False
        last = None
        while True:
            arg = g * k + m
            t = zz ** k * mp.rgamma(arg)
            total += t
            if arg > 1 and growth < (k + 1) * float(gamma):
                peak_passed = True
            if peak_passed and t != 0 and abs(t) < mp.mpf(10) ** (-dps + 5):
                break
            if peak_passed and t == 0 and last == 0:
                break
            last = t
            k += 1
        return float(total)


def random_points(n, seed):
    import random
    rng = random.Random(seed)
    pts = []
    for _ in range(n):
        g = round(rng.uniform(1.1, 2.0), 6)
        mu = round(rng.uniform(-2.0, 3.0), 6)
        z = -round(10 ** rng.uniform(-2.0, 4.0), 6)
        pts.append((g, mu, z))
    return pts


def main(out):
    pts = random_points(50, 20261018)
    pts += [(1.5, 1.0, -5.0), (1.5, 2.5, -1.0e4), (1.1, -2.0, -1.0e4), (2.0, 3.0, -9000.0)]
    rows = []
    for (g, mu, z) in pts:
        v = ml_series(g, mu, z)
        rows.append({"gamma": g, "mu": mu, "z": z, "value": v})
        print(g, mu, z, v, file=sys.stderr)
    with open(out, "w") as fh:
        json.dump({"ml_points": rows}, fh, indent=1)


if __name__ == "__main__":
    main(sys.argv[1])
