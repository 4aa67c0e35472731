"""Independent high-precision evaluation of the frozen reference values used
by the test suite.  Nothing here imports pspin; run it to regenerate
tests/oracles.py after a deliberate formula change.

    python3 scripts/derive_oracles.py > tests/oracles.py
"""

import itertools

import mpmath as mp
import numpy as np

mp.mp.dps = 50
LN2 = mp.log(2)


def h(q):
    q = mp.mpf(q)
    if q in (0, 1):
        return mp.mpf(0)
    return -q * mp.log(q, 2) - (1 - q) * mp.log(1 - q, 2)


def pair_exp(eps, nu2, p):
    eps, nu2 = mp.mpf(eps), mp.mpf(nu2)
    return 1 + h(nu2) - 2 * (1 - eps) ** 2 + (1 - 2 * nu2 / 3) ** p


def cluster_exp(eps, nu1, delta, p):
    eps, nu1, delta = map(mp.mpf, (eps, nu1, delta))
    b = (1 - eps) ** 2
    return max(1 + h(delta) - b, 1 + h(nu1) - 2 * b + (1 - 2 * delta) ** p)


def first_moment(eps, n):
    b = 1 - mp.mpf(eps)
    return n * (1 - b * b) - mp.log(b * mp.sqrt(4 * mp.pi * n * LN2), 2)


def psi(m, g, xi, eta, c, p):
    m, g, xi, eta, c = map(mp.mpf, (m, g, xi, eta, c))
    return 1 + m * h((1 - xi + eta) / 2) - m * g**2 / (1 + 2 * m * p * xi**p) + c * m


def tail(x):
    return mp.erfc(mp.mpf(x) / mp.sqrt(2)) / 2


def brute_energy(n, p, seed):
    # independent triple-loop contraction over a tensor drawn with numpy Philox
    # exactly as the package documents: key [seed, 0], counter from 0, uniforms
    # ((raw >> 11) + 0.5) 2^-53 pushed through the normal quantile.
    bg = np.random.Philox(key=np.array([seed, 0], dtype=np.uint64),
                          counter=np.zeros(4, dtype=np.uint64))
    raw = bg.random_raw(n**p)
    u = [((int(r) >> 11) + 0.5) * 2.0**-53 for r in raw]
    J = [mp.sqrt(2) * mp.erfinv(2 * mp.mpf(x) - 1) for x in u]
    out = {}
    for bits in range(1 << n):
        s = [1 if (bits >> i) & 1 else -1 for i in range(n)]
        tot = mp.mpf(0)
        for k, tup in enumerate(itertools.product(range(n), repeat=p)):
            sign = 1
            for i in tup:
                sign *= s[i]
            tot += J[k] * sign
        out[bits] = tot * mp.mpf(n) ** (-mp.mpf(p + 1) / 2)
    return out


def f(x):
    return repr(float(x))


lines = ['"""Frozen reference values from scripts/derive_oracles.py (mpmath, 50 digits)."""', ""]
lines.append(f"H_ONE_SIXTH = {f(h(mp.mpf(1) / 6))}")
lines.append(f"TAYLOR_AT_ONE = {f(1 - 7 / (12 * LN2))}")
lines.append(f"PAIR_EXP_025_04_40 = {f(pair_exp('0.25', '0.4', 40))}")
lines.append(f"CLUSTER_EXP_02_015_005_50 = {f(cluster_exp('0.2', '0.15', '0.05', 50))}")
lines.append(f"LEMMA_NEG_HALF = {f(mp.log(24 * LN2 * 16) / LN2)}")
lines.append(f"ALPHA_SIGN_03_09 = {f(-1 + h((1 - mp.mpf('0.9')) / 2) + mp.mpf('0.7') ** 2)}")
lines.append(f"FIRST_MOMENT_01_100 = {f(first_moment('0.1', 100))}")
lines.append(f"PSI_M1 = {f(psi(1, '1.5', '0.9', '0.05', 0, 30))}")
lines.append(f"COARSE_3_08_20 = {f(2 * 3 * 20 * mp.mpf('0.8') ** 20)}")
lines.append(f"GAUSS_UPPER_1 = {f(mp.exp(-mp.mpf(1) / 2) / mp.sqrt(2 * mp.pi))}")
lines.append(f"TAIL_2 = {f(tail(2))}")
lines.append(f"TAIL_3 = {f(tail(3))}")
lines.append(f"TAIL_1 = {f(tail(1))}")
lines.append(f"BIV_0_1 = {f(mp.exp(-1) / (2 * mp.pi))}")
lines.append(f"XI_EPS_02 = {f(mp.mpf('0.2') ** 10 / 100)}")
lines.append(f"KAPPA_STAR_SQRT_LN2 = {f(mp.mpf(2) ** (-mp.mpf(1) / 4))}")
e = brute_energy(5, 3, 11)
lines.append("# n=5, p=3, seed=11: energies of configs 0, 1, 7, 19, 31")
lines.append("ENERGY_5_3_SEED11 = {" + ", ".join(f"{b}: {f(e[b])}" for b in (0, 1, 7, 19, 31)) + "}")
print("\n".join(lines))
