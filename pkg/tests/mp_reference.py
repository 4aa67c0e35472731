"""High-precision (mpmath, 40 digits) reference forms of the closed-form
exponents and covariance identities.  Deliberately does not import pspin."""

import mpmath as mp

mp.mp.dps = 40
LN2 = mp.log(2)


def h(q):
    q = mp.mpf(q)
    if q == 0 or q == 1:
        return mp.mpf(0)
    return -q * mp.log(q, 2) - (1 - q) * mp.log(1 - q, 2)


def taylor_upper(a):
    a = mp.mpf(a)
    return 1 - a**2 / (2 * LN2) - a**4 / (12 * LN2)


def pair_exponent(eps, nu2, p):
    eps, nu2 = mp.mpf(eps), mp.mpf(nu2)
    return 1 + h(nu2) - 2 * (1 - eps) ** 2 + (1 - 2 * nu2 / 3) ** p


def cluster_exponent(eps, nu1, delta, p):
    eps, nu1, delta = mp.mpf(eps), mp.mpf(nu1), mp.mpf(delta)
    b = (1 - eps) ** 2
    return max(1 + h(delta) - b, 1 + h(nu1) - 2 * b + (1 - 2 * delta) ** p)


def xi_eps(eps):
    eps = mp.mpf(eps)
    return min(eps**10, (1 - eps) ** 10) / 100


def alpha_sign(eps, alpha):
    return -1 + h((1 - mp.mpf(alpha)) / 2) + (1 - mp.mpf(eps)) ** 2


def lemma_neg(alpha):
    alpha = mp.mpf(alpha)
    return mp.log(24 * LN2 / alpha**4) / mp.log(1 / alpha)


def c1(eps):
    return (1 - mp.mpf(eps)) * mp.sqrt(4 * mp.pi * LN2)


def band_quadratic(g, beta):
    g, beta = mp.mpf(g), mp.mpf(beta)
    return (1 - g * g) * LN2 + beta * g * mp.sqrt(2 * LN2)


def gamma_star(beta):
    return mp.mpf(beta) / mp.sqrt(2 * LN2)


def kappa_star(beta):
    return (LN2 / (2 * mp.mpf(beta) ** 2)) ** mp.mpf(0.25)


def first_moment(eps, n):
    b = 1 - mp.mpf(eps)
    return n * (1 - b * b) - mp.log(b * mp.sqrt(4 * mp.pi * n * LN2), 2)


def psi(m, g, xi, eta, c, p):
    g, xi, eta, c = mp.mpf(g), mp.mpf(xi), mp.mpf(eta), mp.mpf(c)
    return 1 + m * h((1 - xi + eta) / 2) - m * g**2 / (1 + 2 * m * p * xi**p) + c * m


def equicorrelated(m, xi, p):
    rho = mp.mpf(xi) ** p
    return mp.matrix([[1 if i == j else rho for j in range(m)] for i in range(m)])


def perturbation(m, xi, eta, p):
    xi, eta = mp.mpf(xi), mp.mpf(eta)
    rho = xi**p
    shift = m * p * eta * xi ** (p - 1)
    return {"lo": 1 - rho - shift, "hi": 1 + (m - 1) * rho + shift,
            "thr": (1 - rho) / (m * p * xi ** (p - 1)), "coarse": 2 * m * p * rho}


def savage_log2(m, g, xi, p, etas, n):
    """log2 of the Savage bound at t = g sqrt(2 n ln 2) 1 for Sigma(eta)."""
    xi, g = mp.mpf(xi), mp.mpf(g)
    s = mp.matrix(m, m)
    k = 0
    for i in range(m):
        s[i, i] = 1
        for j in range(i + 1, m):
            s[i, j] = s[j, i] = (xi - mp.mpf(etas[k])) ** p
            k += 1
    u = mp.lu_solve(s, mp.matrix([1] * m))
    if any(x <= 0 for x in u):
        return None
    pref = (-mp.mpf(m) / 2 * mp.log(4 * mp.pi * n * g * g * LN2, 2)
            - mp.log(mp.det(s), 2) / 2 - sum(mp.log(x, 2) for x in u))
    return pref - g * g * n * sum(u)
