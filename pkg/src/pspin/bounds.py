"""Closed-form exponents and constants behind the clustering and shattering
arguments.

Exponents are base 2: a count or probability bounded by ``2^{n x}`` is reported
as ``x``.  All functions are pure and cheap.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import PreconditionError

LN2 = math.log(2.0)
SQRT_2LN2 = math.sqrt(2.0 * LN2)
EPS_MAX = 1.0 - 1.0 / math.sqrt(2.0)
NU2_GRID = [k / 100 for k in range(1, 50)]
DELTA_GRID_STEP = 0.001
ALPHA_GRID = [k / 100 for k in range(1, 100)]
DEFAULT_IOTA = 0.25
P_SEARCH_MAX = 1 << 20


def binary_entropy(q: float) -> float:
    """h(q) in bits, with h(0) = h(1) = 0."""
    if not 0.0 <= q <= 1.0:
        raise PreconditionError(f"q must lie in [0, 1], got {q}")
    if q == 0.0 or q == 1.0:
        return 0.0
    return -q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q)


def entropy_taylor_upper(alpha: float) -> float:
    """1 - a^2/(2 ln 2) - a^4/(12 ln 2), an upper bound on h((1 - a)/2)."""
    if not -1.0 <= alpha <= 1.0:
        raise PreconditionError(f"alpha must lie in [-1, 1], got {alpha}")
    a2 = alpha * alpha
    return 1.0 - a2 / (2.0 * LN2) - a2 * a2 / (12.0 * LN2)


def _check_eps(epsilon: float, upper: float = 1.0) -> None:
    if not 0.0 < epsilon < upper:
        raise PreconditionError(f"epsilon must lie in (0, {upper:.6g}), got {epsilon}")


def _check_p(p) -> None:
    if not (isinstance(p, (int,)) or float(p).is_integer()) or p < 1:
        raise PreconditionError(f"p must be a positive integer, got {p}")


def pair_ogp_exponent(epsilon: float, nu2: float, p: int | float) -> float:
    """1 + h(nu2) - 2(1-eps)^2 + (1 - 2 nu2/3)^p, with nu1 = nu2/3.

    ``p = math.inf`` gives the limit 1 + h(nu2) - 2(1-eps)^2.
    """
    if not 0.0 <= epsilon < 1.0:
        raise PreconditionError(f"epsilon must lie in [0, 1), got {epsilon}")
    if not 0.0 < nu2 <= 0.5:
        raise PreconditionError(f"nu2 must lie in (0, 1/2], got {nu2}")
    tail = 0.0 if p == math.inf else (1.0 - 2.0 * nu2 / 3.0) ** p
    return 1.0 + binary_entropy(nu2) - 2.0 * (1.0 - epsilon) ** 2 + tail


@dataclass(frozen=True)
class ClusterSizeExponent:
    value: float
    first: float  # 1 + h(delta) - (1-eps)^2
    second: float  # 1 + h(nu1) - 2(1-eps)^2 + (1-2delta)^p
    active: str  # "first" or "second"


def cluster_size_exponent(epsilon: float, nu1: float, delta: float,
                          p: int | float) -> ClusterSizeExponent:
    """Exponent c bounding the number of pairs in S(eps) at distance <= nu1 n."""
    if not 0.0 <= epsilon < 1.0:
        raise PreconditionError(f"epsilon must lie in [0, 1), got {epsilon}")
    if not 0.0 < delta < nu1 < 0.5:
        raise PreconditionError(f"need 0 < delta < nu1 < 1/2, got delta={delta}, nu1={nu1}")
    b = (1.0 - epsilon) ** 2
    first = 1.0 + binary_entropy(delta) - b
    tail = 0.0 if p == math.inf else (1.0 - 2.0 * delta) ** p
    second = 1.0 + binary_entropy(nu1) - 2.0 * b + tail
    if first >= second:
        return ClusterSizeExponent(first, first, second, "first")
    return ClusterSizeExponent(second, first, second, "second")


def xi_eps(epsilon: float) -> float:
    """Xi(eps) = min(eps^10, (1-eps)^10) / 100."""
    return min(epsilon**10, (1.0 - epsilon) ** 10) / 100.0


def gamma_margin(epsilon: float, nu1: float) -> float:
    x = xi_eps(epsilon)
    return min((1.0 - binary_entropy(nu1) - 2.0 * x) / 5.0,
               (1.0 - (1.0 - epsilon) ** 2 - 2.0 * x) / 5.0)


def search_nu2(epsilon: float) -> float:
    """Smallest nu2 on {0.01k} whose p -> infinity pair exponent is negative."""
    for nu2 in NU2_GRID:
        if pair_ogp_exponent(epsilon, nu2, math.inf) < 0:
            return nu2
    raise PreconditionError(
        f"no nu2 in {{0.01k}} makes the pair exponent negative at epsilon={epsilon}")


def search_delta(rhs: float, nu1: float) -> float:
    """Largest delta on {0.001k}, delta < nu1, with h(delta) < rhs."""
    best = None
    k = 1
    while k * DELTA_GRID_STEP < nu1:
        d = round(k * DELTA_GRID_STEP, 12)
        if binary_entropy(d) < rhs:
            best = d
        else:
            break  # h is increasing on (0, 1/2)
        k += 1
    if best is None:
        raise PreconditionError(f"no delta on the 0.001 grid satisfies h(delta) < {rhs:.6g}")
    return best


def _min_p(pred, start: int = 2) -> int:
    p = start
    while not pred(p):
        p += 1
        if p > P_SEARCH_MAX:
            raise PreconditionError("no finite p found below the search cap")
    return p


@dataclass(frozen=True)
class ClusteringConstants:
    epsilon: float
    nu1: float
    nu2: float
    delta: float
    xi_eps: float
    gamma_margin: float
    c1: float
    c2: float
    p_hat: int
    c_cluster: float  # cluster-size exponent at p_hat
    c_branch: str

    def to_dict(self) -> dict:
        return asdict(self)


def clustering_constants(epsilon: float, nu1: float | None = None,
                         nu2: float | None = None) -> ClusteringConstants:
    """Constants for the exponentially-many-clusters statement at this epsilon.

    nu2 defaults to the grid search of :func:`search_nu2` and nu1 to nu2/3.
    P-hat is the smallest p with a negative pair exponent and
    (1-2 delta)^p < (1 - h(nu1))/5; if c1 - c2 > Xi(eps) still fails there
    (possible only by a margin of 2 Xi/5), p is raised until it holds.
    """
    _check_eps(epsilon, EPS_MAX)
    if nu2 is None:
        nu2 = search_nu2(epsilon) if nu1 is None else 3.0 * nu1
    if nu1 is None:
        nu1 = nu2 / 3.0
    if not math.isclose(nu1, nu2 / 3.0, rel_tol=1e-12):
        raise PreconditionError(f"need nu1 = nu2/3, got nu1={nu1}, nu2={nu2}")
    if not 0.0 < nu2 < 0.5:
        raise PreconditionError(f"nu2 must lie in (0, 1/2), got {nu2}")
    if pair_ogp_exponent(epsilon, nu2, math.inf) >= 0:
        raise PreconditionError(f"pair exponent is not negative for any p at nu2={nu2}")
    x = xi_eps(epsilon)
    g = gamma_margin(epsilon, nu1)
    b = (1.0 - epsilon) ** 2
    delta = search_delta(1.0 - b - 2.0 * x - 4.0 * g, nu1)
    c1 = epsilon * (2.0 - epsilon) - g
    h1 = binary_entropy(nu1)

    def c2_at(p):
        return cluster_size_exponent(epsilon, nu1, delta, p).value / 2.0 + g

    p_hat = _min_p(lambda p: pair_ogp_exponent(epsilon, nu2, p) < 0
                   and (1.0 - 2.0 * delta) ** p < (1.0 - h1) / 5.0)
    p_hat = _min_p(lambda p: c1 - c2_at(p) > x, p_hat)
    cs = cluster_size_exponent(epsilon, nu1, delta, p_hat)
    c2 = cs.value / 2.0 + g
    assert c1 - c2 > x
    return ClusteringConstants(epsilon, nu1, nu2, delta, x, g, c1, c2, p_hat,
                               cs.value, cs.active)


@dataclass(frozen=True)
class MomentRegimeConfig:
    alpha_star: float
    iota: float = DEFAULT_IOTA

    def __post_init__(self):
        if not 0.0 < self.alpha_star < 1.0:
            raise PreconditionError(f"alpha_star must lie in (0, 1), got {self.alpha_star}")
        if not 0.0 < self.iota < 0.5:
            raise PreconditionError(f"iota must lie in (0, 1/2), got {self.iota}")

    @classmethod
    def default(cls, epsilon: float) -> "MomentRegimeConfig":
        """Largest alpha* on {0.01k} satisfying the sign condition; iota = 1/4."""
        ok = [a for a in ALPHA_GRID if alpha_star_sign(epsilon, a) < 0]
        if not ok:
            raise PreconditionError(f"no alpha* on the grid works for epsilon={epsilon}")
        return cls(max(ok), DEFAULT_IOTA)


def alpha_star_sign(epsilon: float, alpha_star: float) -> float:
    """-1 + h((1 - alpha*)/2) + (1-eps)^2; must be negative."""
    return -1.0 + binary_entropy((1.0 - alpha_star) / 2.0) + (1.0 - epsilon) ** 2


def lemma_neg_p_threshold(alpha_star: float) -> float:
    """ln(24 ln 2 / alpha*^4) / ln(1/alpha*)."""
    return math.log(24.0 * LN2 / alpha_star**4) / math.log(1.0 / alpha_star)


def c1_constant(epsilon: float) -> float:
    """C_1 = (1-eps) sqrt(4 pi ln 2)."""
    return (1.0 - epsilon) * math.sqrt(4.0 * math.pi * LN2)


@dataclass(frozen=True)
class MomentRegimeVerdict:
    alpha_star_ok: bool
    p_ok_lemma_neg: bool
    p_ok_iota: bool
    alpha_star_value: float
    p_threshold: float

    @property
    def overall(self) -> bool:
        return self.alpha_star_ok and self.p_ok_lemma_neg and self.p_ok_iota


def second_moment_regime(epsilon: float, cfg: MomentRegimeConfig | None, p: int) -> MomentRegimeVerdict:
    _check_eps(epsilon)
    cfg = MomentRegimeConfig.default(epsilon) if cfg is None else cfg
    sign = alpha_star_sign(epsilon, cfg.alpha_star)
    thr = lemma_neg_p_threshold(cfg.alpha_star)
    return MomentRegimeVerdict(sign < 0, p >= thr, p > 1.0 / cfg.iota, sign, thr)


def band_quadratic(gamma: float, beta: float) -> float:
    """phi(gamma) = (1 - gamma^2) ln 2 + beta gamma sqrt(2 ln 2)."""
    return (1.0 - gamma * gamma) * LN2 + beta * gamma * SQRT_2LN2


def gamma_star(beta: float) -> float:
    if not beta > 0:
        raise PreconditionError(f"beta must be > 0, got {beta}")
    return beta / SQRT_2LN2


def kappa_star(beta: float) -> float:
    """(ln 2 / (2 beta^2))^{1/4}."""
    if not beta > 0:
        raise PreconditionError(f"beta must be > 0, got {beta}")
    return (LN2 / (2.0 * beta * beta)) ** 0.25


def first_moment_count(epsilon: float, n: int) -> float:
    """log2 of 2^{n - n(1-eps)^2} / ((1-eps) sqrt(4 pi n ln 2))."""
    _check_eps(epsilon)
    if n < 1:
        raise PreconditionError(f"n must be >= 1, got {n}")
    b = 1.0 - epsilon
    return n * (1.0 - b * b) - math.log2(b * math.sqrt(4.0 * math.pi * n * LN2))


def exponent_report(epsilon: float, p: int, beta: float | None = None,
                    n: int | None = None, nu1: float | None = None,
                    nu2: float | None = None) -> dict:
    """Every closed-form constant at a parameter point, as name -> entry."""
    entries = []

    def add(name, formula, value):
        entries.append({"name": name, "formula": formula, "value": value})

    cc = clustering_constants(epsilon, nu1, nu2)
    add("xi_eps", "min(eps^10,(1-eps)^10)/100", cc.xi_eps)
    add("nu2", "smallest 0.01k with 1+h(nu2)-2(1-eps)^2 < 0", cc.nu2)
    add("nu1", "nu2/3", cc.nu1)
    add("gamma", "min((1-h(nu1)-2Xi)/5,(1-(1-eps)^2-2Xi)/5)", cc.gamma_margin)
    add("delta", "largest 0.001k < nu1 with h(delta) < 1-(1-eps)^2-2Xi-4gamma", cc.delta)
    add("c1", "eps(2-eps)-gamma", cc.c1)
    add("c2", "c/2+gamma at p_hat", cc.c2)
    add("p_hat", "min p: pair exponent < 0, (1-2delta)^p < (1-h(nu1))/5", cc.p_hat)
    add("pair_ogp_exponent", "1+h(nu2)-2(1-eps)^2+(1-2nu2/3)^p",
        pair_ogp_exponent(epsilon, cc.nu2, p))
    cs = cluster_size_exponent(epsilon, cc.nu1, cc.delta, p)
    add("cluster_size_exponent", f"max of two branches ({cs.active} active)", cs.value)
    cfg = MomentRegimeConfig.default(epsilon)
    v = second_moment_regime(epsilon, cfg, p)
    add("alpha_star", "largest 0.01k with -1+h((1-a)/2)+(1-eps)^2 < 0", cfg.alpha_star)
    add("lemma_neg_p_threshold", "ln(24 ln2/a^4)/ln(1/a)", v.p_threshold)
    add("second_moment_regime_ok", "alpha*, lemma-neg and p > 1/iota checks", v.overall)
    add("C1", "(1-eps)sqrt(4 pi ln2)", c1_constant(epsilon))
    if n is not None:
        add("first_moment_log2", "n(1-(1-eps)^2)-log2((1-eps)sqrt(4 pi n ln2))",
            first_moment_count(epsilon, n))
    if beta is not None:
        add("gamma_star", "beta/sqrt(2 ln2)", gamma_star(beta))
        add("kappa_star", "(ln2/(2 beta^2))^(1/4)", kappa_star(beta))
        add("phi_gamma_star", "(1-g^2)ln2+beta g sqrt(2ln2) at g=gamma*",
            band_quadratic(gamma_star(beta), beta))
    params = {"epsilon": epsilon, "p": p, "beta": beta, "n": n}
    return {"params": params, "constants": entries}
