"""Multi-overlap-gap machinery: covariance algebra of m-tuples, the first
moment exponent Psi, a parameter tuner, and an exhaustive tuple search.

For an m-tuple whose pairwise overlaps sit in [xi - eta, xi], the normalized
energies sqrt(n) H(sigma^(t)) are jointly Gaussian with unit variances and
covariances (xi - eta_kl)^p.  At eta = 0 this is the equicorrelated matrix
Sigma = (1 - xi^p) I + xi^p 1 1^T.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import _rng
from .bounds import LN2, SQRT_2LN2, binary_entropy
from .disorder import EnsembleAngle, Mode, build_energy_table
from .errors import BudgetExceeded, PreconditionError

DEFAULT_TUPLE_BUDGET = 10**7


@dataclass(frozen=True)
class MogpParams:
    m: int
    gamma: float
    xi: float
    eta: float
    c_rate: float
    p: int

    def __post_init__(self):
        if self.m < 1:
            raise PreconditionError(f"m must be >= 1, got {self.m}")
        if not 0.0 < self.xi < 1.0:
            raise PreconditionError(f"xi must lie in (0, 1), got {self.xi}")
        if not 0.0 <= self.eta < self.xi:
            raise PreconditionError(f"need 0 <= eta < xi, got eta={self.eta}")
        if self.c_rate < 0:
            raise PreconditionError(f"c_rate must be >= 0, got {self.c_rate}")
        if self.p < 1:
            raise PreconditionError(f"p must be >= 1, got {self.p}")

    @property
    def optimal_enough(self) -> bool:
        """gamma sqrt(m) > 1, the regime where Psi can be made negative."""
        return self.gamma * math.sqrt(self.m) > 1.0


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    m: int
    rho: float  # xi^p
    sigma: np.ndarray
    det: float
    inverse: np.ndarray
    ones_quad: float  # 1^T Sigma^{-1} 1
    lambda_min: float
    lambda_max: float


def base_covariance(m: int, xi: float, p: int) -> CovarianceModel:
    """Equicorrelated Sigma with closed-form determinant and inverse."""
    if m < 1:
        raise PreconditionError(f"m must be >= 1, got {m}")
    if not 0.0 < xi < 1.0:
        raise PreconditionError(f"xi must lie in (0, 1), got {xi}")
    if p < 1:
        raise PreconditionError(f"p must be >= 1, got {p}")
    rho = xi**p
    a = 1.0 - rho
    if a <= 0.0:
        raise PreconditionError(f"xi^p is numerically 1 (xi={xi}, p={p}); Sigma is degenerate")
    b = 1.0 + (m - 1) * rho
    sigma = np.full((m, m), rho)
    np.fill_diagonal(sigma, 1.0)
    # Sherman-Morrison on a I + rho 1 1^T
    inv = np.full((m, m), -rho / (a * b))
    inv[np.diag_indices(m)] += 1.0 / a
    det = a ** (m - 1) * b
    ones_quad = m / (1.0 - rho + m * rho)
    return CovarianceModel(m, rho, sigma, det, inv, ones_quad, a if m > 1 else 1.0, b)


@dataclass(frozen=True)
class PerturbationBounds:
    lambda_min_lb: float
    lambda_max_ub: float
    pd_flag: bool
    coarse_min_lb: float  # 1 - 2 m p xi^p
    coarse_max_ub: float  # 1 + 2 m p xi^p
    pd_eta_threshold: float


def perturbation_bounds(m: int, xi: float, eta: float, p: int) -> PerturbationBounds:
    """Eigenvalue bracket for Sigma(eta) with entries (xi - eta_kl)^p, eta_kl <= eta.

    Each off-diagonal perturbation has modulus <= p eta xi^{p-1}, so the
    Frobenius norm of the perturbation is <= m p eta xi^{p-1} and
    Wielandt-Hoffman moves every eigenvalue by at most that much.
    """
    if not 0.0 <= eta < xi < 1.0:
        raise PreconditionError(f"need 0 <= eta < xi < 1, got eta={eta}, xi={xi}")
    rho = xi**p
    shift = m * p * eta * xi ** (p - 1)
    lo = (1.0 - rho) - shift if m > 1 else 1.0
    hi = 1.0 + (m - 1) * rho + shift if m > 1 else 1.0
    thr = (1.0 - rho) / (m * p * xi ** (p - 1))
    coarse = 2.0 * m * p * rho
    return PerturbationBounds(lo, hi, bool(eta < thr), 1.0 - coarse, 1.0 + coarse, thr)


def perturbed_covariance(m: int, xi: float, p: int, etas) -> np.ndarray:
    """Sigma(eta): unit diagonal, (xi - eta_kl)^p off the diagonal.

    ``etas`` is either an m x m symmetric array or the m(m-1)/2 upper-triangle
    entries in row-major order.
    """
    e = np.asarray(etas, dtype=np.float64)
    if e.ndim == 2:
        if e.shape != (m, m) or not np.allclose(e, e.T):
            raise PreconditionError("eta matrix must be m x m and symmetric")
        mat = e.copy()
    else:
        if e.size != m * (m - 1) // 2:
            raise PreconditionError(f"expected {m * (m - 1) // 2} pair perturbations, got {e.size}")
        mat = np.zeros((m, m))
        mat[np.triu_indices(m, 1)] = e
        mat = mat + mat.T
    sigma = (xi - mat) ** p
    np.fill_diagonal(sigma, 1.0)
    return sigma


def psi_exponent(params: MogpParams) -> float:
    """Psi = 1 + m h((1-xi+eta)/2) - m gamma^2/(1 + 2 m p xi^p) + c m."""
    m, g, xi, eta, c, p = (params.m, params.gamma, params.xi, params.eta,
                           params.c_rate, params.p)
    q = (1.0 - xi + eta) / 2.0
    return 1.0 + m * binary_entropy(q) - m * g * g / (1.0 + 2.0 * m * p * xi**p) + c * m


def psi_limit(m: int, gamma: float, c_rate: float = 0.0) -> float:
    """Psi as eta -> 0, xi -> 1 and p -> infinity (xi fixed below 1)."""
    return 1.0 - m * gamma * gamma + c_rate * m


@dataclass(frozen=True)
class TuneResult:
    xi: float
    eta: float
    c_rate: float
    p_star: int
    psi: float
    delta: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["c"] = d.pop("c_rate")
        return d


def xi_candidates() -> list[float]:
    """Descending xi grid: 0.99, 0.98, ..., 0.01, refined upward toward 1 as
    1 - k 10^-d for d = 3..9."""
    vals = {round(k / 100, 12) for k in range(1, 100)}
    for d in range(3, 10):
        for k in range(1, 10):
            vals.add(1.0 - k * 10.0**-d)
    return sorted(vals, reverse=True)


def _min_tail_p(pred, xi: float) -> int:
    """Smallest p such that pred holds for every p' >= p, assuming pred is
    'p xi^p small', which is monotone beyond the peak of p xi^p."""
    peak = max(2, math.ceil(1.0 / math.log(1.0 / xi)))
    if pred(peak):
        return 2  # the peak is the worst case
    lo, hi = peak, peak * 2
    while not pred(hi):
        lo, hi = hi, hi * 2
        if hi > 1 << 60:
            raise PreconditionError("no finite p satisfies the gamma-term condition")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def tune_mogp(m: int, gamma: float) -> TuneResult:
    """Parameters with Psi <= -(m gamma^2 - 1)/8.

    With delta = m gamma^2 - 1: pick eta = xi/2^k (largest such) so that
    m h((1-xi+eta)/2) <= delta/4, set c = delta/(8m), and take the smallest p
    beyond which m gamma^2/(1 + 2 m p xi^p) >= 1 + delta/2.  Among xi on the
    grid the one giving the smallest p is returned.
    """
    if m < 1:
        raise PreconditionError(f"m must be >= 1, got {m}")
    delta = m * gamma * gamma - 1.0
    if not delta > 0 or not gamma > 0:
        raise PreconditionError(f"need gamma > 1/sqrt(m); got gamma={gamma}, m={m}")
    c = delta / (8.0 * m)
    target = delta / 4.0
    best = None
    for xi in xi_candidates():
        eta = None
        for k in range(1, 64):
            e = xi / 2.0**k
            if m * binary_entropy((1.0 - xi + e) / 2.0) <= target:
                eta = e
                break
        if eta is None:
            continue

        def pred(p, xi=xi):
            return m * gamma * gamma / (1.0 + 2.0 * m * p * xi**p) >= 1.0 + delta / 2.0

        p_star = _min_tail_p(pred, xi)
        params = MogpParams(m, gamma, xi, eta, c, p_star)
        psi = psi_exponent(params)
        while psi > -delta / 8.0:  # guard against rounding at equality
            params = MogpParams(m, gamma, xi, eta, c, params.p + 1)
            psi = psi_exponent(params)
        if best is None or params.p < best.p_star:
            best = TuneResult(xi, eta, c, params.p, psi, delta)
    if best is None:
        raise PreconditionError(f"no xi on the grid makes the entropy term small for m={m}")
    return best


@dataclass(frozen=True)
class ProbabilityTerms:
    log2_bound: float
    log2_prefactor: float
    log2_det: float
    ones_quad: float
    inv_ones: np.ndarray


def probability_terms(params: MogpParams, etas, n: int) -> ProbabilityTerms:
    """Savage upper bound on P[sqrt(n) H(sigma^(t)) >= gamma sqrt(2 n ln 2) for all t].

    With t = gamma sqrt(2 n ln 2) 1 and u = Sigma(eta)^{-1} 1 > 0 the bound is
    (4 pi n gamma^2 ln 2)^{-m/2} |Sigma|^{-1/2} prod(u_i)^{-1} 2^{-gamma^2 n 1^T u}.
    """
    m, xi, p = params.m, params.xi, params.p
    if n < 1:
        raise PreconditionError(f"n must be >= 1, got {n}")
    e = np.asarray(etas, dtype=np.float64)
    if e.size and (e.min() < 0 or e.max() > params.eta + 1e-15):
        raise PreconditionError(f"pair perturbations must lie in [0, eta={params.eta}]")
    sigma = perturbed_covariance(m, xi, p, e) if m > 1 else np.ones((1, 1))
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise PreconditionError("Sigma(eta) is not positive definite; eta is too large")
    u = np.linalg.solve(sigma, np.ones(m))
    if not np.all(u > 0):
        raise PreconditionError("Sigma(eta)^{-1} 1 is not entrywise positive; Savage bound does not apply")
    log2_det = 2.0 * float(np.log2(np.diag(chol)).sum())
    quad = float(u.sum())
    g2 = params.gamma**2
    pref = -0.5 * m * math.log2(4.0 * math.pi * n * g2 * LN2) - 0.5 * log2_det - float(np.log2(u).sum())
    return ProbabilityTerms(pref - g2 * n * quad, pref, log2_det, quad, u)


def probability_upper_bound(params: MogpParams, etas, n: int) -> float:
    """log2 of the Savage upper bound; see :func:`probability_terms`."""
    return probability_terms(params, etas, n).log2_bound


# ---------------------------------------------------------------------------
# empirical search


@dataclass(frozen=True)
class SearchResult:
    count: int
    tuples_examined: int
    coverage: float
    candidate_sizes: list
    exhaustive: bool
    estimated_total: float

    def to_dict(self) -> dict:
        return asdict(self)


def _count_tuples(cands: list[np.ndarray], dlo: float, dhi: float) -> int:
    """Ordered tuples (a_1..a_m), a_t in cands[t], pairwise d_H in [dlo, dhi]."""

    def rec(t: int, pools: list[np.ndarray]) -> int:
        if t == len(pools) - 1:
            return int(pools[t].size)
        total = 0
        head = pools[t]
        for a in head:
            rest = []
            for pool in pools[t + 1:]:
                d = np.bitwise_count(pool ^ a)
                rest.append(pool[(d >= dlo) & (d <= dhi)])
            if all(r.size for r in rest):
                total += rec(0, rest) if len(rest) > 1 else int(rest[0].size)
        return total

    if any(c.size == 0 for c in cands):
        return 0
    if len(cands) == 1:
        return int(cands[0].size)
    return rec(0, cands)


def empirical_mogp_search(n: int, p: int, m: int, gamma: float, xi: float, eta: float,
                          angles, seed: int, mode=Mode.REM_LIMIT, workers: int = 1,
                          tuple_budget: int = DEFAULT_TUPLE_BUDGET,
                          samples: int = 10**5) -> SearchResult:
    """Count m-tuples that are gamma-optimal for correlated instances and have
    pairwise overlaps in [xi - eta, xi].

    Instance t uses cos(tau) J0 + sin(tau) J_t for some tau in ``angles``;
    energies follow by linearity from the tables of J0 and J_t, with J_t
    seeded by ``derive_seed(seed, t)``.  The search is exhaustive when the
    product of candidate-set sizes is within ``tuple_budget``; otherwise
    ``samples`` uniform tuples are drawn and the coverage is reported.
    """
    if m < 1:
        raise PreconditionError(f"m must be >= 1, got {m}")
    if not (0.0 <= eta <= xi <= 1.0):
        raise PreconditionError(f"need 0 <= eta <= xi <= 1, got xi={xi}, eta={eta}")
    angles = [a if isinstance(a, EnsembleAngle) else EnsembleAngle(float(a)) for a in angles]
    if not angles:
        raise PreconditionError("at least one angle is required")
    if len(angles) > 64:
        raise PreconditionError("at most 64 angles are supported")
    base = build_energy_table(n, p, seed, mode, workers)
    thr = gamma * SQRT_2LN2
    cands = []
    for t in range(1, m + 1):
        fresh = build_energy_table(n, p, _rng.derive_seed(seed, t), mode, workers)
        hit = np.zeros(1 << n, dtype=bool)
        for a in angles:
            hit |= (a.cos * base.energies + a.sin * fresh.energies) >= thr
        cands.append(np.flatnonzero(hit).astype(np.uint64))
    sizes = [int(c.size) for c in cands]
    # overlap in [xi - eta, xi]  <=>  d_H in [n(1-xi)/2, n(1-xi+eta)/2]
    dlo = n * (1.0 - xi) / 2.0 - 1e-9
    dhi = n * (1.0 - xi + eta) / 2.0 + 1e-9
    space = math.prod(sizes)
    if space <= tuple_budget:
        if workers > 1 and m > 1 and sizes[0] > 1:
            parts = np.array_split(cands[0], min(workers, sizes[0]))
            with ThreadPoolExecutor(max_workers=workers) as pool:
                count = sum(pool.map(lambda part: _count_tuples([part] + cands[1:], dlo, dhi), parts))
        else:
            count = _count_tuples(cands, dlo, dhi)
        return SearchResult(count, space, 1.0, sizes, True, float(count))
    if samples <= 0:
        raise BudgetExceeded(f"{space} candidate tuples exceed the budget {tuple_budget}")
    u = _rng.uniforms(seed, _rng.STREAM_MC, 0, samples * m).reshape(samples, m)
    picks = np.stack([c[np.minimum((u[:, t] * c.size).astype(np.int64), c.size - 1)]
                      for t, c in enumerate(cands)], axis=1)
    ok = np.ones(samples, dtype=bool)
    for i, j in itertools.combinations(range(m), 2):
        d = np.bitwise_count(picks[:, i] ^ picks[:, j])
        ok &= (d >= dlo) & (d <= dhi)
    hits = int(ok.sum())
    return SearchResult(hits, samples, samples / space, sizes, False, hits / samples * space)
