"""Gaussian tail bounds and Monte Carlo orthant estimates used to test them."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from .bounds import c1_constant
from .errors import FactorizationError, PreconditionError

MC_CHUNK = 1 << 16  # antithetic pairs per chunk; fixed so workers do not matter
MC_SLACK = 4.0


@dataclass(frozen=True)
class TailSandwich:
    lower: float
    upper: float
    estimate: float | None = None
    stderr: float | None = None
    at: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower > self.upper:
            raise PreconditionError(f"lower {self.lower} exceeds upper {self.upper}")

    def with_estimate(self, estimate: float, stderr: float = 0.0) -> "TailSandwich":
        return TailSandwich(self.lower, self.upper, estimate, stderr, self.at)

    def contains(self, slack: float = MC_SLACK) -> bool:
        """lower - slack*se <= estimate <= upper + slack*se."""
        if self.estimate is None:
            raise PreconditionError("no estimate to check")
        se = self.stderr or 0.0
        # relative float slack for exact oracles
        tol = 1e-12 * max(abs(self.upper), abs(self.estimate))
        return (self.lower - slack * se - tol <= self.estimate
                <= self.upper + slack * se + tol)


def std_normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def upper_tail(x: float) -> float:
    """P[Z > x] for standard normal Z (the erfc oracle)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def gauss_tail_bounds(x: float) -> TailSandwich:
    """phi(x)(1/x - 1/x^3) <= P[Z > x] <= phi(x)/x, lower clamped at 0."""
    if not x > 0:
        raise PreconditionError(f"x must be > 0, got {x}")
    ph = std_normal_pdf(x)
    lower = max(0.0, ph * (1.0 / x - 1.0 / x**3))
    return TailSandwich(lower, ph / x, at={"x": x})


def bivariate_tail_bound(t: float, rho: float) -> float:
    """Upper bound on P[Z > t, Z_rho > t] for standard normals with correlation rho."""
    if not t > 0:
        raise PreconditionError(f"t must be > 0, got {t}")
    if not -1.0 < rho < 1.0:
        raise PreconditionError(f"rho must lie in (-1, 1), got {rho}")
    return ((1.0 + rho) ** 2 / (2.0 * math.pi * t * t * math.sqrt(1.0 - rho * rho))
            * math.exp(-t * t / (1.0 + rho)))


def p_alpha_bound(alpha: float, p: int, n: int, epsilon: float) -> float:
    """Bound on p(alpha) = P[both energies >= (1-eps) sqrt(2 ln 2)] at overlap alpha:
    (1 + a^p)^2 / (C1^2 n sqrt(1 - a^{2p})) * 2^{-2n(1-eps)^2/(1+a^p)}."""
    r = alpha**p
    if not -1.0 < r < 1.0:
        raise PreconditionError(f"alpha^p must lie in (-1, 1), got {r}")
    c1 = c1_constant(epsilon)
    return ((1.0 + r) ** 2 / (c1 * c1 * n * math.sqrt(1.0 - r * r))
            * 2.0 ** (-2.0 * n * (1.0 - epsilon) ** 2 / (1.0 + r)))


def _as_pd(sigma) -> tuple[np.ndarray, np.ndarray]:
    s = np.atleast_2d(np.asarray(sigma, dtype=np.float64))
    if s.shape[0] != s.shape[1] or not np.allclose(s, s.T, rtol=0, atol=1e-12):
        raise PreconditionError("covariance must be a symmetric square matrix")
    try:
        chol = np.linalg.cholesky(s)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError("covariance is not positive definite") from exc
    return s, chol


def savage_bounds(sigma, t) -> TailSandwich:
    """Two-sided bound on P[X >= t] for X ~ N(0, Sigma), valid when
    a = Sigma^{-1} t > 0: with phi the N(0, Sigma) density,
    upper = phi(t) / prod(a) and lower = upper (1 - <1/a, Sigma^{-1} (1/a)>)."""
    s, chol = _as_pd(sigma)
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    m = s.shape[0]
    if t.size != m:
        raise PreconditionError(f"threshold has length {t.size}, covariance is {m}x{m}")
    a = np.linalg.solve(s, t)
    if not np.all(a > 0):
        raise PreconditionError("Sigma^{-1} t is not entrywise positive; Savage bound does not apply")
    log_det = 2.0 * float(np.log(np.diag(chol)).sum())
    log_phi = -0.5 * m * math.log(2.0 * math.pi) - 0.5 * log_det - 0.5 * float(t @ a)
    upper = math.exp(log_phi - float(np.log(a).sum()))
    w = 1.0 / a
    factor = 1.0 - float(w @ np.linalg.solve(s, w))
    return TailSandwich(max(0.0, upper * factor), upper, at={"t": t.tolist()})


def paley_zygmund(mean: float, second_moment: float, theta: float) -> float:
    """(1 - theta)^2 E[Z]^2 / E[Z^2], a lower bound on P[Z > theta E[Z]]."""
    if mean < 0:
        raise PreconditionError(f"mean must be >= 0, got {mean}")
    if not second_moment > 0:
        raise PreconditionError(f"second moment must be > 0, got {second_moment}")
    if second_moment < mean * mean * (1.0 - 1e-12):
        raise PreconditionError("second moment below mean^2 violates Jensen; moments are corrupt")
    if not 0.0 <= theta <= 1.0:
        raise PreconditionError(f"theta must lie in [0, 1], got {theta}")
    return min(1.0, (1.0 - theta) ** 2 * mean * mean / second_moment)


def mc_orthant(sigma, t, samples: int, seed: int, workers: int = 1,
               min_samples: int = 10**4) -> tuple[float, float]:
    """Plain Monte Carlo estimate of P[X >= t], X ~ N(0, Sigma), with stderr.

    Draws come in antithetic pairs (X, -X); the stderr is computed from the
    pair averages.  ``samples`` counts draws of X, rounded down to pairs.
    Chunks of pairs use disjoint ranges of one counter stream, so the result
    does not depend on ``workers``.
    """
    s, chol = _as_pd(sigma)
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    m = s.shape[0]
    if t.size != m:
        raise PreconditionError(f"threshold has length {t.size}, covariance is {m}x{m}")
    if samples < min_samples:
        raise PreconditionError(f"need at least {min_samples} samples, got {samples}")
    pairs = samples // 2

    def work(k):
        a = k * MC_CHUNK
        b = min(a + MC_CHUNK, pairs)
        z = _rng.normals(seed, _rng.STREAM_MC, a * m, (b - a) * m).reshape(b - a, m)
        x = z @ chol.T
        h = np.all(x >= t, axis=1).astype(np.int64) + np.all(-x >= t, axis=1).astype(np.int64)
        return int(h.sum()), int((h * h).sum())

    chunks = range((pairs + MC_CHUNK - 1) // MC_CHUNK)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(k) for k in chunks]
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean_pair = s1 / (2.0 * pairs)
    # pair average y = h/2; var(y) = E[y^2] - E[y]^2
    var = max(0.0, s2 / (4.0 * pairs) - mean_pair**2)
    return mean_pair, math.sqrt(var / pairs)


# ---------------------------------------------------------------------------
# the check grid behind `tails check`

GAUSS_GRID = [round(0.25 * k, 2) for k in range(2, 25)]  # x = 0.5 .. 6
BIV_T_GRID = [1.0, 1.25, 1.5, 1.75, 2.0]
BIV_RHO_GRID = [-0.5, -0.25, 0.0, 0.25, 0.5, 0.75]
SAVAGE_POINTS = 1000
SAVAGE_MIN_EXPECTED_HITS = 200


def random_correlation(m: int, rng: np.random.Generator) -> np.ndarray:
    """A random correlation matrix with mostly positive off-diagonal entries."""
    f = rng.normal(size=(m, m)) + rng.uniform(0.0, 1.5)
    s = f @ f.T + m * np.eye(m)
    d = np.sqrt(np.diag(s))
    return s / np.outer(d, d)


def savage_grid(samples: int, seed: int, points: int = SAVAGE_POINTS):
    """Random (Sigma, t), m <= 5, that pass the positivity check and whose upper
    bound times the sample count is at least 200 (so the MC estimate is
    informative)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < points:
        m = int(rng.integers(1, 6))
        s = random_correlation(m, rng)
        t = rng.uniform(0.5, 2.5, size=m)
        try:
            sw = savage_bounds(s, t)
        except PreconditionError:
            continue
        if sw.upper * samples >= SAVAGE_MIN_EXPECTED_HITS:
            out.append((s, t))
    return out


def tails_check(samples: int = 200_000, seed: int = 0, workers: int = 1,
                savage_points: int = SAVAGE_POINTS) -> list[dict]:
    """Evaluate every bound on its grid against its oracle.

    Gaussian tails use the erfc oracle; bivariate and Savage bounds use
    :func:`mc_orthant` with 4-stderr slack.
    """
    rows = []

    def add(name, point, sw: TailSandwich):
        rows.append({"bound": name, "point": point, "lower": sw.lower,
                     "estimate": sw.estimate, "stderr": sw.stderr or 0.0,
                     "upper": sw.upper, "pass": sw.contains()})

    for x in GAUSS_GRID:
        add("gauss", f"x={x}", gauss_tail_bounds(x).with_estimate(upper_tail(x)))
    k = 0
    for t in BIV_T_GRID:
        for rho in BIV_RHO_GRID:
            cov = np.array([[1.0, rho], [rho, 1.0]])
            est, se = mc_orthant(cov, [t, t], samples, _rng.derive_seed(seed, 1, k), workers)
            k += 1
            sw = TailSandwich(0.0, bivariate_tail_bound(t, rho), est, se)
            add("bivariate", f"t={t};rho={rho}", sw)
    for i, (s, t) in enumerate(savage_grid(samples, seed, savage_points)):
        est, se = mc_orthant(s, t, samples, _rng.derive_seed(seed, 2, i), workers)
        add("savage", f"m={len(t)};i={i}", savage_bounds(s, t).with_estimate(est, se))
    return rows


def tails_check_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bound", "point", "lower", "estimate", "upper", "verdict"])
    for r in rows:
        w.writerow([r["bound"], r["point"], f"{r['lower']:.10g}", f"{r['estimate']:.10g}",
                    f"{r['upper']:.10g}", "pass" if r["pass"] else "fail"])
    return buf.getvalue()
