"""Partition functions and Gibbs masses, all in log space.

Z_beta = sum_sigma exp(beta n H(sigma)) and mu_beta(A) = Z_beta^{-1} sum_{A} ...
Energy bands are given in units of sqrt(2 ln 2) and are closed at both ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .disorder import EnergyTable
from .errors import PreconditionError
from .landscape import SQRT_2LN2, as_members

LN2 = math.log(2.0)
REDUCE_CHUNK = 1 << 14


def _partial(x: np.ndarray) -> tuple[float, float]:
    # (shift, sum of exp(x - shift)) for one chunk
    if x.size == 0:
        return -math.inf, 0.0
    m = float(x.max())
    if m == -math.inf:
        return m, 0.0
    return m, float(np.exp(x - m).sum())


def _merge(a, b):
    (ma, sa), (mb, sb) = a, b
    if ma == -math.inf:
        return b
    if mb == -math.inf:
        return a
    if ma >= mb:
        return ma, sa + sb * math.exp(mb - ma)
    return mb, sb + sa * math.exp(ma - mb)


def logsumexp(x) -> float:
    """log sum exp(x) with a max shift per fixed-size chunk and a pairwise
    reduction over chunks, so the result does not depend on how the work is
    split.  Returns -inf for an empty input."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    parts = [_partial(x[a:a + REDUCE_CHUNK]) for a in range(0, x.size, REDUCE_CHUNK)]
    if not parts:
        return -math.inf
    while len(parts) > 1:
        nxt = [_merge(parts[i], parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    m, s = parts[0]
    if m == -math.inf:
        return -math.inf
    return m + math.log(s)


def _check_beta(beta: float) -> None:
    if not beta >= 0 or math.isinf(beta):
        raise PreconditionError(f"beta must be finite and >= 0, got {beta}")


def _log_count(count: int, n: int, size: int) -> float:
    return n * LN2 if count == size else math.log(count)


def _lse_energies(e: np.ndarray, beta: float, n: int, size: int) -> float:
    if e.size == 0:
        return -math.inf
    if beta == 0.0 or e.min() == e.max():
        # exact: all terms share one exponent
        shift = 0.0 if beta == 0.0 else beta * n * float(e[0])
        return shift + _log_count(e.size, n, size)
    return logsumexp(beta * n * e)


def log_partition(table: EnergyTable, beta: float) -> float:
    """ln Z_beta; exactly n ln 2 at beta = 0."""
    _check_beta(beta)
    return _lse_energies(table.energies, beta, table.n, len(table))


def band_mask(table: EnergyTable, kappa1: float, kappa2: float) -> np.ndarray:
    if math.isnan(kappa1) or math.isnan(kappa2) or kappa1 > kappa2:
        raise PreconditionError(f"need kappa1 <= kappa2, got [{kappa1}, {kappa2}]")
    e = table.energies
    return (e >= kappa1 * SQRT_2LN2) & (e <= kappa2 * SQRT_2LN2)


def restricted_log_partition(table: EnergyTable, beta: float, kappa1: float,
                             kappa2: float) -> float:
    """ln Z_beta[k1, k2] over kappa1 sqrt(2ln2) <= H <= kappa2 sqrt(2ln2)."""
    _check_beta(beta)
    e = table.energies[band_mask(table, kappa1, kappa2)]
    return _lse_energies(e, beta, table.n, len(table))


@dataclass(frozen=True, eq=False)
class GibbsContext:
    table: EnergyTable
    beta: float
    log_z: float

    @classmethod
    def build(cls, table: EnergyTable, beta: float) -> "GibbsContext":
        return cls(table, float(beta), log_partition(table, beta))

    def log_mass_of(self, bits: np.ndarray) -> float:
        e = self.table.energies[bits]
        return _lse_energies(e, self.beta, self.table.n, len(self.table)) - self.log_z

    def weights(self) -> np.ndarray:
        """mu_beta(sigma) for every configuration."""
        return np.exp(self.beta * self.table.n * self.table.energies - self.log_z)


def gibbs_mass(ctx: GibbsContext, members) -> float:
    """mu_beta(A) for a set of configurations."""
    bits, _ = as_members(members, ctx.table.n)
    if bits.size == 0:
        return 0.0
    if bits.size == len(ctx.table):
        return 1.0
    return min(1.0, math.exp(ctx.log_mass_of(bits)))


def cluster_masses(ctx: GibbsContext, clusters) -> np.ndarray:
    return np.array([gibbs_mass(ctx, c) for c in clusters], dtype=np.float64)


def gibbs_average_energy(table: EnergyTable, beta: float) -> float:
    """<H>_mu, the derivative of ln Z with respect to beta n."""
    ctx = GibbsContext.build(table, beta)
    w = ctx.weights()
    return float(np.dot(w, table.energies) / w.sum())


def gamma_star(beta: float) -> float:
    return beta / SQRT_2LN2


def band_dominance(table: EnergyTable, beta: float, kappa: float) -> tuple[float, float]:
    """Gibbs mass inside and outside D = {|H/sqrt(2ln2) - gamma*| <= kappa}.

    Both masses are summed directly, so a tiny outside mass is not lost to
    cancellation in 1 - mass_in.
    """
    if not beta > 0:
        raise PreconditionError(f"beta must be > 0, got {beta}")
    if not 0 < kappa < 1 / math.sqrt(2):
        raise PreconditionError(f"kappa must lie in (0, 1/sqrt(2)), got {kappa}")
    g = gamma_star(beta)
    inside = band_mask(table, g - kappa, g + kappa)
    log_z = log_partition(table, beta)
    n, size = table.n, len(table)
    log_in = _lse_energies(table.energies[inside], beta, n, size)
    log_out = _lse_energies(table.energies[~inside], beta, n, size)
    m_in = math.exp(log_in - log_z) if log_in > -math.inf else 0.0
    m_out = math.exp(log_out - log_z) if log_out > -math.inf else 0.0
    return min(m_in, 1.0), min(m_out, 1.0)


def band_members(table: EnergyTable, beta: float, kappa: float) -> np.ndarray:
    g = gamma_star(beta)
    return np.flatnonzero(band_mask(table, g - kappa, g + kappa)).astype(np.int64)


BAND_CSV_HEADER = ["n", "p", "mode", "seed", "beta", "kappa", "log_z", "band_mass"]


def band_row(table: EnergyTable, beta: float, kappa: float) -> list:
    m_in, _ = band_dominance(table, beta, kappa)
    return [table.n, table.p, table.mode.label, table.seed, repr(float(beta)),
            repr(float(kappa)), repr(log_partition(table, beta)), repr(m_in)]
