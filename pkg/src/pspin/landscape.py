"""Level sets, overlaps and near-pairs of an exhaustive energy table."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .disorder import EnergyTable, SpinConfig
from .errors import PreconditionError

SQRT_2LN2 = math.sqrt(2.0 * math.log(2.0))
# slack for comparing d_H/n against a fraction given as a float
BOUNDARY_TOL = 1e-9


class Unit(enum.Enum):
    ABSOLUTE = "absolute"
    SQRT_TWO_LN_TWO = "sqrt2ln2"

    @classmethod
    def parse(cls, value) -> "Unit":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        if key in ("absolute", "abs"):
            return cls.ABSOLUTE
        if key in ("sqrt2ln2", "sqrttwolntwo", "scaled"):
            return cls.SQRT_TWO_LN_TWO
        raise PreconditionError(f"unknown unit {value!r}")


@dataclass(frozen=True, eq=False)
class LevelSet:
    """Configurations whose energy lies in a closed window.

    ``members`` holds packed configurations sorted ascending.  ``lower`` and
    ``upper`` are stored in ``unit``; ``source`` records the table parameters.
    """

    members: np.ndarray
    n: int
    lower: float
    upper: float
    unit: Unit = Unit.ABSOLUTE
    source: dict = field(default_factory=dict)

    def __len__(self):
        return int(self.members.size)

    def __iter__(self):
        return (SpinConfig(int(b), self.n) for b in self.members)

    def configs(self) -> list:
        return list(self)

    def to_csv(self, table: EnergyTable | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if table is None:
            w.writerow(["bits"])
            w.writerows([int(b)] for b in self.members)
        else:
            w.writerow(["bits", "energy"])
            for b in self.members:
                w.writerow([int(b), repr(float(table.energies[b]))])
        return buf.getvalue()


def as_members(members, n: int | None = None) -> tuple[np.ndarray, int]:
    """Normalize a LevelSet, SpinConfig list or int array to sorted unique bits."""
    if isinstance(members, LevelSet):
        return members.members, members.n
    items = list(members) if not isinstance(members, np.ndarray) else members
    if len(items) and isinstance(items[0], SpinConfig):
        ns = {c.n for c in items}
        if len(ns) != 1 or (n is not None and ns != {n}):
            raise PreconditionError("members have inconsistent n")
        n = ns.pop()
        bits = np.array([c.bits for c in items], dtype=np.int64)
    else:
        if n is None:
            raise PreconditionError("n is required for raw bit arrays")
        bits = np.asarray(items, dtype=np.int64).reshape(-1)
        if bits.size and (bits.min() < 0 or bits.max() >= (1 << n)):
            raise PreconditionError(f"member bits out of range for n={n}")
    return np.unique(bits), n


@dataclass(frozen=True)
class OverlapGrid:
    """Admissible overlaps {1 - 2k/n : k = 0..n}, ascending."""

    n: int

    @property
    def values(self) -> list:
        return [Fraction(self.n - 2 * d, self.n) for d in range(self.n, -1, -1)]


def level_set(table: EnergyTable, lower: float = -math.inf, upper: float = math.inf,
              unit=Unit.ABSOLUTE) -> LevelSet:
    """All configurations with ``lower <= H <= upper``."""
    unit = Unit.parse(unit)
    if math.isnan(lower) or math.isnan(upper) or lower > upper:
        raise PreconditionError(f"malformed bounds [{lower}, {upper}]")
    scale = SQRT_2LN2 if unit is Unit.SQRT_TWO_LN_TWO else 1.0
    lo, hi = lower * scale, upper * scale
    e = table.energies
    idx = np.flatnonzero((e >= lo) & (e <= hi))
    source = {"n": table.n, "p": table.p, "mode": table.mode.label, "seed": table.seed}
    return LevelSet(idx.astype(np.int64), table.n, lower, upper, unit, source)


def s_epsilon(table: EnergyTable, epsilon: float) -> LevelSet:
    """S(eps): configurations with H >= (1 - eps) sqrt(2 ln 2)."""
    return level_set(table, 1.0 - epsilon, math.inf, Unit.SQRT_TWO_LN_TWO)


def hamming(a: SpinConfig, b: SpinConfig) -> int:
    if a.n != b.n:
        raise PreconditionError(f"configs have n={a.n} and n={b.n}")
    return (a.bits ^ b.bits).bit_count()


def overlap(a: SpinConfig, b: SpinConfig) -> Fraction:
    """R(a, b) = <a, b>/n = (n - 2 d_H)/n, exactly."""
    return Fraction(a.n - 2 * hamming(a, b), a.n)


def pair_distances(bits: np.ndarray, rows: slice | None = None) -> np.ndarray:
    """Hamming distance matrix between ``bits[rows]`` and all of ``bits``."""
    b = np.asarray(bits, dtype=np.uint64)
    left = b if rows is None else b[rows]
    return np.bitwise_count(left[:, None] ^ b[None, :]).astype(np.int32)


def _row_blocks(size: int, block: int = 1024):
    for a in range(0, size, block):
        yield slice(a, min(a + block, size))


def overlap_histogram(members, n: int | None = None) -> dict:
    """Counts of ordered pairs (self-pairs included) per overlap value."""
    bits, n = as_members(members, n)
    if bits.size == 0:
        raise PreconditionError("overlap histogram of an empty set")
    counts = np.zeros(n + 1, dtype=np.int64)
    for rows in _row_blocks(bits.size):
        counts += np.bincount(pair_distances(bits, rows).ravel(), minlength=n + 1)
    return {Fraction(n - 2 * d, n): int(c) for d, c in enumerate(counts) if c}


def histogram_csv(hist: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["overlap", "count"])
    for a in sorted(hist):
        w.writerow([f"{float(a):.17g}", hist[a]])
    return buf.getvalue()


def _check_fractions(nu1: float, nu2: float) -> None:
    if not (0.0 < nu1 < nu2 < 1.0):
        raise PreconditionError(f"need 0 < nu1 < nu2 < 1, got nu1={nu1}, nu2={nu2}")


def strictly_between(d, n: int, nu1: float, nu2: float):
    """d/n in the open interval (nu1, nu2), tolerant to float rounding of nu*n."""
    return (d > nu1 * n + BOUNDARY_TOL) & (d < nu2 * n - BOUNDARY_TOL)


def iter_forbidden(bits: np.ndarray, n: int, nu1: float, nu2: float):
    """Yield ordered index pairs (i, j) into ``bits`` at forbidden distance."""
    for rows in _row_blocks(bits.size):
        d = pair_distances(bits, rows)
        ii, jj = np.nonzero(strictly_between(d, n, nu1, nu2))
        for i, j in zip(ii + rows.start, jj):
            yield int(i), int(j)


def forbidden_pairs(members, nu1: float, nu2: float, n: int | None = None) -> list:
    """Ordered pairs with nu1 < d_H/n < nu2; empty iff the set has the OGP."""
    _check_fractions(nu1, nu2)
    bits, n = as_members(members, n)
    return [(SpinConfig(int(bits[i]), n), SpinConfig(int(bits[j]), n))
            for i, j in iter_forbidden(bits, n, nu1, nu2)]


def pairs_json(pairs) -> str:
    return json.dumps([[a.bits, b.bits] for a, b in pairs])


def ground_state(table: EnergyTable) -> tuple[SpinConfig, float]:
    """Maximizer of H (lowest bits on ties) and its energy."""
    k = int(np.argmax(table.energies))  # argmax returns the first maximum
    return SpinConfig(k, table.n), float(table.energies[k])
