"""Overlap-gap detection and the unique (nu1, nu2)-clustering of a set."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .disorder import SpinConfig
from .errors import OGPViolation, PreconditionError
from .landscape import (BOUNDARY_TOL, _check_fractions, _row_blocks, as_members,
                        iter_forbidden, pair_distances)

MAX_WITNESSES = 16


class UnionFind:
    """Disjoint sets over 0..size-1 with path compression and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def groups(self) -> list[list[int]]:
        out: dict[int, list[int]] = {}
        for i in range(len(self.parent)):
            out.setdefault(self.find(i), []).append(i)
        return list(out.values())


def check_ogp(members, nu1: float, nu2: float, n: int | None = None):
    """(holds, witnesses): no pair at distance strictly inside (nu1 n, nu2 n)."""
    _check_fractions(nu1, nu2)
    bits, n = as_members(members, n)
    witnesses = []
    for i, j in iter_forbidden(bits, n, nu1, nu2):
        witnesses.append((SpinConfig(int(bits[i]), n), SpinConfig(int(bits[j]), n)))
        if len(witnesses) >= MAX_WITNESSES:
            break
    return not witnesses, witnesses


def nu1_components(bits: np.ndarray, n: int, nu1: float) -> list[np.ndarray]:
    """Connected components of the graph d_H <= nu1 n, each sorted, ordered by
    smallest member."""
    uf = UnionFind(bits.size)
    limit = nu1 * n + BOUNDARY_TOL
    for rows in _row_blocks(bits.size):
        ii, jj = np.nonzero(pair_distances(bits, rows) <= limit)
        for i, j in zip(ii + rows.start, jj):
            if i < j:
                uf.union(int(i), int(j))
    comps = [np.sort(bits[g]) for g in uf.groups()]
    comps.sort(key=lambda c: int(c[0]))
    return comps


@dataclass(frozen=True, eq=False)
class ClusterReport:
    """Partition of a set into clusters C_1..C_L.

    Distances are reported as fractions of n.  ``max_diameter`` is 0 when every
    cluster is a singleton (or the set is empty); ``min_interdistance`` is
    ``inf`` when L < 2.
    """

    n: int
    nu1: float
    nu2: float
    clusters: list = field(repr=False)
    max_diameter: float = 0.0
    min_interdistance: float = math.inf
    ogp_holds: bool = True
    witnesses: list = field(default_factory=list, repr=False)

    @property
    def L(self) -> int:
        return len(self.clusters)

    @property
    def sizes(self) -> list[int]:
        return [int(c.size) for c in self.clusters]

    def to_dict(self) -> dict:
        return {
            "nu1": self.nu1,
            "nu2": self.nu2,
            "ogp": self.ogp_holds,
            "L": self.L,
            "sizes": self.sizes,
            "max_diameter": self.max_diameter,
            "min_interdistance": None if math.isinf(self.min_interdistance) else self.min_interdistance,
            "clusters": [[int(b) for b in c] for c in self.clusters],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _geometry(clusters: list[np.ndarray], n: int) -> tuple[float, float]:
    labels = np.concatenate([np.full(c.size, k) for k, c in enumerate(clusters)]) if clusters else np.empty(0)
    bits = np.concatenate(clusters) if clusters else np.empty(0, dtype=np.int64)
    diam, inter = 0, None
    for rows in _row_blocks(bits.size):
        d = pair_distances(bits, rows)
        same = labels[rows, None] == labels[None, :]
        if same.any():
            diam = max(diam, int(d[same].max()))
        if (~same).any():
            m = int(d[~same].min())
            inter = m if inter is None else min(inter, m)
    return diam / n, (math.inf if inter is None else inter / n)


def cluster(members, nu1: float, nu2: float, n: int | None = None) -> ClusterReport:
    """Unique (nu1, nu2)-clustering of a set exhibiting the (nu1, nu2)-OGP.

    Clusters are the connected components of the graph joining members at
    distance <= nu1 n.  Under the OGP with 2 nu1 < nu2 these components have
    diameter <= nu1 n and are >= nu2 n apart.  If the OGP fails the call raises
    :class:`OGPViolation` carrying up to 16 witness pairs.
    """
    _check_fractions(nu1, nu2)
    if not 2 * nu1 < nu2:
        raise PreconditionError(f"clustering needs 2*nu1 < nu2, got nu1={nu1}, nu2={nu2}")
    bits, n = as_members(members, n)
    holds, witnesses = check_ogp(bits, nu1, nu2, n)
    if not holds:
        raise OGPViolation(
            f"set of size {bits.size} violates the ({nu1}, {nu2})-OGP; no clustering emitted",
            witnesses)
    comps = nu1_components(bits, n, nu1)
    diam, inter = _geometry(comps, n)
    return ClusterReport(n, nu1, nu2, comps, diam, inter, True, [])


@dataclass(frozen=True)
class ShatteringVerdict:
    L: int
    log2L_over_n: float
    max_diameter: float
    min_interdistance: float
    max_mass: float
    total_mass: float
    mass_tolerance: float
    many_clusters: bool  # (a)
    separated: bool  # (b)
    subdominant: bool  # (c)
    covering: bool  # (d)

    @property
    def holds(self) -> bool:
        return self.many_clusters and self.separated and self.subdominant and self.covering

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["holds"] = self.holds
        for k, v in d.items():
            if isinstance(v, float) and math.isinf(v):
                d[k] = None
        return d


def mass_tolerance(n: int) -> float:
    """Finite-n slack for condition (d): total mass >= 1 - 2^{-n/8}."""
    return 2.0 ** (-n / 8)


def shattering_verdict(report: ClusterReport, masses, a: float, b: float,
                       c_exp: float, cprime_exp: float) -> ShatteringVerdict:
    """Check the four items of the shattering definition at finite n.

    (a) log2 L / n >= c_exp; (b) max diameter <= a n and min separation >= b n;
    (c) every cluster mass <= exp(-c' n); (d) total mass >= 1 - 2^{-n/8}.
    """
    masses = np.asarray(masses, dtype=np.float64).reshape(-1)
    if masses.size != report.L:
        raise PreconditionError(f"{masses.size} masses for {report.L} clusters")
    if not (0 < a < 1 and 0 < b < 1):
        raise PreconditionError(f"need 0 < a, b < 1, got a={a}, b={b}")
    n = report.n
    L = report.L
    rate = math.log2(L) / n if L > 0 else -math.inf
    max_mass = float(masses.max()) if L else 0.0
    total = float(masses.sum()) if L else 0.0
    tol = mass_tolerance(n)
    return ShatteringVerdict(
        L=L,
        log2L_over_n=rate,
        max_diameter=report.max_diameter,
        min_interdistance=report.min_interdistance,
        max_mass=max_mass,
        total_mass=total,
        mass_tolerance=tol,
        many_clusters=bool(rate >= c_exp),
        separated=bool(report.max_diameter <= a + BOUNDARY_TOL / n
                       and report.min_interdistance >= b - BOUNDARY_TOL / n),
        subdominant=bool(max_mass <= math.exp(-cprime_exp * n)),
        covering=bool(total >= 1.0 - tol),
    )
