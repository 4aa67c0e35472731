"""Synthetic level sets for clustering checks, independent of pspin internals."""

import math

import numpy as np


def planted_clusters(rng, n, nu1, nu2, k_max=6, per_max=12):
    """Clusters around random centers: members within radius floor(nu1 n/2) of
    their center, centers far enough apart that cross-cluster distances are
    >= nu2 n.  Returns (bits array, list of frozensets)."""
    r = int(math.floor(nu1 * n / 2))
    need = math.ceil(nu2 * n) + 2 * r
    centers = []
    k = int(rng.integers(1, k_max + 1))
    tries = 0
    while len(centers) < k and tries < 10_000:
        c = int(rng.integers(0, 1 << n))
        if all((c ^ o).bit_count() >= need for o in centers):
            centers.append(c)
        tries += 1
    groups = []
    for c in centers:
        g = {c}
        for _ in range(int(rng.integers(0, per_max))):
            flips = rng.choice(n, size=int(rng.integers(0, r + 1)), replace=False)
            g.add(c ^ int(sum(1 << int(i) for i in flips)))
        groups.append(frozenset(g))
    bits = np.array(sorted(set().union(*groups)), dtype=np.int64)
    return bits, groups


def random_ogp_set(rng, n, nu1, nu2, size):
    """Random points added one at a time, keeping only those that preserve
    the (nu1, nu2) gap with everything kept so far."""
    kept = []
    for _ in range(size * 20):
        x = int(rng.integers(0, 1 << n))
        ok = True
        for y in kept:
            d = (x ^ y).bit_count() / n
            if nu1 < d < nu2:
                ok = False
                break
        if ok and x not in kept:
            kept.append(x)
        if len(kept) >= size:
            break
    return np.array(kept, dtype=np.int64)


def brute_closure(bits, n, nu1):
    """Equivalence classes of the transitive closure of d <= nu1 n, by
    boolean matrix squaring."""
    b = [int(x) for x in bits]
    m = len(b)
    if m == 0:
        return set()
    adj = np.array([[(x ^ y).bit_count() <= nu1 * n + 1e-9 for y in b] for x in b])
    reach = adj.copy()
    while True:
        nxt = (reach.astype(np.int64) @ reach.astype(np.int64)) > 0
        if np.array_equal(nxt, reach):
            break
        reach = nxt
    return {frozenset(b[j] for j in np.flatnonzero(reach[i])) for i in range(m)}
