import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from planted import brute_closure, planted_clusters, random_ogp_set
from pspin.clustering import (MAX_WITNESSES, UnionFind, check_ogp, cluster, mass_tolerance,
                              shattering_verdict)
from pspin.disorder import SpinConfig
from pspin.errors import OGPViolation, PreconditionError

FOUR = [SpinConfig(b, 4) for b in (0b0000, 0b0001, 0b1110, 0b1111)]


def as_sets(report):
    return {frozenset(int(b) for b in c) for c in report.clusters}


def test_check_ogp_singleton():
    assert check_ogp([SpinConfig(3, 5)], 0.2, 0.6) == (True, [])


def test_check_ogp_full_cube():
    holds, wit = check_ogp(np.arange(256), 0.25, 0.75, 8)
    assert not holds
    assert 0 < len(wit) <= MAX_WITNESSES
    dists = {(a.bits ^ b.bits).bit_count() for a, b in wit}
    assert 3 in dists and dists <= {3, 4, 5}


def test_check_ogp_four_points():
    assert check_ogp(FOUR, 0.3, 0.7)[0]


def test_cluster_four_points():
    rep = cluster(FOUR, 0.3, 0.7)
    assert rep.L == 2 and rep.sizes == [2, 2]
    assert as_sets(rep) == {frozenset({0, 1}), frozenset({14, 15})}
    assert rep.max_diameter == 0.25 and rep.min_interdistance == 0.75


def test_cluster_all_far_apart():
    pts = np.array([0b0000000000, 0b1111100000, 0b0000011111], dtype=np.int64)
    rep = cluster(pts, 0.2, 0.45, 10)
    assert rep.L == 3 and rep.max_diameter == 0


def test_cluster_empty():
    rep = cluster(np.array([], dtype=np.int64), 0.2, 0.45, 10)
    assert rep.L == 0 and math.isinf(rep.min_interdistance)
    assert rep.to_dict()["min_interdistance"] is None


def test_cluster_refuses_without_gap():
    with pytest.raises(OGPViolation) as exc:
        cluster(np.arange(64), 0.2, 0.45, 6)
    assert exc.value.witnesses


def test_cluster_needs_regime():
    with pytest.raises(PreconditionError):
        cluster(FOUR, 0.3, 0.5)


def test_cluster_json_keys():
    d = cluster(FOUR, 0.3, 0.7).to_dict()
    assert set(d) == {"nu1", "nu2", "ogp", "L", "sizes", "max_diameter",
                      "min_interdistance", "clusters"}
    assert d["clusters"] == [[0, 1], [14, 15]]


def test_union_find():
    uf = UnionFind(6)
    uf.union(0, 1)
    uf.union(4, 5)
    uf.union(1, 5)
    assert sorted(sorted(g) for g in uf.groups()) == [[0, 1, 4, 5], [2], [3]]


def test_planted_recovery():
    rng = np.random.default_rng(1)
    for _ in range(50):
        bits, groups = planted_clusters(rng, 24, 0.2, 0.45)
        rep = cluster(bits, 0.2, 0.45, 24)
        assert as_sets(rep) == set(groups)
        assert rep.max_diameter <= 0.2 and rep.min_interdistance >= 0.45


def test_agreement_with_brute_closure():
    rng = np.random.default_rng(2)
    for _ in range(40):
        bits = random_ogp_set(rng, 12, 0.2, 0.45, int(rng.integers(1, 200)))
        rep = cluster(bits, 0.2, 0.45, 12)
        assert as_sets(rep) == brute_closure(bits, 12, 0.2)


def test_chain_witness():
    rng = np.random.default_rng(3)
    bits, _ = planted_clusters(rng, 20, 0.2, 0.45)
    rep = cluster(bits, 0.2, 0.45, 20)
    for c in rep.clusters:
        c = [int(x) for x in c]
        # BFS from the first member along d <= nu1 n must reach all members
        seen, todo = {c[0]}, [c[0]]
        while todo:
            x = todo.pop()
            for y in c:
                if y not in seen and (x ^ y).bit_count() <= 4:
                    seen.add(y)
                    todo.append(y)
        assert seen == set(c)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    bits, _ = planted_clusters(rng, 16, 0.2, 0.45)
    a = as_sets(cluster(bits, 0.2, 0.45, 16))
    b = as_sets(cluster(rng.permutation(bits), 0.2, 0.45, 16))
    c = as_sets(cluster([SpinConfig(int(x), 16) for x in bits[::-1]], 0.2, 0.45))
    assert a == b == c


def test_partition_invariants():
    rng = np.random.default_rng(4)
    bits, _ = planted_clusters(rng, 20, 0.2, 0.45)
    rep = cluster(bits, 0.2, 0.45, 20)
    allm = np.concatenate(rep.clusters)
    assert np.array_equal(np.sort(allm), np.sort(bits))


def test_verdict_single_cluster():
    rep = cluster(np.array([0]), 0.2, 0.45, 20)
    v = shattering_verdict(rep, [1.0], 0.4, 0.45, 0.1, 0.1)
    assert not v.many_clusters and not v.holds


def test_verdict_equal_masses():
    n, L = 10, 4  # L = 2^{0.2 n}
    code = np.array([0b0000000000, 0b1111100000, 0b0000011111, 0b1111111111])
    rep = cluster(code, 0.2, 0.45, n)
    assert rep.L == L
    v = shattering_verdict(rep, np.full(L, 1.0 / L), 0.4, 0.45, 0.2, 0.1 * math.log(2))
    assert v.subdominant and v.many_clusters and v.covering and v.separated and v.holds


def test_verdict_mismatch():
    with pytest.raises(PreconditionError):
        shattering_verdict(cluster(FOUR, 0.3, 0.7), [1.0], 0.6, 0.7, 0.1, 0.1)


def test_mass_tolerance():
    assert mass_tolerance(16) == 0.25
