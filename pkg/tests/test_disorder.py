import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from oracles import ENERGY_5_3_SEED11
from pspin.disorder import (CouplingTensor, EnergyTable, EnsembleAngle, Mode, SpinConfig,
                            build_energy_table, correlated_tensor, default_mode, energy,
                            generate_tensor, gram_covariance, interpolated_energies)
from pspin.errors import BudgetExceeded, PreconditionError


def test_tensor_deterministic():
    # tuple (1, 2) in 1-based notation; indices here are 0-based
    a = generate_tensor(2, 2, 7).entry((0, 1))
    b = generate_tensor(2, 2, 7).entry((0, 1))
    assert a == b


def test_virtual_equals_materialized():
    v = generate_tensor(4, 3, 1)
    m = generate_tensor(4, 3, 1, materialize=True)
    assert np.array_equal(v.entries(), m.entries())
    assert v.dense().shape == (4, 4, 4)


def test_entry_ranges_are_partition_independent():
    t = generate_tensor(5, 3, 9)
    whole = t.entries()
    pieces = np.concatenate([t.entries(a, min(a + 17, 125)) for a in range(0, 125, 17)])
    assert np.array_equal(whole, pieces)


def test_small_sample_mean():
    e = generate_tensor(8, 2, 3).entries()
    assert abs(e.mean()) <= 5 / math.sqrt(64)


def test_entry_moments_large_sample():
    e = generate_tensor(100, 3, 5).entries()  # 10^6 entries
    se = 1 / math.sqrt(e.size)
    assert abs(e.mean()) < 5 * se
    assert abs(e.var() - 1) < 5 * math.sqrt(2) * se


def test_bad_sizes():
    with pytest.raises(PreconditionError):
        generate_tensor(0, 2, 1)
    with pytest.raises(PreconditionError):
        generate_tensor(3, 1, 1)


def test_memory_budget(monkeypatch):
    monkeypatch.setenv("PSPIN_MEMORY_BUDGET", "1000")
    with pytest.raises(BudgetExceeded):
        generate_tensor(10, 3, 0, materialize=True)


def test_energy_all_ones_all_plus():
    t = CouplingTensor.from_array(np.ones((4, 4)))
    assert energy(t, SpinConfig(0b1111, 4)) == pytest.approx(2.0, abs=1e-15)


def test_energy_all_ones_one_flip():
    t = CouplingTensor.from_array(np.ones((2, 2)))
    assert energy(t, SpinConfig(0b01, 2)) == 0.0


def test_energy_matches_brute_force_oracle():
    t = generate_tensor(5, 3, 11)
    for bits, ref in ENERGY_5_3_SEED11.items():
        assert energy(t, SpinConfig(bits, 5)) == pytest.approx(ref, abs=1e-12)
    table = build_energy_table(5, 3, 11, Mode.EXACT_TENSOR)
    for bits, ref in ENERGY_5_3_SEED11.items():
        assert table.energies[bits] == pytest.approx(ref, abs=1e-12)


def test_energy_dimension_mismatch():
    with pytest.raises(PreconditionError):
        energy(generate_tensor(3, 2, 0), SpinConfig(0, 4))


@pytest.mark.parametrize("p", [2, 3, 4])
def test_sign_symmetry(p):
    t = generate_tensor(6, p, 2)
    for bits in (0, 5, 44, 63):
        c = SpinConfig(bits, 6)
        assert energy(t, c.complement()) == pytest.approx((-1) ** p * energy(t, c), abs=1e-13)


def test_table_matches_energy():
    t = generate_tensor(6, 3, 4)
    table = build_energy_table(6, 3, 4, "exact")
    for bits in range(0, 64, 7):
        assert table.energies[bits] == pytest.approx(energy(t, SpinConfig(bits, 6)), abs=1e-13)


def test_correlated_endpoints():
    base, fresh = generate_tensor(3, 2, 1), generate_tensor(3, 2, 2)
    assert np.array_equal(correlated_tensor(base, fresh, EnsembleAngle(0.0)).entries(), base.entries())
    assert np.array_equal(correlated_tensor(base, fresh, EnsembleAngle(math.pi / 2)).entries(),
                          fresh.entries())
    mid = correlated_tensor(base, fresh, EnsembleAngle(math.pi / 4)).entries()
    assert np.allclose(mid, (base.entries() + fresh.entries()) / math.sqrt(2), atol=1e-15, rtol=0)


def test_correlated_errors():
    with pytest.raises(PreconditionError):
        correlated_tensor(generate_tensor(3, 2, 1), generate_tensor(3, 2, 1), EnsembleAngle(0.3))
    with pytest.raises(PreconditionError):
        correlated_tensor(generate_tensor(3, 2, 1), generate_tensor(4, 2, 2), EnsembleAngle(0.3))
    with pytest.raises(PreconditionError):
        EnsembleAngle(2.0)


def test_correlated_variance():
    base, fresh = generate_tensor(60, 3, 1), generate_tensor(60, 3, 2)
    e = correlated_tensor(base, fresh, EnsembleAngle(0.7)).entries()
    assert abs(e.var() - 1) < 5 * math.sqrt(2 / e.size)


def test_rem_reproducible():
    a = build_energy_table(3, 2, 99, "rem").energies
    b = build_energy_table(3, 2, 99, "rem").energies
    assert a.shape == (8,) and np.array_equal(a, b)


@pytest.mark.parametrize("mode", ["exact", "gram", "rem"])
def test_parallel_determinism(mode):
    n = 13 if mode != "gram" else 10
    a = build_energy_table(n, 3, 8, mode, workers=1).energies
    b = build_energy_table(n, 3, 8, mode, workers=4).energies
    assert np.array_equal(a, b)


def test_gram_diagonal_variance():
    n, seeds = 5, 2000
    e = np.array([build_energy_table(n, 3, s, "gram").energies for s in range(seeds)])
    v = (e**2).mean(axis=0)  # centered by construction
    se = np.sqrt(((e**2).var(axis=0)) / seeds)
    assert np.all(np.abs(v - 1 / n) <= 3 * se)


def test_gram_covariance_is_exact_law():
    cov = gram_covariance(3, 2)
    assert cov[0, 0] == pytest.approx(1 / 3)
    assert cov[0, 7] == pytest.approx(1 / 3)  # overlap -1, even p
    assert cov[0, 1] == pytest.approx((1 / 3) ** 2 / 3)


def test_exact_vs_gram_ks():
    seeds = 500
    ex = [build_energy_table(6, 2, s, "exact").energies.max() for s in range(seeds)]
    gr = [build_energy_table(6, 2, 10_000 + s, "gram").energies.max() for s in range(seeds)]
    d = stats.ks_2samp(ex, gr).statistic
    crit = 1.63 * math.sqrt(2 / seeds)  # 1% two-sample critical value
    assert d < crit


def test_interpolated_covariance():
    # Cov of interpolated energies at angles tk, tl ~ cos tk cos tl R^p / n
    n, p, seeds = 6, 2, 3000
    tk, tl = EnsembleAngle(0.4), EnsembleAngle(0.9)
    a, b = 0b000011, 0b000111  # overlap 4/6
    xs, ys = [], []
    for s in range(seeds):
        base = build_energy_table(n, p, 3 * s, "exact")
        f1 = build_energy_table(n, p, 3 * s + 1, "exact")
        f2 = build_energy_table(n, p, 3 * s + 2, "exact")
        xs.append(interpolated_energies(base, f1, tk)[a] * math.sqrt(n))
        ys.append(interpolated_energies(base, f2, tl)[b] * math.sqrt(n))
    xs, ys = np.array(xs), np.array(ys)
    prod = xs * ys
    target = tk.cos * tl.cos * (4 / 6) ** p
    assert abs(prod.mean() - target) < 4 * prod.std() / math.sqrt(seeds)


def test_default_mode():
    assert default_mode(10, 3) is Mode.EXACT_TENSOR
    assert default_mode(12, 8) is Mode.GRAM_CHOLESKY
    assert default_mode(20, 8) is Mode.REM_LIMIT


def test_mode_caps():
    with pytest.raises(BudgetExceeded):
        build_energy_table(13, 3, 0, "gram")
    with pytest.raises(BudgetExceeded):
        build_energy_table(29, 3, 0, "rem")
    with pytest.raises(BudgetExceeded):
        build_energy_table(20, 8, 0, "exact")


def test_binary_roundtrip(tmp_path):
    t = build_energy_table(7, 3, 12, "rem")
    path = tmp_path / "t.bin"
    t.save(path)
    data = path.read_bytes()
    assert data[:4] == b"PSPN" and len(data) == 24 + 8 * 128
    u = EnergyTable.load(path)
    assert (u.n, u.p, u.mode, u.seed) == (7, 3, Mode.REM_LIMIT, 12)
    assert np.array_equal(u.energies, t.energies)
    with pytest.raises(PreconditionError):
        EnergyTable.from_bytes(b"XXXX" + data[4:])
    with pytest.raises(PreconditionError):
        EnergyTable.from_bytes(data[:-8])


def test_csv_export():
    t = EnergyTable.from_energies(np.arange(4) / 4.0)
    assert t.to_csv().splitlines() == ["bits,energy", "0,0.0", "1,0.25", "2,0.5", "3,0.75"]


@given(st.integers(1, 20).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, (1 << n) - 1))))
@settings(max_examples=200, deadline=None)
def test_spin_roundtrip(nb):
    n, bits = nb
    c = SpinConfig(bits, n)
    assert SpinConfig.from_spins(c.spins()) == c
    assert c.complement().complement() == c


def test_spin_bits_out_of_range():
    with pytest.raises(PreconditionError):
        SpinConfig(16, 4)


def test_angle_identity():
    for tau in np.linspace(0, math.pi / 2, 11):
        a = EnsembleAngle(float(tau))
        assert a.cos**2 + a.sin**2 == pytest.approx(1.0, abs=1e-15)
