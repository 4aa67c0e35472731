"""Gaussian disorder and the pure p-spin Hamiltonian.

The Hamiltonian is

    H(sigma) = n^{-(p+1)/2} * sum_{i_1..i_p} J[i_1..i_p] sigma_{i_1} ... sigma_{i_p}

summed over all ordered index tuples (the tensor is not symmetrized).  Its
covariance is E[H(s) H(s')] = (<s, s'>/n)^p / n, which is what the three table
modes reproduce:

* ``EXACT_TENSOR``  direct contraction of a seeded coupling tensor,
* ``GRAM_CHOLESKY`` a draw from the 2^n-dimensional Gaussian with that
  covariance (exact in law, cheaper for moderate p),
* ``REM_LIMIT``     i.i.d. N(0, 1/n) energies, the p -> infinity limit.

Configurations are packed as integers: bit i set means sigma_i = +1.  Tensor
indices are 0-based and flattened row-major.
"""

from __future__ import annotations

import enum
import functools
import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from .errors import BudgetExceeded, FactorizationError, PreconditionError

DEFAULT_MEMORY_BUDGET = 1 << 30  # bytes
EXACT_WORK_BUDGET = 10**10  # 2^n * n^p multiply-adds
GRAM_MAX_N = 12
REM_MAX_N = 28
GRAM_JITTER = 1e-10
TABLE_CHUNK = 1 << 12  # configs per work unit; fixed so results ignore worker count

# binary table layout: magic, version u16, mode u8, n u8, p u16, 6 pad bytes,
# seed u64, then 2^n little-endian f64 energies
MAGIC = b"PSPN"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHBBH6xQ")


def memory_budget() -> int:
    """Byte budget for materialized arrays (env ``PSPIN_MEMORY_BUDGET``)."""
    raw = os.environ.get("PSPIN_MEMORY_BUDGET")
    if raw is None:
        return DEFAULT_MEMORY_BUDGET
    try:
        value = int(float(raw))
    except ValueError:
        raise PreconditionError(f"PSPIN_MEMORY_BUDGET is not a number: {raw!r}")
    if value <= 0:
        raise PreconditionError("PSPIN_MEMORY_BUDGET must be positive")
    return value


class Mode(enum.IntEnum):
    EXACT_TENSOR = 0
    GRAM_CHOLESKY = 1
    REM_LIMIT = 2

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "exacttensor": cls.EXACT_TENSOR,
            "exact": cls.EXACT_TENSOR,
            "gramcholesky": cls.GRAM_CHOLESKY,
            "gram": cls.GRAM_CHOLESKY,
            "remlimit": cls.REM_LIMIT,
            "rem": cls.REM_LIMIT,
        }
        if key not in aliases:
            raise PreconditionError(f"unknown mode {value!r}")
        return aliases[key]

    @property
    def label(self) -> str:
        return {0: "ExactTensor", 1: "GramCholesky", 2: "RemLimit"}[int(self)]


class Storage(enum.Enum):
    MATERIALIZED = "materialized"
    VIRTUAL = "virtual"


# ---------------------------------------------------------------------------
# configurations


@dataclass(frozen=True)
class SpinConfig:
    """A point of {-1, +1}^n packed into an integer (bit i <=> sigma_i = +1)."""

    bits: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise PreconditionError("n must be positive")
        if self.bits < 0 or self.bits >> self.n:
            raise PreconditionError(f"bits {self.bits:#x} do not fit in n={self.n}")

    def spins(self) -> np.ndarray:
        return spins_of(np.array([self.bits], dtype=np.uint64), self.n)[0]

    @classmethod
    def from_spins(cls, spins) -> "SpinConfig":
        s = np.asarray(spins)
        if s.ndim != 1 or not np.all(np.abs(s) == 1):
            raise PreconditionError("spins must be a 1-d vector of +1/-1")
        bits = 0
        for i, v in enumerate(s):
            if v > 0:
                bits |= 1 << i
        return cls(bits, len(s))

    def complement(self) -> "SpinConfig":
        return SpinConfig(self.bits ^ ((1 << self.n) - 1), self.n)


def spins_of(indices, n: int, dtype=np.float64) -> np.ndarray:
    """Rows of +1/-1 spins for an array of packed configurations."""
    idx = np.asarray(indices, dtype=np.uint64).reshape(-1, 1)
    bits = (idx >> np.arange(n, dtype=np.uint64)) & np.uint64(1)
    return (2 * bits.astype(np.int8) - 1).astype(dtype)


@dataclass(frozen=True)
class EnsembleAngle:
    """Interpolation angle tau in [0, pi/2] between two disorder instances."""

    tau: float

    def __post_init__(self):
        if not (0.0 <= self.tau <= math.pi / 2) or math.isnan(self.tau):
            raise PreconditionError(f"tau must lie in [0, pi/2], got {self.tau}")

    @property
    def cos(self) -> float:
        # exact at the endpoints so tau = pi/2 reproduces the fresh tensor
        if self.tau == math.pi / 2:
            return 0.0
        return math.cos(self.tau)

    @property
    def sin(self) -> float:
        if self.tau == math.pi / 2:
            return 1.0
        return math.sin(self.tau)


# ---------------------------------------------------------------------------
# coupling tensors


@dataclass(frozen=True, eq=False)
class CouplingTensor:
    """Gaussian coupling tensor J in (R^n)^{(x)p}.

    A tensor is a linear combination ``sum_k w_k * G(seed_k)`` of seeded
    standard Gaussian fields; a plain tensor has the single component
    ``(1.0, seed)``.  With ``storage=VIRTUAL`` entries are recomputed from the
    counter-based generator on demand, otherwise ``data`` holds them.
    Explicit arrays (``from_array``) are always materialized and carry no
    components.
    """

    n: int
    p: int
    seed: int | None
    storage: Storage
    components: tuple = ()
    data: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.n**self.p

    @classmethod
    def from_array(cls, array, seed: int | None = None) -> "CouplingTensor":
        a = np.asarray(array, dtype=np.float64)
        n = a.shape[0]
        if a.ndim < 2 or any(d != n for d in a.shape):
            raise PreconditionError("array must be an order-p cube with p >= 2")
        return cls(n, a.ndim, seed, Storage.MATERIALIZED, (), a.reshape(-1).copy())

    def flat_index(self, tup) -> int:
        if len(tup) != self.p or any(not 0 <= i < self.n for i in tup):
            raise PreconditionError(f"bad tuple {tup} for n={self.n}, p={self.p}")
        idx = 0
        for i in tup:
            idx = idx * self.n + int(i)
        return idx

    def entry(self, tup) -> float:
        k = self.flat_index(tup)
        return float(self.entries(k, k + 1)[0])

    def entries(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        """Flattened entries in ``[start, stop)``."""
        stop = self.size if stop is None else stop
        if not 0 <= start <= stop <= self.size:
            raise PreconditionError("entry range out of bounds")
        if self.data is not None:
            return self.data[start:stop]
        out = None
        for weight, seed in self.components:
            block = _rng.normals(seed, _rng.STREAM_TENSOR, start, stop - start)
            term = block if weight == 1.0 else weight * block
            out = term if out is None else out + term
        return out

    def dense(self) -> np.ndarray:
        """All entries as an n x ... x n array (subject to the memory budget)."""
        _check_memory(self.size * 8, "coupling tensor")
        return self.entries().reshape((self.n,) * self.p)

    def materialize(self) -> "CouplingTensor":
        if self.data is not None:
            return self
        _check_memory(self.size * 8, "coupling tensor")
        return CouplingTensor(self.n, self.p, self.seed, Storage.MATERIALIZED,
                              self.components, self.entries().copy())

    @property
    def key(self):
        return self.components if self.components else ("array", id(self))


def _check_memory(nbytes: int, what: str) -> None:
    budget = memory_budget()
    if nbytes > budget:
        raise BudgetExceeded(f"{what} needs {nbytes} bytes, budget is {budget}")


def _check_np(n: int, p: int, min_p: int = 2) -> None:
    if n < 1:
        raise PreconditionError(f"n must be >= 1, got {n}")
    if p < min_p:
        raise PreconditionError(f"p must be >= {min_p}, got {p}")


def generate_tensor(n: int, p: int, seed: int, materialize: bool = False) -> CouplingTensor:
    """Seeded i.i.d. standard normal coupling tensor.

    Virtual and materialized tensors with the same ``(n, p, seed)`` have
    bitwise-identical entries.
    """
    _check_np(n, p)
    seed = int(seed)
    t = CouplingTensor(n, p, seed, Storage.VIRTUAL, ((1.0, seed),))
    return t.materialize() if materialize else t


def correlated_tensor(base: CouplingTensor, fresh: CouplingTensor,
                      angle: EnsembleAngle) -> CouplingTensor:
    """Entrywise ``cos(tau) * base + sin(tau) * fresh``."""
    if (base.n, base.p) != (fresh.n, fresh.p):
        raise PreconditionError("base and fresh tensors differ in shape")
    if base.key == fresh.key or (base.seed is not None and base.seed == fresh.seed):
        raise PreconditionError("base and fresh tensors share a seed; the ensemble is miswired")
    c, s = angle.cos, angle.sin
    if base.data is None and fresh.data is None:
        comps = tuple((c * w, sd) for w, sd in base.components if c != 0.0)
        comps += tuple((s * w, sd) for w, sd in fresh.components if s != 0.0)
        return CouplingTensor(base.n, base.p, base.seed, Storage.VIRTUAL, comps)
    data = c * base.entries() + s * fresh.entries()
    return CouplingTensor(base.n, base.p, base.seed, Storage.MATERIALIZED, (), data)


def _contract(block: np.ndarray, sigma: np.ndarray, order: int) -> float:
    v = block
    for _ in range(order):
        v = sigma @ v.reshape(len(sigma), -1)
    return float(np.asarray(v).reshape(()))


def energy(tensor: CouplingTensor, config: SpinConfig) -> float:
    """H(sigma) = n^{-(p+1)/2} <J, sigma^{(x)p}> by direct contraction.

    Works slab by slab over the first index, so a virtual tensor never needs
    more than n^{p-1} entries in memory.
    """
    if tensor.n != config.n:
        raise PreconditionError(f"tensor has n={tensor.n}, config has n={config.n}")
    n, p = tensor.n, tensor.p
    sigma = config.spins()
    slab = n ** (p - 1)
    total = 0.0
    if tensor.data is not None or slab * n * 8 <= memory_budget() // 4:
        return _contract(tensor.entries(), sigma, p) * n ** (-(p + 1) / 2)
    for i in range(n):
        part = _contract(tensor.entries(i * slab, (i + 1) * slab), sigma, p - 1)
        total += sigma[i] * part
    return total * n ** (-(p + 1) / 2)


# ---------------------------------------------------------------------------
# energy tables


@dataclass(frozen=True, eq=False)
class EnergyTable:
    """Energies of all 2^n configurations for one disorder realization."""

    n: int
    p: int
    mode: Mode
    seed: int
    energies: np.ndarray = field(repr=False)

    def __post_init__(self):
        e = self.energies
        if e.shape != (1 << self.n,):
            raise PreconditionError(f"expected {1 << self.n} energies, got {e.shape}")
        if not np.all(np.isfinite(e)):
            raise PreconditionError("energies must be finite")

    @classmethod
    def from_energies(cls, energies, n: int | None = None, p: int = 2,
                      mode=Mode.EXACT_TENSOR, seed: int = 0) -> "EnergyTable":
        """Wrap hand-made energies (tests, imported data)."""
        e = np.ascontiguousarray(energies, dtype=np.float64)
        if n is None:
            n = int(e.size).bit_length() - 1
        return cls(n, p, Mode.parse(mode), int(seed), e)

    def __len__(self):
        return self.energies.size

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(MAGIC, FORMAT_VERSION, int(self.mode), self.n, self.p, self.seed)
        return head + self.energies.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "EnergyTable":
        if len(data) < _HEADER.size:
            raise PreconditionError("energy table file is truncated")
        magic, version, mode, n, p, seed = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise PreconditionError(f"bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise PreconditionError(f"unsupported format version {version}")
        body = data[_HEADER.size:]
        if len(body) != 8 << n:
            raise PreconditionError(f"expected {1 << n} energies, found {len(body) / 8:g}")
        e = np.frombuffer(body, dtype="<f8").astype(np.float64)
        return cls(n, p, Mode(mode), seed, e)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "EnergyTable":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    def to_csv(self) -> str:
        lines = ["bits,energy"]
        lines += [f"{i},{float(v)!r}" for i, v in enumerate(self.energies)]
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        e = self.energies
        k = int(np.argmax(e))
        return {"n": self.n, "p": self.p, "mode": self.mode.label, "seed": self.seed,
                "max_energy": float(e[k]), "argmax": k, "mean": float(e.mean()),
                "var": float(e.var())}


def default_mode(n: int, p: int) -> Mode:
    if (1 << n) * n**p <= EXACT_WORK_BUDGET:
        return Mode.EXACT_TENSOR
    if n <= GRAM_MAX_N:
        return Mode.GRAM_CHOLESKY
    return Mode.REM_LIMIT


def _chunks(total: int):
    return [(a, min(a + TABLE_CHUNK, total)) for a in range(0, total, TABLE_CHUNK)]


def _run_chunks(fn, total: int, workers: int) -> np.ndarray:
    parts = _chunks(total)
    if workers <= 1 or len(parts) == 1:
        results = [fn(a, b) for a, b in parts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda ab: fn(*ab), parts))
    return np.concatenate(results) if results else np.empty(0)


def exact_energies(tensor: CouplingTensor, workers: int = 1) -> np.ndarray:
    """Energies of every configuration by batched contraction."""
    n, p = tensor.n, tensor.p
    total = 1 << n
    if total * n**p > EXACT_WORK_BUDGET:
        raise BudgetExceeded(f"exact table needs 2^{n} * {n}^{p} work, budget {EXACT_WORK_BUDGET:.0e}")
    _check_memory(tensor.size * 8 + TABLE_CHUNK * n ** (p - 1) * 8, "exact table")
    J = tensor.entries().reshape(n, -1)
    scale = n ** (-(p + 1) / 2)

    def work(a, b):
        S = spins_of(np.arange(a, b, dtype=np.uint64), n)
        M = S @ J
        for _ in range(p - 1):
            M = np.einsum("ci,cij->cj", S, M.reshape(b - a, n, -1))
        return M.reshape(-1) * scale

    return _run_chunks(work, total, workers)


@functools.lru_cache(maxsize=8)
def _gram_factor(n: int, p: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.uint64)
    dist = np.bitwise_count(idx[:, None] ^ idx[None, :]).astype(np.float64)
    cov = ((n - 2.0 * dist) / n) ** p / n
    cov[np.diag_indices_from(cov)] += GRAM_JITTER
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(
            f"Gram covariance for n={n}, p={p} is not numerically PD even with "
            f"jitter {GRAM_JITTER}") from exc


def gram_covariance(n: int, p: int) -> np.ndarray:
    """The exact 2^n x 2^n covariance (<s,s'>/n)^p / n, without jitter."""
    idx = np.arange(1 << n, dtype=np.uint64)
    dist = np.bitwise_count(idx[:, None] ^ idx[None, :]).astype(np.float64)
    return ((n - 2.0 * dist) / n) ** p / n


def build_energy_table(n: int, p: int, seed: int, mode=None, workers: int = 1,
                       gram_max_n: int = GRAM_MAX_N) -> EnergyTable:
    """Energies of all 2^n configurations in the requested (or default) mode."""
    _check_np(n, p)
    mode = default_mode(n, p) if mode is None else Mode.parse(mode)
    seed = int(seed)
    total = 1 << n
    if mode is Mode.EXACT_TENSOR:
        energies = exact_energies(generate_tensor(n, p, seed), workers)
    elif mode is Mode.GRAM_CHOLESKY:
        if n > gram_max_n:
            raise BudgetExceeded(f"GramCholesky is capped at n={gram_max_n}, got n={n}")
        _check_memory(total * total * 8 * 2, "Gram covariance")
        L = _gram_factor(n, p)
        z = _rng.normals(seed, _rng.STREAM_GRAM, 0, total)
        energies = L @ z
    else:
        if n > REM_MAX_N:
            raise BudgetExceeded(f"RemLimit is capped at n={REM_MAX_N}, got n={n}")
        _check_memory(total * 8 * 2, "REM table")
        scale = 1.0 / math.sqrt(n)
        energies = _run_chunks(
            lambda a, b: _rng.normals(seed, _rng.STREAM_REM, a, b - a) * scale,
            total, workers)
    return EnergyTable(n, p, mode, seed, np.ascontiguousarray(energies))


def interpolated_energies(base: EnergyTable, fresh: EnergyTable, angle: EnsembleAngle) -> np.ndarray:
    """Energies under cos(tau) J0 + sin(tau) J1, using linearity of H in J."""
    if (base.n, base.p) != (fresh.n, fresh.p):
        raise PreconditionError("tables differ in (n, p)")
    if base.seed == fresh.seed:
        raise PreconditionError("base and fresh tables share a seed")
    return angle.cos * base.energies + angle.sin * fresh.energies
