"""Experiment configuration stored as a sectioned key = value text file.

Example::

    [model]
    n = 16
    p = 3
    mode = RemLimit

    [run]
    seeds = 0..99
    workers = 4
    out = runs/shatter16

    [gibbs]
    betas = 1.1, 1.15
    kappa = 0.12

    [landscape]
    epsilon = 0.3
    nu1 = 0.2
    nu2 = 0.45
    c_exp = 0.18
    c_prime = 0.17

Seeds are a comma list or an inclusive range ``a..b``.  Floats are written
with ``repr`` so a config survives a write/read cycle unchanged.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import math
from dataclasses import dataclass, fields

from .disorder import Mode
from .errors import PreconditionError


def parse_seeds(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    out = []
    for part in text.split(","):
        part = part.strip()
        try:
            if ".." in part:
                a, b = part.split("..", 1)
                a, b = int(a), int(b)
                if b < a:
                    raise PreconditionError(f"seed range {part!r} is empty")
                out.extend(range(a, b + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise PreconditionError(f"seed {part!r} is not an integer or a..b range") from None
    for s in out:
        if not 0 <= s < 1 << 64:
            raise PreconditionError(f"seed {s} is not an unsigned 64-bit integer")
    return tuple(out)


def format_seeds(seeds) -> str:
    seeds = list(seeds)
    if (len(seeds) > 2 and seeds[-1] - seeds[0] == len(seeds) - 1
            and all(b - a == 1 for a, b in zip(seeds, seeds[1:]))):
        return f"{seeds[0]}..{seeds[-1]}"
    return ", ".join(str(s) for s in seeds)


def _floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    return tuple(float(x) for x in text.split(",")) if text else ()


def _fmt_floats(xs) -> str:
    return ", ".join(repr(float(x)) for x in xs)


# (section, key, kind); kinds: int, float, floats, seeds, mode, str
_LAYOUT = [
    ("model", "n", "int"),
    ("model", "p", "int"),
    ("model", "mode", "mode"),
    ("run", "seeds", "seeds"),
    ("run", "workers", "int"),
    ("run", "out", "str"),
    ("gibbs", "betas", "floats"),
    ("gibbs", "kappa", "float"),
    ("landscape", "epsilon", "float"),
    ("landscape", "nu1", "float"),
    ("landscape", "nu2", "float"),
    ("landscape", "c_exp", "float"),
    ("landscape", "c_prime", "float"),
    ("mogp", "m", "int"),
    ("mogp", "gamma", "float"),
    ("mogp", "xi", "float"),
    ("mogp", "eta", "float"),
    ("mogp", "angles", "floats"),
]


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 16
    p: int = 3
    mode: Mode = Mode.REM_LIMIT
    seeds: tuple = ()
    workers: int = 1
    out: str = "scan_out"
    betas: tuple = (1.1,)
    kappa: float = 0.12
    epsilon: float = 0.3
    nu1: float = 0.2
    nu2: float = 0.45
    # shattering thresholds: log2(L)/n >= c_exp and max mass <= exp(-c_prime n)
    c_exp: float = 0.18
    c_prime: float = 0.17
    m: int = 2
    gamma: float = 0.85
    xi: float = 0.5
    eta: float = 0.1
    angles: tuple = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        self.validate()

    def validate(self) -> None:
        def bad(name, why):
            raise PreconditionError(f"config field '{name}': {why}")

        if not 1 <= self.n <= 28:
            bad("n", f"must lie in [1, 28], got {self.n}")
        if self.p < 2:
            bad("p", f"must be >= 2, got {self.p}")
        if self.workers < 1:
            bad("workers", f"must be >= 1, got {self.workers}")
        if any(not 0 <= s < 1 << 64 for s in self.seeds):
            bad("seeds", "every seed must be an unsigned 64-bit integer")
        if len(set(self.seeds)) != len(self.seeds):
            bad("seeds", "duplicate seeds")
        if not self.betas or any(not (b > 0 and math.isfinite(b)) for b in self.betas):
            bad("betas", "need at least one finite beta > 0")
        if not 0 < self.kappa < 1 / math.sqrt(2):
            bad("kappa", f"must lie in (0, 1/sqrt(2)), got {self.kappa}")
        if not 0 < self.epsilon < 1:
            bad("epsilon", f"must lie in (0, 1), got {self.epsilon}")
        if not 0 < self.nu1 < self.nu2 < 1:
            bad("nu2", f"need 0 < nu1 < nu2 < 1, got nu1={self.nu1}, nu2={self.nu2}")
        if not 2 * self.nu1 < self.nu2:
            bad("nu1", "clustering needs 2*nu1 < nu2")
        if self.m < 1:
            bad("m", f"must be >= 1, got {self.m}")
        if not 0 <= self.eta <= self.xi <= 1:
            bad("eta", f"need 0 <= eta <= xi <= 1, got xi={self.xi}, eta={self.eta}")
        if not self.angles or any(not 0 <= a <= math.pi / 2 for a in self.angles):
            bad("angles", "need angles in [0, pi/2]")
        if not self.out:
            bad("out", "output directory is empty")

    # -- serialization ------------------------------------------------------

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        for section, key, kind in _LAYOUT:
            if not cp.has_section(section):
                cp.add_section(section)
            v = getattr(self, key)
            if kind == "floats":
                text = _fmt_floats(v)
            elif kind == "seeds":
                text = format_seeds(v)
            elif kind == "mode":
                text = v.label
            elif kind == "float":
                text = repr(float(v))
            else:
                text = str(v)
            cp.set(section, key, text)
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise PreconditionError(f"config is not valid: {exc}") from exc
        known = {(s, k) for s, k, _ in _LAYOUT}
        for section in cp.sections():
            for key in cp[section]:
                if (section, key) not in known:
                    raise PreconditionError(f"config field '{section}.{key}' is not recognized")
        kwargs = {}
        for section, key, kind in _LAYOUT:
            if not cp.has_option(section, key):
                continue
            raw = cp.get(section, key)
            try:
                if kind == "int":
                    kwargs[key] = int(raw)
                elif kind == "float":
                    kwargs[key] = float(raw)
                elif kind == "floats":
                    kwargs[key] = _floats(raw)
                elif kind == "seeds":
                    kwargs[key] = parse_seeds(raw)
                elif kind == "mode":
                    kwargs[key] = Mode.parse(raw)
                else:
                    kwargs[key] = raw.strip()
            except (ValueError, PreconditionError) as exc:
                raise PreconditionError(f"config field '{key}': cannot parse {raw!r} ({exc})") from exc
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_ini(fh.read())
        except OSError as exc:
            raise PreconditionError(f"cannot read config {path}: {exc}") from exc

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_ini())

    def replace(self, **changes) -> "ExperimentConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return ExperimentConfig(**values)

    def digest(self) -> str:
        """sha256 of the canonical text, ignoring run-only fields (out, workers)."""
        canon = self.replace(out="-", workers=1).to_ini()
        return hashlib.sha256(canon.encode()).hexdigest()
