"""Parameter scans over seeds and inverse temperatures, and plot-data export.

Layout of a scan directory::

    cells/seed<S>_beta<K>.json   one report per (seed, beta index)
    energy_tables.csv            one row per seed
    level_sets.csv               one row per (seed, beta)
    clusters.csv                 one row per (seed, beta)
    band_dominance.csv           one row per (seed, beta)
    shattering.csv               one row per (seed, beta)
    manifest.json                config hash, version, sha256 of every file

All data files are pure functions of the config; only the manifest carries a
timestamp.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
import math
import os
import statistics
from pathlib import Path

from . import __version__
from .clustering import cluster, shattering_verdict
from .config import ExperimentConfig
from .disorder import build_energy_table
from .errors import OGPViolation, PreconditionError
from .gibbs import (GibbsContext, band_dominance, band_members, cluster_masses,
                    log_partition)
from .landscape import s_epsilon

SUMMARY_FILES = {
    "energy_tables.csv": ["seed", "n", "p", "mode", "max_energy", "argmax", "mean", "var"],
    "level_sets.csv": ["seed", "beta", "epsilon", "s_eps_size", "band_size"],
    "clusters.csv": ["seed", "beta", "ogp", "L", "max_size", "max_diameter",
                     "min_interdistance", "witnesses"],
    "band_dominance.csv": ["n", "p", "mode", "seed", "beta", "kappa", "log_z",
                           "band_mass", "mass_out"],
    "shattering.csv": ["seed", "beta", "holds", "a", "b", "c", "d", "L",
                       "max_mass", "total_mass"],
}
PLOT_METRICS = ["log_z", "band_mass", "mass_out", "band_size", "s_eps_size", "ogp", "L",
                "max_cluster_mass", "shattered"]


def _num(x):
    """JSON/CSV friendly number: None for non-finite values."""
    if x is None:
        return None
    if isinstance(x, bool):
        return x
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in r])
    return buf.getvalue()


def cell_report(table, beta: float, cfg: ExperimentConfig) -> dict:
    """Everything measured for one (disorder, beta) cell."""
    n = table.n
    log_z = log_partition(table, beta)
    m_in, m_out = band_dominance(table, beta, cfg.kappa)
    band = band_members(table, beta, cfg.kappa)
    s_eps = s_epsilon(table, cfg.epsilon)
    cell = {
        "seed": table.seed,
        "beta": beta,
        "table": table.summary(),
        "level_sets": {"epsilon": cfg.epsilon, "s_eps_size": len(s_eps),
                       "band_size": int(band.size), "kappa": cfg.kappa},
        "band_dominance": {"log_z": log_z, "band_mass": m_in, "mass_out": m_out},
    }
    try:
        rep = cluster(band, cfg.nu1, cfg.nu2, n)
    except OGPViolation as exc:
        cell["cluster"] = {"nu1": cfg.nu1, "nu2": cfg.nu2, "ogp": False, "L": None,
                           "witnesses": [[a.bits, b.bits] for a, b in exc.witnesses]}
        cell["shattering"] = None
        return cell
    cell["cluster"] = rep.to_dict()
    ctx = GibbsContext(table, beta, log_z)
    masses = cluster_masses(ctx, rep.clusters)
    v = shattering_verdict(rep, masses, min(2 * cfg.nu1, 0.999), cfg.nu2, cfg.c_exp, cfg.c_prime)
    cell["cluster"]["masses"] = masses.tolist()
    cell["shattering"] = {k: _num(x) for k, x in v.to_dict().items()}
    return cell


def _cell_rows(cell, cfg):
    seed, beta = cell["seed"], cell["beta"]
    ls, bd, cl, sh = cell["level_sets"], cell["band_dominance"], cell["cluster"], cell["shattering"]
    t = cell["table"]
    rows = {
        "level_sets.csv": [seed, beta, ls["epsilon"], ls["s_eps_size"], ls["band_size"]],
        "clusters.csv": [seed, beta, int(cl["ogp"]), cl["L"],
                         max(cl["sizes"]) if cl.get("sizes") else None,
                         cl.get("max_diameter"), cl.get("min_interdistance"),
                         len(cl.get("witnesses", []))],
        "band_dominance.csv": [t["n"], t["p"], t["mode"], seed, beta, cfg.kappa,
                               bd["log_z"], bd["band_mass"], bd["mass_out"]],
    }
    if sh is None:
        rows["shattering.csv"] = [seed, beta, 0, None, None, None, None, None, None, None]
    else:
        rows["shattering.csv"] = [seed, beta, int(sh["holds"]), int(sh["many_clusters"]),
                                  int(sh["separated"]), int(sh["subdominant"]),
                                  int(sh["covering"]), sh["L"], sh["max_mass"], sh["total_mass"]]
    return rows


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def run_scan(cfg: ExperimentConfig, out: str | os.PathLike | None = None,
             timestamp: str | None = None) -> Path:
    """Run every (seed, beta) cell of ``cfg`` and write the report directory."""
    root = Path(out if out is not None else cfg.out)
    try:
        (root / "cells").mkdir(parents=True, exist_ok=True)
        probe = root / ".write_probe"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise PreconditionError(f"output directory {root} is not writable: {exc}") from exc

    files: dict[str, bytes] = {}
    summary_rows = {name: [] for name in SUMMARY_FILES}
    for seed in cfg.seeds:
        table = build_energy_table(cfg.n, cfg.p, seed, cfg.mode, cfg.workers)
        s = table.summary()
        summary_rows["energy_tables.csv"].append(
            [seed, s["n"], s["p"], s["mode"], s["max_energy"], s["argmax"], s["mean"], s["var"]])
        for k, beta in enumerate(cfg.betas):
            cell = cell_report(table, beta, cfg)
            name = f"cells/seed{seed}_beta{k}.json"
            files[name] = (json.dumps(cell, sort_keys=True, indent=1) + "\n").encode()
            for fname, row in _cell_rows(cell, cfg).items():
                summary_rows[fname].append(row)
    for fname, header in SUMMARY_FILES.items():
        files[fname] = _csv_text(header, summary_rows[fname]).encode()
    for name, data in files.items():
        (root / name).write_bytes(data)
    (root / "config.ini").write_text(cfg.to_ini(), encoding="utf-8")
    manifest = {
        "config_sha256": cfg.digest(),
        "version": __version__,
        "timestamp": timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "seeds": len(cfg.seeds),
        "betas": list(cfg.betas),
        "files": {name: _sha256(data) for name, data in sorted(files.items())},
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n",
                                        encoding="utf-8")
    return root


def _load_json(path: Path):
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise PreconditionError(f"report file is missing: {path}")
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise PreconditionError(f"report file is corrupt: {path} ({exc})") from exc


def load_cells(reports: str | os.PathLike) -> list[dict]:
    """Cells of a scan directory, checked against the manifest hashes."""
    root = Path(reports)
    manifest = _load_json(root / "manifest.json")
    if not isinstance(manifest, dict) or "files" not in manifest:
        raise PreconditionError(f"report file is corrupt: {root / 'manifest.json'} (no file list)")
    cells = []
    for name, digest in sorted(manifest["files"].items()):
        path = root / name
        try:
            data = path.read_bytes()
        except FileNotFoundError:
            raise PreconditionError(f"report file is missing: {path}")
        if _sha256(data) != digest:
            raise PreconditionError(f"report file is corrupt: {path} (hash mismatch)")
        if name.startswith("cells/"):
            cell = _load_json(path)
            if not isinstance(cell, dict) or "beta" not in cell or "seed" not in cell:
                raise PreconditionError(f"report file is corrupt: {path} (missing fields)")
            cells.append(cell)
    return cells


def cell_metrics(cell: dict) -> dict:
    bd, ls, cl, sh = cell["band_dominance"], cell["level_sets"], cell["cluster"], cell["shattering"]
    masses = cl.get("masses") or []
    return {
        "log_z": bd["log_z"],
        "band_mass": bd["band_mass"],
        "mass_out": bd["mass_out"],
        "band_size": ls["band_size"],
        "s_eps_size": ls["s_eps_size"],
        "ogp": int(bool(cl["ogp"])),
        "L": cl["L"],
        "max_cluster_mass": max(masses) if masses else None,
        "shattered": None if sh is None else int(bool(sh["holds"])),
    }


def emit_plot_data(reports: str | os.PathLike) -> str:
    """Tidy long CSV ``x_name,x,metric,y,group`` with one row per (cell, metric)
    (group = seed) plus per-x medians (group = median)."""
    cells = load_cells(reports)
    rows = []
    by_x: dict[tuple, list] = {}
    for cell in sorted(cells, key=lambda c: (c["beta"], c["seed"])):
        for metric, y in cell_metrics(cell).items():
            rows.append(["beta", cell["beta"], metric, y, cell["seed"]])
            if y is not None:
                by_x.setdefault((cell["beta"], metric), []).append(y)
    for (x, metric), ys in sorted(by_x.items(), key=lambda kv: (kv[0][0], PLOT_METRICS.index(kv[0][1]))):
        rows.append(["beta", x, metric, float(statistics.median(ys)), "median"])
    return _csv_text(["x_name", "x", "metric", "y", "group"], rows)
