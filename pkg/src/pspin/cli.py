"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 precondition or validation failure,
3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .errors import BudgetExceeded, FactorizationError, OGPViolation, PSpinError

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _model_args(p, seed=True):
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--mode", default=None, help="ExactTensor, GramCholesky or RemLimit")
    if seed:
        p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    def clean(x):
        if isinstance(x, float) and not math.isfinite(x):
            return None
        if isinstance(x, dict):
            return {k: clean(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [clean(v) for v in x]
        return x
    return json.dumps(clean(obj), indent=1) + "\n"


def _table(a):
    from .disorder import build_energy_table
    return build_energy_table(a.n, a.p, a.seed, a.mode, a.workers)


def cmd_energy_table(a):
    t = _table(a)
    if a.csv:
        _emit(t.to_csv(), a.out)
    elif a.out:
        t.save(a.out)
    else:
        _emit(_json(t.summary()), None)


def cmd_level_set(a):
    from .landscape import Unit, level_set, s_epsilon
    t = _table(a)
    if a.epsilon is not None:
        ls = s_epsilon(t, a.epsilon)
    else:
        ls = level_set(t, a.lower, a.upper, Unit.parse(a.unit))
    _emit(ls.to_csv(t), a.out)


def _cluster_input(a, t):
    from .gibbs import band_members
    from .landscape import s_epsilon
    if a.beta is not None:
        return band_members(t, a.beta, a.kappa)
    return s_epsilon(t, a.epsilon).members


def cmd_cluster(a):
    from .clustering import cluster
    t = _table(a)
    rep = cluster(_cluster_input(a, t), a.nu1, a.nu2, t.n)
    _emit(rep.to_json() + "\n", a.out)


def cmd_shatter(a):
    from .clustering import cluster, shattering_verdict
    from .gibbs import GibbsContext, band_dominance, band_members, cluster_masses
    t = _table(a)
    rep = cluster(band_members(t, a.beta, a.kappa), a.nu1, a.nu2, t.n)
    ctx = GibbsContext.build(t, a.beta)
    v = shattering_verdict(rep, cluster_masses(ctx, rep.clusters), min(2 * a.nu1, 0.999),
                           a.nu2, a.c_exp, a.c_prime)
    m_in, m_out = band_dominance(t, a.beta, a.kappa)
    _emit(_json({"verdict": v.to_dict(), "band_mass": m_in, "mass_out": m_out}), a.out)


def cmd_exponents(a):
    from .bounds import exponent_report
    _emit(_json(exponent_report(a.epsilon, a.p, a.beta, a.n, a.nu1, a.nu2)), a.out)


def cmd_mogp_tune(a):
    from .mogp import tune_mogp
    r = tune_mogp(a.m, a.gamma)
    d = r.to_dict()
    _emit(_json({"xi": d["xi"], "eta": d["eta"], "c": d["c"], "p_star": d["p_star"],
                 "psi": d["psi"]}), a.out)


def cmd_mogp_search(a):
    from .mogp import empirical_mogp_search
    angles = [float(x) for x in a.angles.split(",")] if a.angles else [0.0]
    r = empirical_mogp_search(a.n, a.p, a.m, a.gamma, a.xi, a.eta, angles, a.seed,
                              a.mode or "RemLimit", a.workers)
    _emit(_json({"count": r.count, "tuples_examined": r.tuples_examined,
                 "coverage": r.coverage}), a.out)


def cmd_tails_check(a):
    from .tails import tails_check, tails_check_csv
    rows = tails_check(a.samples, a.seed, a.workers, a.points)
    _emit(tails_check_csv(rows), a.out)
    if not all(r["pass"] for r in rows):
        raise PSpinError("some tail-bound checks failed")


def cmd_scan(a):
    from .config import ExperimentConfig
    from .scan import run_scan
    cfg = ExperimentConfig.load(a.config)
    changes = {}
    if a.workers is not None:
        changes["workers"] = a.workers
    if a.out is not None:
        changes["out"] = a.out
    if changes:
        cfg = cfg.replace(**changes)
    root = run_scan(cfg)
    sys.stdout.write(f"{root}\n")


def cmd_plot_data(a):
    from .scan import emit_plot_data
    _emit(emit_plot_data(a.reports), a.out)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pspin", description="Pure p-spin landscape laboratory")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("energy-table", help="build an exhaustive energy table")
    _model_args(p)
    p.add_argument("--out", help="binary output file (stdout summary if omitted)")
    p.add_argument("--csv", action="store_true", help="write CSV instead of binary")
    p.set_defaults(func=cmd_energy_table)

    p = sub.add_parser("level-set", help="list a level set as CSV")
    _model_args(p)
    p.add_argument("--epsilon", type=float, help="S(eps); overrides --lower/--upper")
    p.add_argument("--lower", type=float, default=-math.inf)
    p.add_argument("--upper", type=float, default=math.inf)
    p.add_argument("--unit", default="absolute", help="absolute or sqrt2ln2")
    p.add_argument("--out")
    p.set_defaults(func=cmd_level_set)

    for name, func in (("cluster", cmd_cluster), ("shatter", cmd_shatter)):
        p = sub.add_parser(name, help=f"{name} a level set or energy band")
        _model_args(p)
        p.add_argument("--nu1", type=float, default=0.2)
        p.add_argument("--nu2", type=float, default=0.45)
        p.add_argument("--beta", type=float, default=None if name == "cluster" else 1.1)
        p.add_argument("--kappa", type=float, default=0.12)
        p.add_argument("--epsilon", type=float, default=0.3)
        if name == "shatter":
            p.add_argument("--c-exp", type=float, default=0.18)
            p.add_argument("--c-prime", type=float, default=0.17)
        p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("exponents", help="closed-form exponents as JSON")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--p", type=int, default=40)
    p.add_argument("--beta", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--nu1", type=float)
    p.add_argument("--nu2", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("mogp", help="m-OGP tuner and search")
    msub = p.add_subparsers(dest="mogp_command", parser_class=_Parser)
    msub.required = True
    q = msub.add_parser("tune")
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--gamma", type=float, required=True)
    q.add_argument("--out")
    q.set_defaults(func=cmd_mogp_tune)
    q = msub.add_parser("search")
    _model_args(q)
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--gamma", type=float, required=True)
    q.add_argument("--xi", type=float, required=True)
    q.add_argument("--eta", type=float, required=True)
    q.add_argument("--angles", help="comma-separated angles in [0, pi/2]")
    q.add_argument("--out")
    q.set_defaults(func=cmd_mogp_search)

    p = sub.add_parser("tails", help="tail-bound checks")
    tsub = p.add_subparsers(dest="tails_command", parser_class=_Parser)
    tsub.required = True
    q = tsub.add_parser("check")
    q.add_argument("--samples", type=int, default=200_000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--workers", type=int, default=1)
    q.add_argument("--points", type=int, default=1000, help="Savage grid size")
    q.add_argument("--out")
    q.set_defaults(func=cmd_tails_check)

    p = sub.add_parser("scan", help="run a configured scan")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("plot-data", help="tidy CSV from a scan directory")
    p.add_argument("--reports", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plot_data)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        args.func(args)
    except BudgetExceeded as exc:
        sys.stderr.write(f"budget exceeded: {exc}\n")
        return EXIT_BUDGET
    except OGPViolation as exc:
        sys.stderr.write(f"precondition failed: {exc}\n")
        sys.stderr.write(json.dumps([[a.bits, b.bits] for a, b in exc.witnesses]) + "\n")
        return EXIT_PRECONDITION
    except (PSpinError, FactorizationError, ValueError) as exc:
        sys.stderr.write(f"precondition failed: {exc}\n")
        return EXIT_PRECONDITION
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_PRECONDITION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
