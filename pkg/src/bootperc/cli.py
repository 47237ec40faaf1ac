"""Command line front end.

Every subcommand prints exactly one JSON document on stdout.  Exit codes:
0 success, 1 a checked property failed, 2 usage error, 3 search budget
exhausted.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import secrets
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from . import combinatorics as cb
from .dynamics import Configuration, Rule, percolation_time
from .extremal import BudgetExhausted, SearchBudget, census_by_excess, census_matches_semi_canonical
from .geometry import ball_size
from .stochastic import (
    SummaryStats,
    TrialPlan,
    exact_rho1,
    poisson_comparison,
    run_trials,
    sample_configuration,
    solve_q,
    tbound_check,
    tv_to_poisson,
)

EXACT_BALL_LIMIT = 25  # largest window for which simulate computes lambda exactly


class UsageError(Exception):
    pass


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("BOOTPERC_JOBS", "1")))
    except ValueError:
        return 1


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _emit(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")


def _manifest(args, started: str, seed=None) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    return {
        "subcommand": args.command,
        "params": params,
        "seed": seed,
        "version": __version__,
        "started": started,
        "finished": _now(),
    }


# -- subcommands ---------------------------------------------------------------


def cmd_counts(args) -> tuple[dict, int]:
    d, r, t = args.d, args.r, args.t
    if d < 1 or not 2 <= r <= 2 * d or t < 0:
        raise UsageError(f"need d >= 1, 2 <= r <= 2d, t >= 0 (got d={d}, r={r}, t={t})")
    if r > d:
        return {"regime": "subcritical", "m": cb.m(d, r, t), "m_subcritical": cb.m(d, r, t)}, 0
    return {
        "regime": "supercritical",
        "m": cb.m(d, r, t),
        "l": cb.l(d, r, t),
        "m_modified": cb.m_modified(d, r, t),
        "g": cb.g(d, r),
        "g_modified": cb.g_modified(d, r),
    }, 0


def cmd_identities(args) -> tuple[dict, int]:
    if args.d_max < 2 or args.k_max < 0:
        raise UsageError("need --d-max >= 2 and --k-max >= 0")
    checked = 0
    failures = []
    for d in range(2, args.d_max + 1):
        for r in range(2, d + 1):
            for f in range(d + 1):
                for k in range(args.k_max + 1):
                    checks = [("mini", cb.identity_mini(d, r, f, k))]
                    if d > r:
                        checks.append(("mega", cb.identity_mega(d, r, f, k)))
                    for name, res in checks:
                        checked += 1
                        if not res.holds:
                            failures.append({"identity": name, "d": d, "r": r, "f": f, "k": k, "lhs": res.lhs, "rhs": res.rhs})
    return {"checked": checked, "failures": failures, "ok": not failures}, (1 if failures else 0)


def cmd_canonical(args) -> tuple[dict, int]:
    d, r, t = args.d, args.r, args.t
    if args.semi:
        if not 2 <= r <= d or t < 2:
            raise UsageError("semi-canonical sets need 2 <= r <= d and t >= 2")
        sets = [S for _, S in cb.enumerate_semi_canonical(d, r, t)]
        return {"kind": "semi-canonical", "count": len(sets), "formula_g": cb.g(d, r), "size": cb.m(d, r, t),
                "sets": sorted(sorted(list(x) for x in S) for S in sets)}, 0
    regime = "supercritical" if r <= d else "subcritical"
    if d < 1 or not 2 <= r <= 2 * d or t < 0:
        raise UsageError(f"need d >= 1, 2 <= r <= 2d, t >= 0 (got d={d}, r={r}, t={t})")
    specs = cb.canonical_specs(d, r, t, regime)
    out = [
        {"orientation": list(s.orientation), "signs": list(s.signs), "sites": sorted(list(x) for x in cb.canonical_set(s))}
        for s in specs
    ]
    return {"kind": "canonical", "regime": regime, "count": len(out), "size": cb.m(d, r, t), "sets": out}, 0


def cmd_extremal(args) -> tuple[dict, int]:
    rule = Rule(args.rule, args.r)
    try:
        rule.validate(args.d)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.t < 0 or args.k_max < 0:
        raise UsageError("need t >= 0 and k-max >= 0")
    budget = SearchBudget(
        max_subset_size=args.max_size,
        symmetry=not args.no_symmetry,
        workers=args.jobs,
        node_cap=args.node_cap,
        witness_cap=args.witness_cap,
    )
    census = census_by_excess(args.d, rule, args.t, args.k_max, budget)
    doc = census.to_dict()
    if rule.kind == "standard" and 2 <= args.r <= args.d and args.t >= 2 and census.entry(0).witnesses is not None:
        report = census_matches_semi_canonical(args.d, args.r, args.t, census)
        doc["semi_canonical"] = {k: report[k] for k in ("census_count", "enumeration_count", "formula_g", "match")}
    return doc, 0


def _plan(args, rule: Rule, q: float, seed: int) -> TrialPlan:
    try:
        return TrialPlan(args.d, args.n, rule, q, args.t, args.trials, seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _write_csv(path: str, summary: SummaryStats) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trial", "T", "F"])
        w.writerows(summary.rows())


def _experiment(args, rule: Rule, q: float, seed: int, poisson: bool) -> dict:
    plan = _plan(args, rule, q, seed)
    started = time.perf_counter()
    if poisson:
        rep = poisson_comparison(plan, jobs=args.jobs)
        summary = rep.pop("summary")
        extra = {k: (float(v) if isinstance(v, float) else v) for k, v in rep.items()}
    else:
        block = run_trials(plan, jobs=args.jobs)
        summary = SummaryStats(plan, block.T, block.F)
        extra = {"lambda_exact": None, "tv_distance": None, "stein_chen_bound": None}
        if ball_size(plan.d, plan.t) <= EXACT_BALL_LIMIT:
            lam = plan.n**plan.d * exact_rho1(plan.d, rule, plan.t, plan.q)
            extra["lambda_exact"] = lam
            extra["tv_distance"] = float(tv_to_poisson(summary.F, lam))
        extra["tbound"] = tbound_check(plan.d, plan.t, plan.q)
    finite = [v for v in summary.T if not math.isinf(v)]
    doc = {
        "plan": plan.to_dict(),
        "empirical_T": summary.empirical_T,
        "empirical_F": summary.empirical_F,
        "mean_F": summary.mean_F,
        "fraction_T_infinite": float(sum(math.isinf(v) for v in summary.T) / plan.trials),
        "max_finite_T": int(max(finite)) if finite else None,
        "seed": seed,
        "runtime_ms": (time.perf_counter() - started) * 1000,
        **extra,
    }
    if args.out:
        _write_csv(args.out, summary)
    return doc


def _seed(args) -> int:
    return args.seed if args.seed is not None else secrets.randbits(63)


def cmd_simulate(args) -> tuple[dict, int]:
    return _experiment(args, Rule(args.rule, args.r), args.q, _seed(args), poisson=False), 0


def cmd_subcritical(args) -> tuple[dict, int]:
    if not args.d < args.r <= 2 * args.d:
        raise UsageError(f"subcritical runs need d < r <= 2d (got d={args.d}, r={args.r})")
    return _experiment(args, Rule("standard", args.r), args.q, _seed(args), poisson=False), 0


def cmd_poisson(args) -> tuple[dict, int]:
    rule = Rule(args.rule, args.r)
    if (args.q is None) == (args.target_lambda is None):
        raise UsageError("give exactly one of --q and --lambda")
    q = args.q if args.q is not None else solve_q(args.d, rule, args.t, args.n, args.target_lambda)
    doc = _experiment(args, rule, q, _seed(args), poisson=True)
    doc["q"] = q
    return doc, 0


def cmd_snapshot(args) -> tuple[dict, int]:
    if args.action == "write":
        if args.n is None or args.q is None:
            raise UsageError("snapshot write needs --n and --q")
        seed = _seed(args)
        plan = _plan(args, Rule(args.rule, args.r), args.q, seed)
        conf = sample_configuration(plan, args.trial)
        text = conf.to_json()
        if args.file:
            Path(args.file).write_text(text)
        return {"written": args.file, "uninfected": conf.num_uninfected, "seed": seed, "snapshot": json.loads(text)}, 0
    if not args.file:
        raise UsageError("snapshot read needs --file")
    try:
        conf = Configuration.from_json(Path(args.file).read_text())
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read snapshot: {exc}") from exc
    doc = {
        "kind": conf.lattice.kind,
        "d": conf.lattice.d,
        "rule": {"kind": conf.rule.kind, "r": conf.rule.r},
        "time": conf.time,
        "uninfected": conf.num_uninfected,
    }
    if conf.lattice.is_torus:
        T = percolation_time(conf)
        doc["percolation_time"] = "inf" if math.isinf(T) else T
    return doc, 0


# -- parser --------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bootperc", description="r-neighbour bootstrap percolation laboratory", allow_abbrev=False)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def dims(sp, t=True):
        sp.add_argument("--d", type=int, required=True)
        sp.add_argument("--r", type=int, required=True)
        if t:
            sp.add_argument("--t", type=int, required=True)

    sp = sub.add_parser("counts", help="closed-form extremal counts")
    dims(sp)
    sp.set_defaults(func=cmd_counts)

    sp = sub.add_parser("identities", help="sweep the binomial layer identities")
    sp.add_argument("--d-max", type=int, required=True)
    sp.add_argument("--k-max", type=int, required=True)
    sp.set_defaults(func=cmd_identities)

    sp = sub.add_parser("canonical", help="list canonical or semi-canonical sets")
    dims(sp)
    sp.add_argument("--semi", action="store_true")
    sp.set_defaults(func=cmd_canonical)

    sp = sub.add_parser("extremal", help="exhaustive census of protecting sets")
    dims(sp)
    sp.add_argument("--rule", choices=("standard", "modified"), default="standard")
    sp.add_argument("--k-max", type=int, default=0)
    sp.add_argument("--jobs", type=int, default=_default_jobs())
    sp.add_argument("--node-cap", type=int, default=None)
    sp.add_argument("--max-size", type=int, default=None)
    sp.add_argument("--witness-cap", type=int, default=10_000)
    sp.add_argument("--no-symmetry", action="store_true")
    sp.set_defaults(func=cmd_extremal)

    def plan_flags(sp, rule=True):
        sp.add_argument("--d", type=int, required=True)
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--r", type=int, required=True)
        if rule:
            sp.add_argument("--rule", choices=("standard", "modified"), default="standard")
        sp.add_argument("--t", type=int, default=1)
        sp.add_argument("--trials", type=int, default=100)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--jobs", type=int, default=_default_jobs())
        sp.add_argument("--out", default=None, help="per-trial CSV")

    sp = sub.add_parser("simulate", help="Monte Carlo law of the percolation time")
    plan_flags(sp)
    sp.add_argument("--q", type=float, required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("poisson", help="compare uninfected counts with Poisson")
    plan_flags(sp)
    sp.add_argument("--q", type=float, default=None)
    sp.add_argument("--lambda", dest="target_lambda", type=float, default=None)
    sp.set_defaults(func=cmd_poisson)

    sp = sub.add_parser("subcritical", help="Monte Carlo for thresholds r > d")
    plan_flags(sp, rule=False)
    sp.add_argument("--q", type=float, required=True)
    sp.set_defaults(func=cmd_subcritical)

    sp = sub.add_parser("snapshot", help="write or read a configuration snapshot")
    sp.add_argument("action", choices=("write", "read"))
    sp.add_argument("--file", default=None)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--r", type=int, default=2)
    sp.add_argument("--rule", choices=("standard", "modified"), default="standard")
    sp.add_argument("--q", type=float, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--trial", type=int, default=0)
    sp.set_defaults(func=cmd_snapshot, t=0, trials=1)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = _now()
    try:
        doc, code = args.func(args)
    except UsageError as exc:
        print(f"bootperc {args.command}: {exc}", file=sys.stderr)
        return 2
    except BudgetExhausted as exc:
        print(f"bootperc {args.command}: budget exhausted: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"bootperc {args.command}: {exc}", file=sys.stderr)
        return 2
    doc["manifest"] = _manifest(args, started, doc.get("seed"))
    _emit(doc)
    return code


if __name__ == "__main__":
    sys.exit(main())
