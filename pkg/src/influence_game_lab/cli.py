"""Command-line entry point ``influence-game-lab``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .experiments import FIGURES, ExperimentSpec, reproduce, resolve_scenario
from .game.offline import algorithm2_epsilon_nash, br_dynamics_m2
from .game.online import FULL, PARTIAL, online_game_m2, online_game_multi
from .offline_single import solve_offline_single
from .online_single import ENTROPY, SQUARED, estimate_regret, run_online_single, theorem1_bound
from .scenario import path_arrays, sample_path


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _write(text: str, out: str | None, suffix: str = ""):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    if suffix and path.suffix != suffix:
        path = path.with_suffix(suffix)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _to_json(obj) -> str:
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer, np.bool_)):
            return o.item()
        raise TypeError(type(o).__name__)

    return json.dumps(obj, indent=2, default=default) + "\n"


def _write_csv(path: Path, rows: list[dict]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else [], lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


def cmd_reproduce(args) -> int:
    spec = ExperimentSpec(figure=args.figure, trials=args.trials, seed=args.seed, out=args.out)
    if args.sweep:
        spec.sweep = [float(v) if "." in v else int(v) for v in args.sweep.split(",")]
    written = reproduce(spec, workers=args.workers)
    for p in written:
        print(p)
    return 0


def cmd_single_offline(args) -> int:
    sc, _ = resolve_scenario(args.scenario)
    path = sample_path(sc, args.seed)
    sol = solve_offline_single(path, float(sc.budgets[0]), float(sc.caps[0]))
    _write(
        _to_json(
            {
                "b": sol.b,
                "theta": sol.theta,
                "objective": sol.objective,
                "adjusted_objective": sol.adjusted_objective,
                "spent": sol.spent,
                "unspendable": sol.unspendable,
            }
        ),
        args.out,
    )
    return 0


def cmd_single_online(args) -> int:
    sc, _ = resolve_scenario(args.scenario)
    trace = run_online_single(sc, args.seed, eta=args.eta, regularizer=args.regularizer)
    est = estimate_regret(sc, trials=args.trials, seed=args.seed, eta=args.eta, regularizer=args.regularizer)
    summary = {"mean_regret": est.mean, "stderr": est.stderr, "bound": theorem1_bound(sc)}
    if args.out:
        out = Path(args.out)
        _write_csv(out, list(trace.rows()))
        out.with_suffix(".json").write_text(_to_json(summary))
    else:
        sys.stdout.write(_to_json(summary))
    return 0


def _report_dict(rep) -> dict:
    d = {
        "epsilon": rep.epsilon,
        "gains": rep.gains,
        "iterations": rep.iterations,
        "converged": rep.converged,
        "utilities": rep.utilities,
        "average_utilities": rep.average_utilities,
        "spent": rep.profile.spent,
        "budgets": rep.profile.budgets,
    }
    if "utility_gap" in rep.extra:
        d["utility_gap"] = rep.extra["utility_gap"]
        d["reference_utilities"] = rep.extra["reference_utilities"]
    return d


def cmd_game_offline(args) -> int:
    sc, _ = resolve_scenario(args.scenario)
    path = path_arrays(sample_path(sc, args.seed))
    if args.method == "br":
        rep = br_dynamics_m2(path, sc.budgets, sc.caps, tol=args.tol)
    else:
        rep = algorithm2_epsilon_nash(path, sc.budgets, sc.caps)
    doc = {"report": _report_dict(rep), "profile": rep.profile.b}
    _write(_to_json(doc), args.out)
    return 0 if rep.converged else 1


def cmd_game_online(args) -> int:
    sc, _ = resolve_scenario(args.scenario)
    if sc.m == 2 and args.mode == FULL:
        traces, rep = online_game_m2(sc, args.seed)
    else:
        traces, rep = online_game_multi(sc, args.seed, args.mode)
    rows = []
    for j, tr in enumerate(traces):
        for r in tr.rows():
            rows.append({"player": j + 1, **r})
    doc = {"report": _report_dict(rep), "profile": rep.profile.b}
    if args.out:
        out = Path(args.out)
        _write_csv(out.with_suffix(".csv"), rows)
        out.with_suffix(".json").write_text(_to_json(doc))
    else:
        sys.stdout.write(_to_json(doc))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="influence-game-lab", description=__doc__)
    p.add_argument("--list-figures", action="store_true", help="list the bundled figure reproductions")
    sub = p.add_subparsers(dest="command")

    r = sub.add_parser("reproduce", help="run a bundled figure sweep")
    r.add_argument("--figure", required=True, choices=sorted(FIGURES))
    r.add_argument("--trials", type=int, default=None, help="defaults to 50 (20 for fig5)")
    r.add_argument("--seed", type=_u64, default=7)
    r.add_argument("--out", default="results")
    r.add_argument("--sweep", help="comma-separated sweep values overriding the default")
    r.add_argument("--workers", type=int, default=None, help="defaults to $INFLUENCE_GAME_LAB_WORKERS or 1")
    r.set_defaults(func=cmd_reproduce)

    s = sub.add_parser("single-offline", help="hindsight-optimal single-influencer plan")
    s.add_argument("--scenario", required=True)
    s.add_argument("--seed", type=_u64, default=None)
    s.add_argument("--out")
    s.set_defaults(func=cmd_single_offline)

    s = sub.add_parser("single-online", help="online pacing run plus Monte Carlo regret")
    s.add_argument("--scenario", required=True)
    s.add_argument("--seed", type=_u64, default=None)
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--eta", type=float, default=None)
    s.add_argument("--regularizer", choices=[ENTROPY, SQUARED], default=ENTROPY)
    s.add_argument("--out", help="trace CSV; the aggregate JSON is written next to it")
    s.set_defaults(func=cmd_single_online)

    s = sub.add_parser("game-offline", help="offline equilibrium of the influencer game")
    s.add_argument("--scenario", required=True)
    s.add_argument("--seed", type=_u64, default=None)
    s.add_argument("--method", choices=["br", "alg2"], default="br")
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--out")
    s.set_defaults(func=cmd_game_offline)

    s = sub.add_parser("game-online", help="online play of all influencers")
    s.add_argument("--scenario", required=True)
    s.add_argument("--seed", type=_u64, default=None)
    s.add_argument("--mode", choices=[FULL, PARTIAL], default=FULL)
    s.add_argument("--out", help="base path; writes <out>.csv and <out>.json")
    s.set_defaults(func=cmd_game_online)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_figures:
        for name, desc in FIGURES.items():
            print(f"{name}\t{desc}")
        return 0
    if not getattr(args, "func", None):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - report and exit nonzero
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
