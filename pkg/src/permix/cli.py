"""Command-line front end.

Subcommands: distances, advantage, verify, son. All randomness flows from
an explicit --seed; omitting it on a Monte Carlo command is a usage error.
Exit codes: 0 ok, 1 inequality violation, 2 usage error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import bounds as bd
from . import swapnot as sn
from . import verify
from .ccagame import cca_advantage, optimal_strategy, strategy_to_json
from .errors import PermixError, ResourceLimit
from .permdist import ncpa_advantage, perm_dist_from_json, sep_security
from .probcore import Dist, dist_from_json, frac_str, sep_distance, tv_distance
from .reports import canonical_json, experiment_report

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


class UsageError(PermixError):
    pass


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _load_dist(path: str) -> Dist:
    return dist_from_json(_load_json(path))


def _emit(args: argparse.Namespace, report: dict, csv_rows: list[list] | None = None) -> None:
    if args.format == "csv":
        if csv_rows is None:
            raise UsageError("this command has no CSV form; use --format json")
        buf = io.StringIO()
        csv.writer(buf).writerows(csv_rows)
        text = buf.getvalue()
    else:
        text = canonical_json(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _require_seed(args: argparse.Namespace) -> int:
    if args.seed is None:
        raise UsageError("this command samples randomness; pass an explicit --seed")
    return args.seed


def _cmd_distances(args: argparse.Namespace) -> int:
    p = _load_dist(args.p)
    q = _load_dist(args.q)
    fn = tv_distance if args.metric == "tv" else sep_distance
    value = fn(p, q)
    _emit(
        args,
        experiment_report({"metric": args.metric, "p": args.p, "q": args.q}, "exact", value),
        csv_rows=[["metric", "value"], [args.metric, frac_str(value)]],
    )
    return EXIT_OK


def _cmd_advantage(args: argparse.Namespace) -> int:
    x = perm_dist_from_json(_load_json(args.dist))
    if args.kind == "ncpa":
        value = ncpa_advantage(x, args.q)
    elif args.kind == "sep":
        value = sep_security(x, args.q)
    else:
        value = cca_advantage(x, args.q)
        if args.tree_out:
            tree = optimal_strategy(x, args.q)
            Path(args.tree_out).write_text(canonical_json(strategy_to_json(tree)))
    _emit(
        args,
        experiment_report(
            {"kind": args.kind, "n": x.n, "q": args.q, "dist": args.dist}, "exact", value
        ),
        csv_rows=[["kind", "q", "value"], [args.kind, args.q, frac_str(value)]],
    )
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    suite = args.suite
    if suite == "cca-sep":
        report = verify.sweep_cca_separation(args.count, _require_seed(args), threads=args.threads)
    elif suite == "composition":
        report = verify.sweep_inverse_composition(args.count, _require_seed(args), threads=args.threads)
    elif suite == "reversal-gap":
        report = verify.sweep_reversal_gap(args.count, _require_seed(args), args.m_max, threads=args.threads)
    elif suite == "sep-composition":
        report = verify.sweep_sep_composition(args.count, _require_seed(args), args.m_max, threads=args.threads)
    elif suite == "span":
        mc_seed = args.seed if args.trials else None
        if args.trials and mc_seed is None:
            raise UsageError("span Monte Carlo cross-check needs --seed")
        report = verify.span_grid_check(
            args.d_min, args.d_max, args.extra_rounds, args.trials, mc_seed
        )
    elif suite == "coupling":
        report = verify.coupling_check(args.trials or 100_000, _require_seed(args), args.d, args.q, args.r)
    elif suite == "mixing-floor":
        report = verify.mixing_floor_check(args.d, args.q, args.r)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown suite {suite}")
    _emit(args, report.to_json())
    return EXIT_OK if report.holds else EXIT_VIOLATION


def _joint_csv(law: sn.TrackedJointDist) -> list[list]:
    rows: list[list] = [["target", "probability"]]
    if law.mode == "exact-dyadic":
        for ys, w in sorted(law.mapping.items()):
            rows.append([" ".join(map(str, ys)), frac_str(w)])
    else:
        dense = law.dense
        for ys in itertools.product(range(law.params.n_cards), repeat=law.q):
            rows.append([" ".join(map(str, ys)), repr(float(dense[ys]))])
    return rows


def _cmd_son(args: argparse.Namespace) -> int:
    params = sn.ShuffleParams(args.d, args.r)
    sub = args.son_command
    if sub == "exact":
        xs = args.xs if args.xs is not None else list(range(args.q))
        evolve = sn.evolve_son_joint if args.process == "shuffle" else sn.evolve_free_joint
        law = evolve(params, xs, mode=args.mode, budget=args.budget)
        value = law.min_over_distinct()
        report = experiment_report(
            {"d": args.d, "r": args.r, "q": law.q, "xs": list(law.xs), "process": args.process},
            law.mode,
            value,
            extra={"support": len(law.mapping) if law.mode == "exact-dyadic" else None,
                   "value_is": "min_probability_over_distinct_targets"},
        )
        _emit(args, report, csv_rows=_joint_csv(law))
        return EXIT_OK
    if sub == "sep":
        value = sn.sep_from_uniform(params, args.q, mode=args.mode, budget=args.budget)
        report = experiment_report(
            {"d": args.d, "r": args.r, "q": args.q},
            "exact" if isinstance(value, Fraction) else "float64",
            value,
        )
        _emit(args, report)
        return EXIT_OK
    if sub == "simulate":
        seed = _require_seed(args)
        trials = args.trials or 10_000
        xs = args.xs if args.xs is not None else list(range(args.q))
        batch = sn.coupled_batch(params, xs, trials, seed)
        mean, se = batch.pair_round_rate(params, len(xs))
        report = experiment_report(
            {"d": args.d, "r": args.r, "q": len(xs), "xs": list(xs)},
            "mc",
            mean,
            seed=seed,
            trials=trials,
            extra={
                "value_is": "per_pair_round_collision_rate",
                "rate_se": se,
                "clean_trials": int((~batch.any_collision).sum()),
                "clean_trials_consistent": batch.clean_trials_ok,
            },
        )
        _emit(args, report)
        return EXIT_OK
    if sub == "attack":
        seed = _require_seed(args)
        trials = args.trials or 100_000
        result = sn.subspace_attack(params, args.q, trials, seed)
        report = experiment_report(
            {"d": args.d, "r": args.r, "q": args.q}, "mc", result.advantage,
            seed=seed, trials=trials, ci95=result.ci95,
            extra={"fire_rate_shuffle": result.fire_rate_shuffle,
                   "fire_rate_uniform": result.fire_rate_uniform},
        )
        _emit(args, report)
        return EXIT_OK
    if sub == "collision":
        seed = _require_seed(args)
        trials = args.trials or 1_000_000
        est = sn.conditional_collision_estimate(
            params, (args.xs[0], args.xs[1]), (args.ys[0], args.ys[1]), trials, seed
        )
        bound = bd.collision_conditional_bound(args.d, args.r)
        report = experiment_report(
            {"d": args.d, "r": args.r, "xs": list(args.xs[:2]), "ys": list(args.ys[:2])},
            "mc",
            est.estimate,
            seed=seed,
            trials=trials,
            ci95=est.ci95,
            extra={"accepted": est.accepted, "bound": frac_str(bound),
                   "below_bound": est.ci95[1] <= float(bound)},
        )
        _emit(args, report)
        return EXIT_OK if est.ci95[1] <= float(bound) else EXIT_VIOLATION
    if sub == "bounds":
        reports = [
            bd.shuffle_joint_floor(args.d, args.r, args.q).to_json(),
            {"name": "span_lower_bound", "inputs": {"d": args.d, "r": args.r},
             "value": frac_str(bd.span_lower_bound(args.d, args.r)), "vacuous": False},
            {"name": "collision_conditional_bound", "inputs": {"d": args.d, "r": args.r},
             "value": frac_str(bd.collision_conditional_bound(args.d, args.r)), "vacuous": False},
            {"name": "target_pair_bound", "inputs": {"d": args.d, "r": args.r},
             "value": frac_str(bd.target_pair_bound(args.d, args.r)), "vacuous": False},
            {"name": "target_joint_bound", "inputs": {"d": args.d, "r": args.r, "q": args.q},
             "value": frac_str(bd.target_joint_bound(args.d, args.r, args.q)), "vacuous": False},
        ]
        if args.eps is not None:
            eps = Fraction(args.eps)
            reports.append(bd.cca_bound_for_eps(eps).to_json())
            sp = bd.security_params(args.d, eps)
            reports.append({"name": "security_params", "inputs": {"d": args.d, "eps": args.eps},
                            "value": {"r_min": sp.r_min, "q_max": sp.q_max}, "vacuous": False})
        _emit(args, {"bounds": reports, "params": {"d": args.d, "r": args.r, "q": args.q}})
        return EXIT_OK
    raise UsageError(f"unknown son subcommand {sub}")  # pragma: no cover


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permix",
        description="Exact distinguishing metrics for random permutations and "
        "swap-or-not shuffle mixing experiments.",
    )
    parser.add_argument("--seed", type=int, default=None, help="seed for any sampled randomness")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--out", default=None, help="write the report to this path")
    parser.add_argument(
        "--budget", type=int, default=sn.DEFAULT_DP_BUDGET,
        help="joint-state budget N^q for exact dynamic programming",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p_dist = commands.add_parser("distances", help="distance between two distribution files")
    p_dist.add_argument("p")
    p_dist.add_argument("q")
    p_dist.add_argument("--metric", choices=("tv", "sep"), default="tv")
    p_dist.set_defaults(fn=_cmd_distances)

    p_adv = commands.add_parser("advantage", help="security of a permutation distribution file")
    p_adv.add_argument("dist")
    p_adv.add_argument("--q", type=int, required=True)
    p_adv.add_argument("--kind", choices=("ncpa", "cca", "sep"), default="ncpa")
    p_adv.add_argument("--tree-out", default=None, help="write the optimal strategy tree (cca only)")
    p_adv.set_defaults(fn=_cmd_advantage)

    p_ver = commands.add_parser("verify", help="run an inequality sweep; exit 1 on any violation")
    p_ver.add_argument(
        "suite",
        choices=("cca-sep", "composition", "reversal-gap", "sep-composition", "span", "coupling", "mixing-floor"),
    )
    p_ver.add_argument("--count", type=int, default=200, help="random instances for sweeps")
    p_ver.add_argument("--trials", type=int, default=0, help="Monte Carlo trials where applicable")
    p_ver.add_argument("--m-max", type=int, default=8, help="max state count for chain sweeps")
    p_ver.add_argument("--d", type=int, default=6)
    p_ver.add_argument("--q", type=int, default=4)
    p_ver.add_argument("--r", type=int, default=20)
    p_ver.add_argument("--d-min", type=int, default=2)
    p_ver.add_argument("--d-max", type=int, default=8)
    p_ver.add_argument("--extra-rounds", type=int, default=12)
    p_ver.set_defaults(fn=_cmd_verify)

    p_son = commands.add_parser("son", help="swap-or-not experiments")
    p_son.add_argument(
        "son_command", choices=("simulate", "exact", "sep", "attack", "collision", "bounds")
    )
    p_son.add_argument("--d", type=int, required=True)
    p_son.add_argument("--r", type=int, required=True)
    p_son.add_argument("--q", type=int, default=2)
    p_son.add_argument("--xs", type=int, nargs="+", default=None, help="tracked start positions")
    p_son.add_argument("--ys", type=int, nargs="+", default=None, help="target positions")
    p_son.add_argument("--trials", type=int, default=0)
    p_son.add_argument("--mode", choices=("exact", "float64"), default="exact")
    p_son.add_argument("--process", choices=("shuffle", "free"), default="shuffle")
    p_son.add_argument("--eps", default=None, help="epsilon (fraction like 1/16) for bound reports")
    p_son.set_defaults(fn=_cmd_son)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "son" and args.son_command == "collision":
        if not args.xs or len(args.xs) != 2 or not args.ys or len(args.ys) != 2:
            parser.error("son collision needs --xs A B and --ys A B")
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except PermixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
