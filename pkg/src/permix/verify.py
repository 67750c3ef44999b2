"""Cross-module verification suites.

Each suite sweeps seeded random instances (or an exhaustive grid) through
an inequality that the rest of the package is built on, and reports the
minimum slack. A violation is a bug-finder outcome, not an expected one.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable

import numpy as np

from . import bounds as bd
from . import swapnot as sn
from .ccagame import check_cca_le_separation, check_inverse_composition
from .markov import (
    TransitionMatrix,
    composition_gap,
    random_doubly_stochastic,
    sep_composition_check,
    uniform_pi,
)
from .permdist import PermDist, Permutation, all_permutations
from .probcore import Dist, frac_str
from .rng import make_generator


@dataclass
class SuiteReport:
    suite: str
    params: dict[str, Any]
    instances: int
    holds: bool
    min_slack: Fraction | float | None = None
    violations: list[dict] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "suite": self.suite,
            "params": self.params,
            "instances": self.instances,
            "holds": self.holds,
            "violations": self.violations,
        }
        if self.min_slack is not None:
            out["min_slack"] = (
                frac_str(self.min_slack)
                if isinstance(self.min_slack, Fraction)
                else self.min_slack
            )
        out.update(self.extra)
        return out


def random_perm_dist(n: int, rng: np.random.Generator) -> PermDist:
    """Random rational distribution over S_n with small integer weights;
    zero weights give varied (sparse) supports."""
    perms = all_permutations(n)
    while True:
        weights = rng.integers(0, 8, size=len(perms))
        total = int(weights.sum())
        if total:
            break
    return PermDist(
        n, Dist({p: Fraction(int(w), total) for p, w in zip(perms, weights) if w})
    )


def _run_ordered(tasks: Iterable[Callable[[], Any]], threads: int) -> list[Any]:
    tasks = list(tasks)
    if threads <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(task) for task in tasks]
        return [f.result() for f in futures]


def sweep_cca_separation(
    count: int, seed: int, ns: tuple[int, ...] = (3, 4), qs: tuple[int, ...] = (1, 2), threads: int = 1
) -> SuiteReport:
    """Adaptive game value is at most separation security, on random dists."""
    rng = make_generator(seed)
    cases = [(ns[i % len(ns)], random_perm_dist(ns[i % len(ns)], rng)) for i in range(count)]

    def check(case):
        n, dist = case
        worst = None
        for q in qs:
            report = check_cca_le_separation(dist, q)
            slack = report.sep - report.cca
            if worst is None or slack < worst[0]:
                worst = (slack, q, report)
        return dist, worst

    results = _run_ordered([lambda c=c: check(c) for c in cases], threads)
    min_slack: Fraction | None = None
    violations = []
    for dist, (slack, q, report) in results:
        if min_slack is None or slack < min_slack:
            min_slack = slack
        if not report.holds:
            violations.append(
                {"n": dist.n, "q": q, "cca": frac_str(report.cca), "sep": frac_str(report.sep)}
            )
    return SuiteReport(
        "cca-sep",
        {"count": count, "seed": seed, "ns": list(ns), "qs": list(qs)},
        count,
        not violations,
        min_slack,
        violations,
    )


def sweep_inverse_composition(
    count: int, seed: int, n: int = 3, qs: tuple[int, ...] = (1, 2), threads: int = 1
) -> SuiteReport:
    """Game value of x^{-1} o y is at most the summed non-adaptive advantages."""
    rng = make_generator(seed)
    cases = [(random_perm_dist(n, rng), random_perm_dist(n, rng)) for _ in range(count)]

    def check(case):
        x, y = case
        worst = None
        for q in qs:
            report = check_inverse_composition(x, y, q)
            slack = report.rhs - report.lhs
            if worst is None or slack < worst[0]:
                worst = (slack, q, report)
        return worst

    results = _run_ordered([lambda c=c: check(c) for c in cases], threads)
    min_slack: Fraction | None = None
    violations = []
    for slack, q, report in results:
        if min_slack is None or slack < min_slack:
            min_slack = slack
        if not report.holds:
            violations.append({"q": q, "lhs": frac_str(report.lhs), "rhs": frac_str(report.rhs)})
    return SuiteReport(
        "composition",
        {"count": count, "seed": seed, "n": n, "qs": list(qs)},
        count,
        not violations,
        min_slack,
        violations,
    )


def _random_chain_pairs(count: int, seed: int, m_max: int) -> list[tuple[int, TransitionMatrix, TransitionMatrix]]:
    rng = make_generator(seed)
    out = []
    for _ in range(count):
        m = int(rng.integers(2, m_max + 1))
        out.append((m, random_doubly_stochastic(m, rng), random_doubly_stochastic(m, rng)))
    return out


def sweep_reversal_gap(count: int, seed: int, m_max: int = 8, threads: int = 1) -> SuiteReport:
    """Pointwise composition inequality on random doubly-stochastic pairs."""
    cases = _random_chain_pairs(count, seed, m_max)

    def check(case):
        m, p, q = case
        return composition_gap(p, q, uniform_pi(m))

    results = _run_ordered([lambda c=c: check(c) for c in cases], threads)
    min_slack = min(r.min_slack for r in results)
    violations = [
        {"index": i, "min_slack": frac_str(r.min_slack)}
        for i, r in enumerate(results)
        if not r.holds
    ]
    return SuiteReport(
        "reversal-gap",
        {"count": count, "seed": seed, "m_max": m_max},
        count,
        not violations,
        min_slack,
        violations,
    )


def sweep_sep_composition(count: int, seed: int, m_max: int = 8, threads: int = 1) -> SuiteReport:
    """Separation of the composed chain vs summed family TV distances."""
    cases = _random_chain_pairs(count, seed, m_max)

    def check(case):
        m, p, q = case
        return sep_composition_check(p, q, uniform_pi(m))

    results = _run_ordered([lambda c=c: check(c) for c in cases], threads)
    min_slack = min(r.tv_sum - r.sep for r in results)
    violations = [
        {"index": i, "sep": frac_str(r.sep), "tv_sum": frac_str(r.tv_sum)}
        for i, r in enumerate(results)
        if not r.holds
    ]
    return SuiteReport(
        "sep-composition",
        {"count": count, "seed": seed, "m_max": m_max},
        count,
        not violations,
        min_slack,
        violations,
    )


def span_grid_check(
    d_min: int = 2,
    d_max: int = 8,
    extra_rounds: int = 12,
    mc_trials: int = 0,
    mc_seed: int | None = None,
    mc_point: tuple[int, int] = (6, 9),
) -> SuiteReport:
    """Exact spanning probability dominates 1 - 2^(d-r) on the whole grid;
    optionally cross-checks one point against a Monte Carlo estimate."""
    min_slack: Fraction | None = None
    violations = []
    grid = 0
    for d in range(d_min, d_max + 1):
        for r in range(d, d + extra_rounds + 1):
            grid += 1
            slack = sn.span_probability(d, r) - bd.span_lower_bound(d, r)
            if min_slack is None or slack < min_slack:
                min_slack = slack
            if slack < 0:
                violations.append({"d": d, "r": r, "slack": frac_str(slack)})
    extra: dict[str, Any] = {}
    holds = not violations
    if mc_trials:
        if mc_seed is None:
            raise ValueError("Monte Carlo cross-check needs a seed")
        d, r = mc_point
        est = sn.span_mc_estimate(d, r, mc_trials, mc_seed)
        exact = float(sn.span_probability(d, r))
        sigma = (exact * (1 - exact) / mc_trials) ** 0.5
        mc_ok = abs(est.estimate - exact) <= 3 * sigma
        holds = holds and mc_ok
        extra["mc"] = {
            "d": d,
            "r": r,
            "estimate": est.estimate,
            "exact": exact,
            "within_3_sigma": mc_ok,
            "trials": mc_trials,
            "seed": mc_seed,
        }
    return SuiteReport(
        "span",
        {"d_min": d_min, "d_max": d_max, "extra_rounds": extra_rounds},
        grid,
        holds,
        min_slack,
        violations,
        extra,
    )


def coupling_check(
    trials: int, seed: int, d: int = 6, q: int = 4, r: int = 20
) -> SuiteReport:
    """Collision-free coupled runs must agree exactly; the per-(pair, round)
    collision rate must sit within 3 standard errors of 1/(2N)."""
    params = sn.ShuffleParams(d, r)
    batch = sn.coupled_batch(params, tuple(range(q)), trials, seed)
    mean, se = batch.pair_round_rate(params, q)
    target = 1 / (2 * params.n_cards)
    rate_ok = abs(mean - target) <= 3 * se
    clean_ok = batch.clean_trials_ok
    violations = []
    if not clean_ok:
        violations.append({"issue": "collision-free trial decoupled"})
    if not rate_ok:
        violations.append(
            {"issue": "collision rate off", "mean": mean, "target": target, "se": se}
        )
    return SuiteReport(
        "coupling",
        {"trials": trials, "seed": seed, "d": d, "q": q, "r": r},
        trials,
        clean_ok and rate_ok,
        violations=violations,
        extra={
            "collision_rate": mean,
            "collision_rate_se": se,
            "expected_rate": target,
            "clean_trials": int((~batch.any_collision).sum()),
        },
    )


def mixing_floor_check(
    d: int = 8, q: int = 2, r: int = 18, tolerance: float = 1e-9
) -> SuiteReport:
    """Float64 joint law dominates the closed-form floor, minus tolerance."""
    params = sn.ShuffleParams(d, r)
    law = sn.evolve_son_joint(params, tuple(range(q)), mode="float64")
    lowest = float(law.min_over_distinct())
    report = bd.shuffle_joint_floor(d, r, q)
    floor = float(report.value)
    holds = report.vacuous or lowest >= floor - tolerance
    return SuiteReport(
        "mixing-floor",
        {"d": d, "q": q, "r": r, "tolerance": tolerance},
        1,
        holds,
        min_slack=lowest - floor,
        extra={
            "min_probability": lowest,
            "floor": frac_str(report.value),
            "floor_float": floor,
            "vacuous": report.vacuous,
        },
    )


SUITES: dict[str, Callable[..., SuiteReport]] = {
    "cca-sep": sweep_cca_separation,
    "composition": sweep_inverse_composition,
    "reversal-gap": sweep_reversal_gap,
    "sep-composition": sweep_sep_composition,
    "span": span_grid_check,
    "coupling": coupling_check,
    "mixing-floor": mixing_floor_check,
}
