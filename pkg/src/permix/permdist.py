"""Explicit distributions over the symmetric group S_n and tuple-image security.

Elements are 0-indexed. Exact enumeration over all n! permutations caps at
n = 6 by default (720 support points); the cap is a resource guard and can
be raised per call.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .errors import InvalidDistribution, OutcomeMismatch, ResourceLimit
from .probcore import Dist, Metric, frac_str, sep_distance, tv_distance

DEFAULT_PERM_CAP = 6


@dataclass(frozen=True)
class Permutation:
    """Bijection on {0..n-1}, stored as the image tuple."""

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.mapping)
        if sorted(self.mapping) != list(range(n)):
            raise InvalidDistribution(f"mapping {self.mapping} is not a bijection on 0..{n - 1}")

    @property
    def n(self) -> int:
        return len(self.mapping)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    def __call__(self, x: int) -> int:
        return self.mapping[x]

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, j in enumerate(self.mapping):
            inv[j] = i
        return Permutation(tuple(inv))

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other: (self.compose(other))(x) = self(other(x))."""
        if self.n != other.n:
            raise OutcomeMismatch("cannot compose permutations of different sizes")
        return Permutation(tuple(self.mapping[other.mapping[x]] for x in range(self.n)))

    def image(self, points: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.mapping[p] for p in points)


@dataclass(frozen=True)
class PermDist:
    """Distribution over S_n with exact weights."""

    n: int
    dist: Dist

    def __post_init__(self) -> None:
        for perm in self.dist.support:
            if not isinstance(perm, Permutation) or perm.n != self.n:
                raise InvalidDistribution(f"support element {perm!r} is not in S_{self.n}")

    @classmethod
    def point(cls, perm: Permutation) -> "PermDist":
        return cls(perm.n, Dist.point(perm))

    @classmethod
    def from_weights(cls, n: int, weights: Iterable[tuple[Permutation, Any]]) -> "PermDist":
        return cls(n, Dist(weights))

    @classmethod
    def mixture(cls, parts: Iterable[tuple[Any, "PermDist"]]) -> "PermDist":
        parts = list(parts)
        n = parts[0][1].n
        if any(pd.n != n for _, pd in parts):
            raise OutcomeMismatch("mixture components must share n")
        return cls(n, Dist.mixture((w, pd.dist) for w, pd in parts))


def all_permutations(n: int) -> list[Permutation]:
    return [Permutation(p) for p in itertools.permutations(range(n))]


def uniform_perm_dist(n: int, cap: int = DEFAULT_PERM_CAP) -> PermDist:
    """Uniform distribution over all n! permutations."""
    if n < 1:
        raise InvalidDistribution("n must be at least 1")
    if n > cap:
        raise ResourceLimit(f"n = {n} exceeds exact-enumeration cap {cap} ({math.factorial(n)} points)")
    return PermDist(n, Dist.uniform(all_permutations(n)))


def validate_query_tuple(n: int, points: Sequence[int]) -> tuple[int, ...]:
    """Ordered query tuple: pairwise-distinct elements of {0..n-1}."""
    pts = tuple(points)
    if not 1 <= len(pts) <= n:
        raise InvalidDistribution(f"query tuple length {len(pts)} outside 1..{n}")
    if len(set(pts)) != len(pts):
        raise InvalidDistribution(f"query tuple {pts} has repeated entries")
    if any(not 0 <= p < n for p in pts):
        raise InvalidDistribution(f"query tuple {pts} has entries outside 0..{n - 1}")
    return pts


def falling_factorial(n: int, q: int) -> int:
    """(n)_q = n (n-1) ... (n-q+1), the count of distinct-entry q-tuples."""
    out = 1
    for i in range(q):
        out *= n - i
    return out


def image_dist(x: PermDist, points: Sequence[int]) -> Dist:
    """Pushforward of x under sigma -> (sigma(p_1), ..., sigma(p_q))."""
    pts = validate_query_tuple(x.n, points)
    return x.dist.map(lambda perm: perm.image(pts))


def uniform_tuple_dist(n: int, q: int) -> Dist:
    """Uniform distribution over all (n)_q distinct-entry q-tuples."""
    if q > n:
        raise InvalidDistribution(f"q = {q} exceeds n = {n}")
    return Dist.uniform(itertools.permutations(range(n), q))


def _max_image_distance(x: PermDist, q: int, metric: Metric) -> Fraction:
    if q > x.n:
        raise InvalidDistribution(f"q = {q} exceeds n = {x.n}")
    reference = uniform_tuple_dist(x.n, q)
    fn = tv_distance if metric == "tv" else sep_distance
    return max(
        fn(image_dist(x, pts), reference)
        for pts in itertools.permutations(range(x.n), q)
    )


def ncpa_advantage(x: PermDist, q: int) -> Fraction:
    """Best non-adaptive forward-query advantage with q queries.

    Max over all distinct-entry query tuples of the total variation distance
    between the image distribution and the uniform tuple distribution.
    """
    return _max_image_distance(x, q, "tv")


def sep_security(x: PermDist, q: int) -> Fraction:
    """Max over query tuples of the separation distance from the image law
    to the uniform tuple distribution."""
    return _max_image_distance(x, q, "sep")


def invert_perm_dist(x: PermDist) -> PermDist:
    """Pushforward under sigma -> sigma^{-1}."""
    return PermDist(x.n, x.dist.map(lambda perm: perm.inverse()))


def compose_perm_dists(a: PermDist, b: PermDist) -> PermDist:
    """Law of the composition of independent draws: first b, then a."""
    if a.n != b.n:
        raise OutcomeMismatch(f"size mismatch: {a.n} vs {b.n}")
    acc: dict[Permutation, Fraction] = {}
    for pa, wa in a.dist.items():
        for pb, wb in b.dist.items():
            key = pa.compose(pb)
            acc[key] = acc.get(key, Fraction(0)) + wa * wb
    return PermDist(a.n, Dist(acc))


def perm_dist_to_json(x: PermDist) -> dict:
    """JSON form: {"n": int, "support": [{"map": [...], "num": str, "den": str}]}."""
    support = [
        {"map": list(perm.mapping), "num": str(w.numerator), "den": str(w.denominator)}
        for perm, w in x.dist.items()
    ]
    return {"n": x.n, "support": support}


def perm_dist_from_json(obj: dict) -> PermDist:
    try:
        n = int(obj["n"])
        weights = [
            (Permutation(tuple(int(v) for v in entry["map"])),
             Fraction(int(entry["num"]), int(entry["den"])))
            for entry in obj["support"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidDistribution(f"bad permutation-distribution JSON: {exc}") from exc
    return PermDist(n, Dist(weights))


__all__ = [
    "DEFAULT_PERM_CAP",
    "PermDist",
    "Permutation",
    "all_permutations",
    "compose_perm_dists",
    "falling_factorial",
    "image_dist",
    "invert_perm_dist",
    "ncpa_advantage",
    "perm_dist_from_json",
    "perm_dist_to_json",
    "sep_security",
    "uniform_perm_dist",
    "uniform_tuple_dist",
    "validate_query_tuple",
    "frac_str",
]
