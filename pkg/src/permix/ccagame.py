"""Adaptive two-direction query games against a random permutation.

An adversary makes q queries to an unknown permutation, each either forward
(image of a point) or backward (preimage of a point), choosing the next
query from the answers so far. The advantage of a strategy is the total
variation distance between the transcript laws under the tested
distribution and under a uniform permutation; the game value maximises
over strategies.

The game value is computed by exact backward induction over constraint
sets. An explicit whole-tree enumeration (feasible for n <= 3, q <= 2) is
kept as an independent oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

from .errors import InconsistentTranscript, InvalidStrategy, ResourceLimit
from .permdist import (
    PermDist,
    Permutation,
    all_permutations,
    compose_perm_dists,
    falling_factorial,
    invert_perm_dist,
    ncpa_advantage,
    sep_security,
)
from .probcore import Dist, tv_distance

DEFAULT_CCA_N_CAP = 5
DEFAULT_CCA_Q_CAP = 3


class Direction(IntEnum):
    """Query direction; the integer order is the tie-break order."""

    FORWARD = 0
    BACKWARD = 1


class QueryInput(NamedTuple):
    elem: int
    dir: Direction


class CcaQuery(NamedTuple):
    """One answered query.

    Forward: input (left, FORWARD), output right, consistent iff
    sigma(left) = right. Backward: input (left, BACKWARD), output right,
    consistent iff sigma(right) = left.
    """

    left: int
    dir: Direction
    right: int

    def input(self) -> QueryInput:
        return QueryInput(self.left, self.dir)

    def output(self) -> int:
        return self.right

    def constraint(self) -> tuple[int, int]:
        """(a, b) with the query consistent iff sigma(a) = b."""
        if self.dir is Direction.FORWARD:
            return (self.left, self.right)
        return (self.right, self.left)


def queries_equivalent(p1: CcaQuery, p2: CcaQuery) -> bool:
    """Equal or reversals of each other: both pin the same sigma(a) = b."""
    return p1.constraint() == p2.constraint()


Transcript = tuple[CcaQuery, ...]


def transcript_constraint(transcript: Sequence[CcaQuery]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Collapse a transcript to tuples (a, b) with sigma(a_i) = b_i.

    Rejects transcripts that force contradictory constraints (same domain
    point to two images, or two domain points to one image).
    """
    domain: dict[int, int] = {}
    rng: dict[int, int] = {}
    a_list: list[int] = []
    b_list: list[int] = []
    for query in transcript:
        a, b = query.constraint()
        if a in domain:
            if domain[a] != b:
                raise InconsistentTranscript(f"conflicting constraints sigma({a}) = {domain[a]} and {b}")
            raise InconsistentTranscript(f"transcript repeats the constraint sigma({a}) = {b}")
        if b in rng:
            raise InconsistentTranscript(f"two domain points map to {b}")
        domain[a] = b
        rng[b] = a
        a_list.append(a)
        b_list.append(b)
    return tuple(a_list), tuple(b_list)


@dataclass(frozen=True)
class StrategyNode:
    """One decision point: the input to ask, and a child per possible output."""

    input: QueryInput
    children: Mapping[int, "StrategyNode | None"] = field(default_factory=dict)


@dataclass(frozen=True)
class StrategyTree:
    """Deterministic q-query strategy as an explicit decision tree."""

    n: int
    q: int
    root: StrategyNode

    def play(self, perm: Permutation) -> Transcript:
        """Run the strategy against a concrete permutation."""
        inverse = perm.inverse()
        node: StrategyNode | None = self.root
        out: list[CcaQuery] = []
        for _ in range(self.q):
            if node is None:
                raise InvalidStrategy("tree is shallower than its declared depth")
            elem, direction = node.input
            answer = perm(elem) if direction is Direction.FORWARD else inverse(elem)
            out.append(CcaQuery(elem, direction, answer))
            if answer not in node.children:
                raise InvalidStrategy(f"no branch for output {answer} after {out}")
            node = node.children[answer]
        return tuple(out)

    def leaf_count(self) -> int:
        def count(node: StrategyNode | None, depth: int) -> int:
            if depth == self.q:
                return 1
            if node is None:
                raise InvalidStrategy("tree is shallower than its declared depth")
            return sum(count(child, depth + 1) for child in node.children.values())

        return count(self.root, 0)


StrategyLike = StrategyTree | Callable[[Permutation], Sequence[CcaQuery]]


def validate_strategy(strategy: StrategyLike, n: int, q: int) -> bool:
    """Exhaustively check the three determinism/consistency conditions.

    Against every sigma in S_n: (1) each recorded query is consistent with
    sigma; (2) the first input does not depend on sigma; (3) the next input
    is a function of the transcript so far.
    """
    if isinstance(strategy, StrategyTree):
        if strategy.n != n or strategy.q != q:
            return False
        play = strategy.play
    else:
        play = strategy

    transcripts: list[Transcript] = []
    for perm in all_permutations(n):
        try:
            t = tuple(play(perm))
        except InvalidStrategy:
            return False
        if len(t) != q:
            return False
        inverse = perm.inverse()
        for query in t:
            a, b = query.constraint()
            if perm(a) != b or inverse(b) != a:
                return False
        transcripts.append(t)

    for t1, t2 in itertools.combinations(transcripts, 2):
        for k in range(q):
            if t1[:k] == t2[:k] and t1[k].input() != t2[k].input():
                return False
    return True


class _GameSolver:
    """Backward induction over constraint sets.

    A game state is the set of pinned pairs {(a, b)}: the value and the
    optimal next input depend on the transcript only through this set.
    """

    def __init__(self, x: PermDist, q: int):
        self.x = x
        self.n = x.n
        self.q = q
        self._support = list(x.dist.items())
        self._value_memo: dict[frozenset, Fraction] = {}
        self._choice_memo: dict[frozenset, QueryInput] = {}

    def _prob_x(self, constraints: frozenset) -> Fraction:
        total = Fraction(0)
        for perm, w in self._support:
            if all(perm.mapping[a] == b for a, b in constraints):
                total += w
        return total

    def _prob_u(self, k: int) -> Fraction:
        return Fraction(1, falling_factorial(self.n, k))

    def _inputs(self, constraints: frozenset) -> list[QueryInput]:
        # Admissible inputs: not equivalent to any earlier query, i.e. the
        # queried point is not already pinned on the queried side.
        dom = {a for a, _ in constraints}
        rng = {b for _, b in constraints}
        inputs = [QueryInput(a, Direction.FORWARD) for a in range(self.n) if a not in dom]
        inputs += [QueryInput(b, Direction.BACKWARD) for b in range(self.n) if b not in rng]
        return sorted(inputs)

    def _outputs(self, constraints: frozenset, query: QueryInput) -> list[tuple[int, frozenset]]:
        dom = {a for a, _ in constraints}
        rng = {b for _, b in constraints}
        if query.dir is Direction.FORWARD:
            return [
                (b, constraints | {(query.elem, b)})
                for b in range(self.n)
                if b not in rng
            ]
        return [
            (a, constraints | {(a, query.elem)})
            for a in range(self.n)
            if a not in dom
        ]

    def value(self, constraints: frozenset = frozenset()) -> Fraction:
        memo = self._value_memo.get(constraints)
        if memo is not None:
            return memo
        k = len(constraints)
        if k == self.q:
            result = max(self._prob_u(k) - self._prob_x(constraints), Fraction(0))
        else:
            result = Fraction(-1)
            for query in self._inputs(constraints):
                total = sum(
                    (self.value(child) for _, child in self._outputs(constraints, query)),
                    Fraction(0),
                )
                if total > result:
                    result = total
                    self._choice_memo[constraints] = query
        self._value_memo[constraints] = result
        return result

    def build_tree(self) -> StrategyTree:
        self.value()

        def build(constraints: frozenset, depth: int) -> StrategyNode:
            query = self._choice_memo[constraints]
            children: dict[int, StrategyNode | None] = {}
            for output, child_constraints in self._outputs(constraints, query):
                if depth + 1 == self.q:
                    children[output] = None
                else:
                    children[output] = build(child_constraints, depth + 1)
            return StrategyNode(query, children)

        return StrategyTree(self.n, self.q, build(frozenset(), 0))


def _check_caps(x: PermDist, q: int, n_cap: int, q_cap: int) -> None:
    if q > x.n:
        raise ResourceLimit(f"q = {q} exceeds n = {x.n}")
    if x.n > n_cap or q > q_cap:
        raise ResourceLimit(
            f"game with n = {x.n}, q = {q} exceeds caps (n <= {n_cap}, q <= {q_cap})"
        )


def cca_advantage(
    x: PermDist, q: int, *, n_cap: int = DEFAULT_CCA_N_CAP, q_cap: int = DEFAULT_CCA_Q_CAP
) -> Fraction:
    """Exact game value: max over strategies of the transcript-law TV distance."""
    _check_caps(x, q, n_cap, q_cap)
    return _GameSolver(x, q).value()


def optimal_strategy(
    x: PermDist, q: int, *, n_cap: int = DEFAULT_CCA_N_CAP, q_cap: int = DEFAULT_CCA_Q_CAP
) -> StrategyTree:
    """A value-achieving tree; ties broken toward the lowest (element, direction)."""
    _check_caps(x, q, n_cap, q_cap)
    return _GameSolver(x, q).build_tree()


def _enumerate_subtrees(n: int, constraints: frozenset, depth: int, q: int) -> list[StrategyNode | None]:
    if depth == q:
        return [None]
    dom = {a for a, _ in constraints}
    rng = {b for _, b in constraints}
    forced_fwd = dict(constraints)
    forced_bwd = {b: a for a, b in constraints}
    nodes: list[StrategyNode | None] = []
    for query in (
        [QueryInput(a, Direction.FORWARD) for a in range(n)]
        + [QueryInput(b, Direction.BACKWARD) for b in range(n)]
    ):
        if query.dir is Direction.FORWARD:
            if query.elem in forced_fwd:
                outputs = [forced_fwd[query.elem]]
            else:
                outputs = [b for b in range(n) if b not in rng]
            branches = [(o, constraints | {(query.elem, o)}) for o in outputs]
        else:
            if query.elem in forced_bwd:
                outputs = [forced_bwd[query.elem]]
            else:
                outputs = [a for a in range(n) if a not in dom]
            branches = [(o, constraints | {(o, query.elem)}) for o in outputs]
        per_branch = [_enumerate_subtrees(n, child, depth + 1, q) for _, child in branches]
        for combo in itertools.product(*per_branch):
            nodes.append(StrategyNode(query, dict(zip((o for o, _ in branches), combo))))
    return nodes


def enumerate_strategies(n: int, q: int) -> Iterable[StrategyTree]:
    """Every depth-q strategy tree, including wasteful ones that re-ask
    known answers. Feasible only for n <= 3, q <= 2."""
    if n > 3 or q > 2:
        raise ResourceLimit("whole-tree enumeration is capped at n <= 3, q <= 2")
    for root in _enumerate_subtrees(n, frozenset(), 0, q):
        assert root is not None
        yield StrategyTree(n, q, root)


def strategy_value(tree: StrategyTree, x: PermDist) -> Fraction:
    """d_TV between the transcript laws under x and under uniform, by play."""
    perms = all_permutations(tree.n)
    uniform_w = Fraction(1, len(perms))
    law_x: dict[Transcript, Fraction] = {}
    law_u: dict[Transcript, Fraction] = {}
    for perm in perms:
        t = tree.play(perm)
        law_u[t] = law_u.get(t, Fraction(0)) + uniform_w
        wx = x.dist.prob(perm)
        if wx:
            law_x[t] = law_x.get(t, Fraction(0)) + wx
    return tv_distance(Dist(law_x), Dist(law_u))


def cca_advantage_by_enumeration(x: PermDist, q: int) -> Fraction:
    """Definitional game value: brute-force max over every strategy tree."""
    return max(strategy_value(tree, x) for tree in enumerate_strategies(x.n, q))


@dataclass(frozen=True)
class CcaSepReport:
    cca: Fraction
    sep: Fraction
    holds: bool


def check_cca_le_separation(x: PermDist, q: int) -> CcaSepReport:
    """Exact check that the adaptive game value is at most the separation
    security of the image laws."""
    cca = cca_advantage(x, q)
    sep = sep_security(x, q)
    return CcaSepReport(cca, sep, cca <= sep)


@dataclass(frozen=True)
class InverseCompositionReport:
    lhs: Fraction
    rhs: Fraction
    rhs_capped: Fraction
    holds: bool


def check_inverse_composition(x: PermDist, y: PermDist, q: int) -> InverseCompositionReport:
    """Exact check that the game value of x^{-1} composed with y is at most
    the sum of the two non-adaptive advantages."""
    composed = compose_perm_dists(invert_perm_dist(x), y)
    lhs = cca_advantage(composed, q)
    rhs = ncpa_advantage(x, q) + ncpa_advantage(y, q)
    return InverseCompositionReport(lhs, rhs, min(rhs, Fraction(1)), lhs <= rhs)


def _dir_str(direction: Direction) -> str:
    return "fwd" if direction is Direction.FORWARD else "bwd"


def _dir_from_str(text: str) -> Direction:
    if text == "fwd":
        return Direction.FORWARD
    if text == "bwd":
        return Direction.BACKWARD
    raise InvalidStrategy(f"unknown direction {text!r}")


def _node_to_json(node: StrategyNode | None) -> dict | None:
    if node is None:
        return None
    return {
        "input": {"elem": node.input.elem, "dir": _dir_str(node.input.dir)},
        "children": {str(o): _node_to_json(child) for o, child in node.children.items()},
    }


def _node_from_json(obj: dict | None) -> StrategyNode | None:
    if obj is None:
        return None
    try:
        query = QueryInput(int(obj["input"]["elem"]), _dir_from_str(obj["input"]["dir"]))
        children = {int(o): _node_from_json(child) for o, child in obj["children"].items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidStrategy(f"bad strategy JSON: {exc}") from exc
    return StrategyNode(query, children)


def strategy_to_json(tree: StrategyTree) -> dict:
    return {"n": tree.n, "q": tree.q, "root": _node_to_json(tree.root)}


def strategy_from_json(obj: dict) -> StrategyTree:
    try:
        root = _node_from_json(obj["root"])
        if root is None:
            raise InvalidStrategy("strategy has no root")
        return StrategyTree(int(obj["n"]), int(obj["q"]), root)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidStrategy(f"bad strategy JSON: {exc}") from exc
