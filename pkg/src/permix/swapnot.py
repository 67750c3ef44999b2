"""The swap-or-not shuffle and its mixing diagnostics.

Positions and round keys are d-bit machine words; group addition is
bitwise XOR. Round t pairs position x with x ^ K_t and swaps each pair on
an independent fair coin.

Two tracked processes are implemented:

* the shuffle itself, where paired cards share one coin, and
* the "free process", a relaxation where every tracked card flips its own
  independent coin, so paired cards may land on the same position (the
  step is no longer injective).

A "collision" is the free-process event that two tracked cards are paired
and flip opposite coins; it is exactly what makes the free process leave
the shuffle's trajectory under the shared-randomness coupling below.

Exact joint-position laws are computed by dynamic programming over the
N^q joint state space with dyadic rationals; a float64 mode (q <= 2)
covers d = 8 sweeps with accumulated error far below 1e-9: every
intermediate value is a dyadic rational renormalised only by averaging,
and each of the r * N key terms contributes at most one rounding of
2^-53 relative error, so the absolute drift stays below r * N * 2^-53.
Monte Carlo estimators are vectorised and fully seeded.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import EstimationError, InvalidDistribution, ResourceLimit
from .probcore import Dist
from .rng import make_generator

DEFAULT_DP_BUDGET = 1 << 20

_Z95 = 1.959963984540054


@dataclass(frozen=True)
class ShuffleParams:
    """Deck of N = 2^d cards shuffled for r rounds."""

    d: int
    r: int

    def __post_init__(self) -> None:
        if self.d < 1:
            raise InvalidDistribution("d must be at least 1")
        if self.r < 0:
            raise InvalidDistribution("r must be non-negative")

    @property
    def n_cards(self) -> int:
        return 1 << self.d


KeySchedule = tuple[int, ...]
CoinOracle = Callable[[int, int], int]


def validate_keys(params: ShuffleParams, keys: Sequence[int]) -> KeySchedule:
    ks = tuple(int(k) for k in keys)
    if len(ks) != params.r:
        raise InvalidDistribution(f"key schedule has {len(ks)} rounds, expected {params.r}")
    if any(not 0 <= k < params.n_cards for k in ks):
        raise InvalidDistribution("key outside 0..N-1")
    return ks


def sample_keys(params: ShuffleParams, rng: np.random.Generator) -> KeySchedule:
    return tuple(int(k) for k in rng.integers(0, params.n_cards, size=params.r))


class CoinTable:
    """Deterministic coin oracle: one bit per round per pair representative.

    The representative of the pair {x, x ^ K_t} is min(x, x ^ K_t), so both
    members look up the same bit and pair consistency holds by construction.
    Fixed points of a round (K_t = 0) draw a bit that the round ignores.
    """

    def __init__(self, bits: np.ndarray):
        self._bits = bits

    @classmethod
    def sample(cls, params: ShuffleParams, rng: np.random.Generator) -> "CoinTable":
        return cls(rng.integers(0, 2, size=(params.r, params.n_cards), dtype=np.uint8))

    def __call__(self, round_index: int, representative: int) -> int:
        return int(self._bits[round_index, representative])


def son_round(x: int, key: int, coin: int) -> int:
    """One swap-or-not round for one card: move to x ^ key iff the coin is 1."""
    return x ^ key if coin else x


def son_eval(params: ShuffleParams, keys: Sequence[int], coins: CoinOracle, x: int) -> int:
    """Position of card x after r rounds under fixed keys and coins."""
    ks = validate_keys(params, keys)
    pos = x
    for t, key in enumerate(ks):
        rep = min(pos, pos ^ key)
        pos = son_round(pos, key, coins(t, rep))
    return pos


def son_inverse_eval(params: ShuffleParams, keys: Sequence[int], coins: CoinOracle, y: int) -> int:
    """Invert son_eval: each round is an involution, so run them backwards."""
    ks = validate_keys(params, keys)
    pos = y
    for t in range(params.r - 1, -1, -1):
        key = ks[t]
        rep = min(pos, pos ^ key)
        pos = son_round(pos, key, coins(t, rep))
    return pos


def son_permutation(params: ShuffleParams, keys: Sequence[int], coins: CoinOracle) -> list[int]:
    """The full permutation realised by one (keys, coins) instance."""
    return [son_eval(params, keys, coins, x) for x in range(params.n_cards)]


def check_pair_consistency(
    params: ShuffleParams,
    keys: Sequence[int],
    xs: Sequence[int],
    coin_bits: Sequence[Sequence[int]],
) -> bool:
    """True iff tracked coins satisfy the shuffle's pairing constraint:
    cards whose positions XOR to the round key share the round's coin."""
    ks = validate_keys(params, keys)
    pos = list(xs)
    q = len(pos)
    for t, key in enumerate(ks):
        for i in range(q):
            for j in range(i + 1, q):
                if pos[i] ^ pos[j] == key and coin_bits[i][t] != coin_bits[j][t]:
                    return False
        pos = [p ^ key if coin_bits[i][t] else p for i, p in enumerate(pos)]
    return True


def _validate_tracked(params: ShuffleParams, xs: Sequence[int]) -> tuple[int, ...]:
    pts = tuple(int(x) for x in xs)
    if not pts:
        raise InvalidDistribution("need at least one tracked card")
    if len(set(pts)) != len(pts):
        raise InvalidDistribution(f"tracked positions {pts} are not distinct")
    if any(not 0 <= p < params.n_cards for p in pts):
        raise InvalidDistribution("tracked position outside 0..N-1")
    return pts


# ---------------------------------------------------------------------------
# Exact and float64 joint-law evolution


@dataclass
class TrackedJointDist:
    """Joint law of q tracked cards after some number of rounds."""

    params: ShuffleParams
    xs: tuple[int, ...]
    rounds: int
    mode: str  # "exact-dyadic" or "float64"
    _mapping: dict[tuple[int, ...], Fraction] | None = None
    _dense: np.ndarray | None = None

    @property
    def q(self) -> int:
        return len(self.xs)

    @property
    def mapping(self) -> dict[tuple[int, ...], Fraction]:
        if self._mapping is None:
            raise ResourceLimit("float64 law has no exact mapping")
        return self._mapping

    @property
    def dense(self) -> np.ndarray:
        if self._dense is None:
            raise ResourceLimit("exact law was not materialised as an array")
        return self._dense

    def probability(self, ys: Sequence[int]) -> Fraction | float:
        key = tuple(int(y) for y in ys)
        if self._mapping is not None:
            return self._mapping.get(key, Fraction(0))
        return float(self._dense[key])

    def min_over_distinct(self) -> Fraction | float:
        """Minimum landing probability over all distinct-entry targets."""
        n = self.params.n_cards
        if self._mapping is not None:
            return min(
                self._mapping.get(ys, Fraction(0))
                for ys in itertools.permutations(range(n), self.q)
            )
        if self.q == 1:
            return float(self._dense.min())
        mask = ~np.eye(n, dtype=bool)
        return float(self._dense[mask].min())

    def total(self) -> Fraction | float:
        if self._mapping is not None:
            return sum(self._mapping.values(), Fraction(0))
        return float(self._dense.sum())

    def to_dist(self) -> Dist:
        return Dist(self.mapping)


def _son_groups(state: tuple[int, ...], key: int, pos_index: dict[int, int]) -> list[tuple[int, ...]]:
    groups: list[tuple[int, ...]] = []
    for i, p in enumerate(state):
        partner = pos_index.get(p ^ key)
        if partner is not None and partner < i:
            continue  # already grouped when the partner was visited
        if partner is not None and partner > i:
            groups.append((i, partner))
        else:
            groups.append((i,))
    return groups


def _son_step_exact(cur: dict, n: int, q: int) -> dict:
    nxt: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
    inv_n = Fraction(1, n)
    for state, w in cur.items():
        base = w * inv_n
        nxt[state] += base  # key 0 fixes every card
        pos_index = {p: i for i, p in enumerate(state)}
        for key in range(1, n):
            groups = _son_groups(state, key, pos_index)
            share = base / (1 << len(groups))
            for bits in range(1 << len(groups)):
                moved = list(state)
                for g, grp in enumerate(groups):
                    if bits >> g & 1:
                        for m in grp:
                            moved[m] ^= key
                nxt[tuple(moved)] += share
    return dict(nxt)


def _free_step_exact(cur: dict, n: int, q: int) -> dict:
    nxt: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
    inv_n = Fraction(1, n)
    share_all = Fraction(1, 1 << q)
    for state, w in cur.items():
        base = w * inv_n
        nxt[state] += base
        for key in range(1, n):
            share = base * share_all
            for bits in range(1 << q):
                moved = tuple(
                    p ^ key if bits >> i & 1 else p for i, p in enumerate(state)
                )
                nxt[moved] += share
    return dict(nxt)


def _son_step_f64_q2(p: np.ndarray, n: int) -> np.ndarray:
    # Assumes the diagonal carries no mass (distinct cards, injective steps).
    x = np.arange(n)
    xor_grid = x[:, None] ^ x[None, :]
    acc = p.copy()  # key 0 term
    for key in range(1, n):
        xk = x ^ key
        both = p[np.ix_(xk, xk)]
        step = 0.25 * (p + p[xk, :] + p[:, xk] + both)
        paired = xor_grid == key
        step[paired] = 0.5 * (p[paired] + both[paired])
        step[x, x] = 0.0
        acc += step
    return acc / n


def _free_step_f64_q2(p: np.ndarray, n: int) -> np.ndarray:
    x = np.arange(n)
    acc = p.copy()
    for key in range(1, n):
        xk = x ^ key
        acc += 0.25 * (p + p[xk, :] + p[:, xk] + p[np.ix_(xk, xk)])
    return acc / n


def _step_f64_q1(p: np.ndarray, n: int) -> np.ndarray:
    x = np.arange(n)
    acc = p.copy()
    for key in range(1, n):
        acc += 0.5 * (p + p[x ^ key])
    return acc / n


def _evolve_joint(
    params: ShuffleParams,
    xs: Sequence[int],
    *,
    process: str,
    mode: str,
    budget: int,
) -> TrackedJointDist:
    pts = _validate_tracked(params, xs)
    n, q = params.n_cards, len(pts)
    if n**q > budget:
        raise ResourceLimit(
            f"joint state space N^q = {n**q} exceeds budget {budget}; "
            "use the Monte Carlo estimators instead"
        )
    if mode == "exact":
        mode = "exact-dyadic"
    if mode == "exact-dyadic":
        cur = {pts: Fraction(1)}
        step = _son_step_exact if process == "son" else _free_step_exact
        for _ in range(params.r):
            cur = step(cur, n, q)
        return TrackedJointDist(params, pts, params.r, mode, _mapping=cur)
    if mode == "float64":
        if q == 1:
            dense = np.zeros(n)
            dense[pts[0]] = 1.0
            for _ in range(params.r):
                dense = _step_f64_q1(dense, n)
        elif q == 2:
            dense = np.zeros((n, n))
            dense[pts] = 1.0
            step2 = _son_step_f64_q2 if process == "son" else _free_step_f64_q2
            for _ in range(params.r):
                dense = step2(dense, n)
        else:
            raise ResourceLimit("float64 mode is implemented for q <= 2; use exact mode")
        return TrackedJointDist(params, pts, params.r, "float64", _dense=dense)
    raise ValueError(f"unknown mode {mode!r}")


def evolve_son_joint(
    params: ShuffleParams,
    xs: Sequence[int],
    *,
    mode: str = "exact",
    budget: int = DEFAULT_DP_BUDGET,
) -> TrackedJointDist:
    """Exact (or float64) joint law of tracked cards under the shuffle.

    One round averages over the N equally likely keys; within a key,
    tracked cards whose positions XOR to the key form pairs sharing one
    fair coin, and the rest flip their own.
    """
    return _evolve_joint(params, xs, process="son", mode=mode, budget=budget)


def evolve_free_joint(
    params: ShuffleParams,
    xs: Sequence[int],
    *,
    mode: str = "exact",
    budget: int = DEFAULT_DP_BUDGET,
) -> TrackedJointDist:
    """Joint law under the free process (every card an independent coin)."""
    return _evolve_joint(params, xs, process="free", mode=mode, budget=budget)


def son_joint_by_enumeration(params: ShuffleParams, xs: Sequence[int]) -> dict:
    """Oracle: the shuffle's joint law by walking every (key, coin) history.

    Written without the DP's grouping helper: per round and key it assigns
    one coin per unordered tracked pair whose positions XOR to the key, and
    one per remaining card, and recurses over every assignment.
    """
    pts = _validate_tracked(params, xs)
    n, q = params.n_cards, len(pts)
    acc: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)

    def walk(state: tuple[int, ...], t: int, weight: Fraction) -> None:
        if t == params.r:
            acc[state] += weight
            return
        for key in range(n):
            if key == 0:
                walk(state, t + 1, weight / n)
                continue
            pairs = [
                (i, j)
                for i, j in itertools.combinations(range(q), 2)
                if state[i] ^ state[j] == key
            ]
            in_pair = {i for pair in pairs for i in pair}
            singles = [i for i in range(q) if i not in in_pair]
            coins = len(pairs) + len(singles)
            share = weight / n / (1 << coins)
            for assignment in itertools.product((0, 1), repeat=coins):
                moved = list(state)
                for (i, j), bit in zip(pairs, assignment):
                    if bit:
                        moved[i] ^= key
                        moved[j] ^= key
                for i, bit in zip(singles, assignment[len(pairs):]):
                    if bit:
                        moved[i] ^= key
                walk(tuple(moved), t + 1, share)

    walk(pts, 0, Fraction(1))
    return dict(acc)


def free_joint_by_enumeration(params: ShuffleParams, xs: Sequence[int]) -> dict:
    """Oracle: the free process's joint law by full history enumeration."""
    pts = _validate_tracked(params, xs)
    n, q = params.n_cards, len(pts)
    acc: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)

    def walk(state: tuple[int, ...], t: int, weight: Fraction) -> None:
        if t == params.r:
            acc[state] += weight
            return
        for key in range(n):
            share = weight / n / (1 << q)
            for bits in range(1 << q):
                moved = tuple(p ^ key if bits >> i & 1 else p for i, p in enumerate(state))
                walk(moved, t + 1, share)

    walk(pts, 0, Fraction(1))
    return dict(acc)


def free_law_fixed_keys(
    params: ShuffleParams, xs: Sequence[int], keys: Sequence[int]
) -> dict[tuple[int, ...], Fraction]:
    """Exact conditional law of the free process given a fixed key schedule,
    by enumerating all 2^(r q) coin matrices."""
    pts = _validate_tracked(params, xs)
    ks = validate_keys(params, keys)
    q = len(pts)
    if params.r * q > 24:
        raise ResourceLimit(f"2^(r*q) = 2^{params.r * q} coin matrices is over budget")
    acc: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
    weight = Fraction(1, 1 << (params.r * q))
    for bits in itertools.product((0, 1), repeat=params.r * q):
        pos = list(pts)
        for t, key in enumerate(ks):
            for i in range(q):
                if bits[t * q + i]:
                    pos[i] ^= key
        acc[tuple(pos)] += weight
    return dict(acc)


# ---------------------------------------------------------------------------
# Coupling


@dataclass(frozen=True)
class CollisionLog:
    """Collision events (round, (i, j)) seen by the free process."""

    events: tuple[tuple[int, tuple[int, int]], ...]

    @property
    def tau(self) -> int | None:
        """Last collision round, or None if there was no collision."""
        return max((t for t, _ in self.events), default=None)

    def __len__(self) -> int:
        return len(self.events)


@dataclass(frozen=True)
class CoupledRun:
    """One joint trajectory of shuffle and free process on shared randomness.

    Free-process coins are drawn fair and independent; the shuffle reuses
    them except that a card paired with a lower-indexed tracked card copies
    that card's coin. When no collision occurs the two coin matrices agree
    and the endpoint vectors coincide.
    """

    shuffle_end: tuple[int, ...]
    free_end: tuple[int, ...]
    log: CollisionLog
    coins_equal: bool
    keys: KeySchedule


def coupled_sample(params: ShuffleParams, xs: Sequence[int], seed: int) -> CoupledRun:
    pts = _validate_tracked(params, xs)
    q = len(pts)
    rng = make_generator(seed)
    keys = sample_keys(params, rng)
    free_bits = rng.integers(0, 2, size=(params.r, q), dtype=np.uint8)

    son_pos = list(pts)
    free_pos = list(pts)
    events: list[tuple[int, tuple[int, int]]] = []
    coins_equal = True
    for t, key in enumerate(keys):
        ct = [int(b) for b in free_bits[t]]
        cs = list(ct)
        for i in range(q):
            for j in range(i):
                if son_pos[j] ^ son_pos[i] == key:
                    cs[i] = cs[j]
                    break
        if cs != ct:
            coins_equal = False
        for i in range(q):
            for j in range(i + 1, q):
                if free_pos[i] ^ free_pos[j] == key and ct[i] != ct[j]:
                    events.append((t + 1, (i, j)))
        son_pos = [p ^ key if cs[i] else p for i, p in enumerate(son_pos)]
        free_pos = [p ^ key if ct[i] else p for i, p in enumerate(free_pos)]
    return CoupledRun(
        tuple(son_pos), tuple(free_pos), CollisionLog(tuple(events)), coins_equal, keys
    )


@dataclass(frozen=True)
class CoupledBatch:
    """Vectorised aggregate of many coupled trajectories."""

    trials: int
    seed: int
    collision_count: np.ndarray  # per-trial number of (round, pair) events
    any_collision: np.ndarray
    coins_equal: np.ndarray
    endpoints_match: np.ndarray

    @property
    def clean_trials_ok(self) -> bool:
        """Every collision-free trial kept identical coins and endpoints."""
        clean = ~self.any_collision
        return bool(
            np.all(self.coins_equal[clean]) and np.all(self.endpoints_match[clean])
        )

    def pair_round_rate(self, params: ShuffleParams, q: int) -> tuple[float, float]:
        """Mean per-(pair, round) collision rate and its standard error,
        computed across independent trials."""
        slots = params.r * q * (q - 1) // 2
        rates = self.collision_count / slots
        return float(rates.mean()), float(rates.std(ddof=1) / np.sqrt(self.trials))


def coupled_batch(
    params: ShuffleParams, xs: Sequence[int], trials: int, seed: int
) -> CoupledBatch:
    pts = _validate_tracked(params, xs)
    q = len(pts)
    rng = make_generator(seed)
    n = params.n_cards
    keys = rng.integers(0, n, size=(trials, params.r), dtype=np.int64)
    free_bits = rng.integers(0, 2, size=(trials, params.r, q), dtype=np.int64)

    son_pos = np.tile(np.array(pts, dtype=np.int64), (trials, 1))
    free_pos = son_pos.copy()
    collision_count = np.zeros(trials, dtype=np.int64)
    coins_equal = np.ones(trials, dtype=bool)
    for t in range(params.r):
        key = keys[:, t]
        ct = free_bits[:, t, :]
        cs = ct.copy()
        for i in range(q):
            for j in range(i):
                paired = (son_pos[:, j] ^ son_pos[:, i]) == key
                cs[paired, i] = cs[paired, j]
        coins_equal &= (cs == ct).all(axis=1)
        for i in range(q):
            for j in range(i + 1, q):
                hit = ((free_pos[:, i] ^ free_pos[:, j]) == key) & (ct[:, i] != ct[:, j])
                collision_count += hit
        son_pos ^= key[:, None] * cs
        free_pos ^= key[:, None] * ct
    return CoupledBatch(
        trials=trials,
        seed=seed,
        collision_count=collision_count,
        any_collision=collision_count > 0,
        coins_equal=coins_equal,
        endpoints_match=(son_pos == free_pos).all(axis=1),
    )


# ---------------------------------------------------------------------------
# GF(2) span analysis


def gf2_rank(vectors: Iterable[int]) -> int:
    """Rank over GF(2) of bit-word vectors, by Gaussian elimination."""
    pivots: dict[int, int] = {}
    for raw in vectors:
        v = int(raw)
        while v:
            msb = v.bit_length() - 1
            if msb in pivots:
                v ^= pivots[msb]
            else:
                pivots[msb] = v
                break
    return len(pivots)


def span_probability(d: int, r: int) -> Fraction:
    """Exact probability that r iid uniform keys span the d-dimensional space.

    Rank DP: with current rank k, a fresh key leaves the spanned subspace
    with probability 1 - 2^(k-d).
    """
    if d < 1 or r < 1:
        raise InvalidDistribution("d and r must be at least 1")
    probs: dict[int, Fraction] = {0: Fraction(1)}
    for _ in range(r):
        nxt: dict[int, Fraction] = defaultdict(Fraction)
        for k, w in probs.items():
            stay = Fraction(1 << k, 1 << d)
            nxt[k] += w * stay
            if k < d:
                nxt[k + 1] += w * (1 - stay)
        probs = dict(nxt)
    return probs.get(d, Fraction(0))


def wilson_ci(successes: int, n: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n == 0:
        raise EstimationError("no samples to form a confidence interval")
    phat = successes / n
    denom = 1 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * np.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return float(center - half), float(center + half)


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    ci95: tuple[float, float]
    trials: int
    seed: int
    accepted: int | None = None

    def to_json(self) -> dict:
        out = {
            "value": self.estimate,
            "ci95": [self.ci95[0], self.ci95[1]],
            "trials": self.trials,
            "seed": self.seed,
            "mode": "mc",
        }
        if self.accepted is not None:
            out["accepted"] = self.accepted
        return out


def _spanning_flags(vectors: np.ndarray, d: int) -> np.ndarray:
    """Per-row spanning test via subspace bitmasks.

    Row s keeps a boolean membership mask over all 2^d elements; adding a
    vector v unions the mask with its v-translate. Chunk callers keep the
    (rows, 2^d) mask within memory.
    """
    size = 1 << d
    rows = vectors.shape[0]
    masks = np.zeros((rows, size), dtype=bool)
    masks[:, 0] = True
    elements = np.arange(size, dtype=np.int64)
    for col in range(vectors.shape[1]):
        idx = elements[None, :] ^ vectors[:, col][:, None]
        masks |= np.take_along_axis(masks, idx, axis=1)
    return masks.all(axis=1)


_CHUNK = 1 << 17


def span_mc_estimate(d: int, r: int, trials: int, seed: int) -> McEstimate:
    """Monte Carlo estimate of the spanning probability (cross-check for the
    exact rank DP)."""
    if d > 12:
        raise ResourceLimit("mask-based spanning test is capped at d <= 12")
    rng = make_generator(seed)
    hits = 0
    remaining = trials
    while remaining:
        chunk = min(_CHUNK, remaining)
        keys = rng.integers(0, 1 << d, size=(chunk, r), dtype=np.int64)
        hits += int(_spanning_flags(keys, d).sum())
        remaining -= chunk
    return McEstimate(hits / trials, wilson_ci(hits, trials), trials, seed)


# ---------------------------------------------------------------------------
# Target-first construction of the free process


class _Gf2Solver:
    """Row-reduced key span with generating-combination tracking.

    Solves "which subset of the keys XORs to a target" and exposes a basis
    of the kernel, so coin rows can be drawn uniformly from all valid
    choices."""

    def __init__(self, keys: Sequence[int], d: int):
        self.d = d
        self.pivots: dict[int, tuple[int, int]] = {}
        self.kernel: list[int] = []
        for t, key in enumerate(keys):
            v, combo = self._reduce(int(key), 1 << t)
            if v:
                self.pivots[v.bit_length() - 1] = (v, combo)
            else:
                self.kernel.append(combo)

    def _reduce(self, v: int, combo: int) -> tuple[int, int]:
        while v:
            hit = self.pivots.get(v.bit_length() - 1)
            if hit is None:
                break
            v ^= hit[0]
            combo ^= hit[1]
        return v, combo

    @property
    def spanning(self) -> bool:
        return len(self.pivots) == self.d

    def solve(self, target: int) -> int | None:
        """A subset mask of key indices XORing to target, or None."""
        v, combo = self._reduce(int(target), 0)
        return None if v else combo


@dataclass(frozen=True)
class TargetFirstSample:
    """One draw of the free process built by fixing the endpoints first.

    Keys and a uniform target vector are drawn; if the keys span, each
    card's coin row is drawn uniformly from the rows that steer it to its
    target (independently per card), otherwise coins are iid fair and the
    targets are ignored.
    """

    endpoints: tuple[int, ...]
    targets: tuple[int, ...]
    keys: KeySchedule
    spanning: bool
    coin_bits: tuple[tuple[int, ...], ...]  # [card][round]


def target_first_sample(params: ShuffleParams, xs: Sequence[int], seed: int) -> TargetFirstSample:
    pts = _validate_tracked(params, xs)
    q = len(pts)
    rng = make_generator(seed)
    keys = sample_keys(params, rng)
    targets = tuple(int(v) for v in rng.integers(0, params.n_cards, size=q))
    solver = _Gf2Solver(keys, params.d)
    rows: list[tuple[int, ...]] = []
    if solver.spanning:
        for i in range(q):
            combo = solver.solve(targets[i] ^ pts[i])
            assert combo is not None  # spanning keys reach every offset
            for kernel_vec in solver.kernel:
                if rng.integers(0, 2):
                    combo ^= kernel_vec
            rows.append(tuple(combo >> t & 1 for t in range(params.r)))
    else:
        bits = rng.integers(0, 2, size=(q, params.r), dtype=np.uint8)
        rows = [tuple(int(b) for b in bits[i]) for i in range(q)]
    endpoints = []
    for i in range(q):
        pos = pts[i]
        for t, key in enumerate(keys):
            if rows[i][t]:
                pos ^= key
        endpoints.append(pos)
    return TargetFirstSample(tuple(endpoints), targets, keys, solver.spanning, tuple(rows))


def target_first_exact_law(params: ShuffleParams, xs: Sequence[int]) -> dict:
    """Exact endpoint law of the target-first construction, by enumerating
    every key schedule (and, on non-spanning schedules, every coin matrix)."""
    pts = _validate_tracked(params, xs)
    n, q = params.n_cards, len(pts)
    if params.r * params.d > 16 or params.r * q > 16:
        raise ResourceLimit("target-first enumeration is a small-case oracle")
    acc: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
    key_weight = Fraction(1, n**params.r)
    uniform_block = Fraction(0)
    for keys in itertools.product(range(n), repeat=params.r):
        if gf2_rank(keys) == params.d:
            uniform_block += key_weight
            continue
        coin_weight = key_weight / (1 << (params.r * q))
        for bits in itertools.product((0, 1), repeat=params.r * q):
            pos = list(pts)
            for t, key in enumerate(keys):
                for i in range(q):
                    if bits[t * q + i]:
                        pos[i] ^= key
            acc[tuple(pos)] += coin_weight
    if uniform_block:
        per_target = uniform_block / n**q
        for ys in itertools.product(range(n), repeat=q):
            acc[ys] += per_target
    return dict(acc)


# ---------------------------------------------------------------------------
# Monte Carlo estimators


def conditional_collision_estimate(
    params: ShuffleParams,
    pair: tuple[int, int],
    targets: tuple[int, int],
    trials: int,
    seed: int,
) -> McEstimate:
    """Rejection-sampling estimate of the free-process probability that two
    tracked cards land on given distinct targets, conditioned on them having
    at least one collision."""
    xi, xj = (int(v) for v in pair)
    yi, yj = (int(v) for v in targets)
    if xi == xj:
        raise InvalidDistribution("tracked pair must be distinct")
    if yi == yj:
        raise InvalidDistribution("targets must be distinct")
    rng = make_generator(seed)
    accepted = 0
    matched = 0
    remaining = trials
    while remaining:
        chunk = min(_CHUNK, remaining)
        keys = rng.integers(0, params.n_cards, size=(chunk, params.r), dtype=np.int64)
        coins = rng.integers(0, 2, size=(chunk, params.r, 2), dtype=np.int64)
        pi = np.full(chunk, xi, dtype=np.int64)
        pj = np.full(chunk, xj, dtype=np.int64)
        collided = np.zeros(chunk, dtype=bool)
        for t in range(params.r):
            key = keys[:, t]
            ci, cj = coins[:, t, 0], coins[:, t, 1]
            collided |= ((pi ^ pj) == key) & (ci != cj)
            pi ^= key * ci
            pj ^= key * cj
        hit = collided & (pi == yi) & (pj == yj)
        accepted += int(collided.sum())
        matched += int(hit.sum())
        remaining -= chunk
    if accepted == 0:
        raise EstimationError("no trials had a collision; increase the trial count")
    return McEstimate(matched / accepted, wilson_ci(matched, accepted), trials, seed, accepted)


def conditional_collision_exact(
    params: ShuffleParams, pair: tuple[int, int], targets: tuple[int, int]
) -> Fraction:
    """Exact version of the conditional landing probability, by DP over
    (position pair, collided flag)."""
    xi, xj = (int(v) for v in pair)
    yi, yj = (int(v) for v in targets)
    if xi == xj or yi == yj:
        raise InvalidDistribution("pair and targets must each be distinct")
    n = params.n_cards
    states: dict[tuple[int, int, bool], Fraction] = {(xi, xj, False): Fraction(1)}
    share = Fraction(1, 4 * n)
    for _ in range(params.r):
        nxt: dict[tuple[int, int, bool], Fraction] = defaultdict(Fraction)
        for (pi, pj, collided), w in states.items():
            base = w * share
            for key in range(n):
                paired = pi ^ pj == key
                for ci in (0, 1):
                    for cj in (0, 1):
                        nxt[
                            (
                                pi ^ (key if ci else 0),
                                pj ^ (key if cj else 0),
                                collided or (paired and ci != cj),
                            )
                        ] += base
        states = dict(nxt)
    p_joint = Fraction(0)
    p_collided = Fraction(0)
    for (pi, pj, collided), w in states.items():
        if collided:
            p_collided += w
            if pi == yi and pj == yj:
                p_joint += w
    if p_collided == 0:
        raise EstimationError("collision event has probability zero")
    return p_joint / p_collided


@dataclass(frozen=True)
class AttackReport:
    advantage: float
    ci95: tuple[float, float]
    fire_rate_shuffle: float
    fire_rate_uniform: float
    trials: int
    seed: int

    def to_json(self) -> dict:
        return {
            "value": self.advantage,
            "ci95": [self.ci95[0], self.ci95[1]],
            "fire_rate_shuffle": self.fire_rate_shuffle,
            "fire_rate_uniform": self.fire_rate_uniform,
            "trials": self.trials,
            "seed": self.seed,
            "mode": "mc",
        }


def subspace_attack(params: ShuffleParams, q: int, trials: int, seed: int) -> AttackReport:
    """Advantage of the rank distinguisher: query q cards, output "shuffle"
    iff the XOR offsets (out_i ^ x_i) fail to span the whole space.

    With r < d the shuffle's keys can never span, so the test always fires
    on the shuffle; it rarely fires on a uniform permutation once q
    comfortably exceeds d.
    """
    n = params.n_cards
    if not 1 <= q <= n:
        raise InvalidDistribution(f"q = {q} outside 1..{n}")
    if params.d > 12:
        raise ResourceLimit("mask-based rank test is capped at d <= 12")
    xs = np.arange(q, dtype=np.int64)
    rng = make_generator(seed)
    fire_shuffle = 0
    fire_uniform = 0
    remaining = trials
    base = np.broadcast_to(np.arange(n, dtype=np.int64), (1, n))
    while remaining:
        chunk = min(_CHUNK, remaining)
        keys = rng.integers(0, n, size=(chunk, params.r), dtype=np.int64)
        pos = np.tile(xs, (chunk, 1))
        row_idx = np.arange(chunk)[:, None]
        for t in range(params.r):
            key = keys[:, t][:, None]
            bits = rng.integers(0, 2, size=(chunk, n), dtype=np.int64)
            rep = np.minimum(pos, pos ^ key)
            coin = bits[row_idx, rep]
            pos ^= key * coin
        fire_shuffle += int((~_spanning_flags(pos ^ xs, params.d)).sum())

        uniform_out = rng.permuted(np.repeat(base, chunk, axis=0), axis=1)[:, :q]
        fire_uniform += int((~_spanning_flags(uniform_out ^ xs, params.d)).sum())
        remaining -= chunk
    p1 = fire_shuffle / trials
    p2 = fire_uniform / trials
    advantage = p1 - p2
    se = float(np.sqrt(p1 * (1 - p1) / trials + p2 * (1 - p2) / trials))
    ci = (advantage - _Z95 * se, advantage + _Z95 * se)
    return AttackReport(advantage, ci, p1, p2, trials, seed)


def sep_from_uniform(
    params: ShuffleParams,
    q: int,
    *,
    mode: str = "exact",
    budget: int = DEFAULT_DP_BUDGET,
) -> Fraction | float:
    """Separation of the shuffle's q-tuple image laws from uniform:
    max over starting tuples and distinct targets of 1 - P * (N)_q.

    Shifting every tracked card by a constant shifts the law, and any
    invertible linear map of the space carries key schedules and pairings
    onto each other, so for q <= 2 a single canonical start suffices.
    """
    n = params.n_cards
    if not 1 <= q <= n:
        raise InvalidDistribution(f"q = {q} outside 1..{n}")
    falling = 1
    for i in range(q):
        falling *= n - i
    if q <= 2:
        starts = [tuple(range(q))]
    else:
        starts = [(0,) + rest for rest in itertools.combinations(range(1, n), q - 1)]
    worst: Fraction | float | None = None
    for xs in starts:
        law = evolve_son_joint(params, xs, mode=mode, budget=budget)
        lowest = law.min_over_distinct()
        value = 1 - lowest * falling
        if worst is None or value > worst:
            worst = value
    assert worst is not None
    return worst
