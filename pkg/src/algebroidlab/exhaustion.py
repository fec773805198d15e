"""Interleaved subexhaustions over a chart graph.

Each chart carries an exhaustion index line 1, 2, 3, ... and each oriented
overlap an oracle mu[(dst, src)](n) = the least dst stage that strictly
swallows src stage n over the shared region.  The goal is one strictly
increasing stage selection per chart such that for any two selected stages
of overlapping charts, one strictly swallows the other; then selected stage
boundaries never meet across charts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Tuple

from .errors import StructuralError, ValidationFailure


@dataclass(frozen=True)
class MonotoneOracle:
    """Nondecreasing map given by a finite prefix and an eventual linear tail.

    value(n) = prefix[n-1] for n <= len(prefix), else slope*n + offset.
    """

    prefix: Tuple[int, ...] = ()
    slope: int = 1
    offset: int = 0

    def __post_init__(self):
        for v in self.prefix:
            if not isinstance(v, int) or v < 1:
                raise StructuralError("oracle values must be positive integers")
        if any(a > b for a, b in zip(self.prefix, self.prefix[1:])):
            raise StructuralError("oracle prefix must be nondecreasing")
        if self.slope < 0:
            raise StructuralError("oracle tail slope must be nonnegative")
        first_tail = self.slope * (len(self.prefix) + 1) + self.offset
        if first_tail < 1:
            raise StructuralError("oracle tail must stay positive")
        if self.prefix and first_tail < self.prefix[-1]:
            raise StructuralError("oracle tail must dominate the prefix")

    def __call__(self, n: int) -> int:
        if n < 1:
            raise StructuralError("oracle argument must be positive")
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        return self.slope * n + self.offset


IDENTITY_ORACLE = MonotoneOracle()


@dataclass
class ExhaustionProblem:
    """Chart graph plus the swallowing oracles on its oriented overlaps.

    oracles[(j, i)] answers for chart-i stages inside chart j; each
    unordered overlap needs both orientations.
    """

    charts: Tuple[str, ...]
    overlaps: Tuple[Tuple[int, int], ...] = ()
    oracles: Dict[Tuple[int, int], MonotoneOracle] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.charts)
        seen = set()
        for (i, j) in self.overlaps:
            if not (0 <= i < j < n):
                raise StructuralError(f"overlap ({i}, {j}) must be a sorted chart pair")
            if (i, j) in seen:
                raise StructuralError(f"duplicate overlap ({i}, {j})")
            seen.add((i, j))
        needed = set()
        for (i, j) in self.overlaps:
            needed.add((i, j))
            needed.add((j, i))
        for key in self.oracles:
            if key not in needed:
                raise StructuralError(f"oracle {key} does not match any overlap")
        for key in needed:
            if key not in self.oracles:
                raise StructuralError(f"missing oracle for oriented overlap {key}")

    @property
    def n_charts(self) -> int:
        return len(self.charts)


class _Memo:
    """Strictly increasing map on 1, 2, ... filled on demand."""

    def __init__(self, step: Callable[[int], int]):
        self.vals: List[int] = []
        self.step = step

    def __call__(self, n: int) -> int:
        while len(self.vals) < n:
            self.vals.append(self.step(len(self.vals) + 1))
        return self.vals[n - 1]


def _least_stage(seq: Callable[[int], int], target: int) -> int:
    """Least m >= 1 with seq(m) >= target, seq strictly increasing.

    Galloping then bisection; composed selections can grow fast, so a
    linear scan is not affordable here.
    """
    if seq(1) >= target:
        return 1
    lo, hi = 1, 2
    while seq(hi) < target:
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if seq(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def _case_one_pair(a_seq, b_seq, mu_ba: MonotoneOracle, mu_ab: MonotoneOracle):
    """Two-chart refinement of the current stage selections.

    Runs the alternating minimal-swallowing recursion on the reindexed
    oracles, bumped where needed to keep the output strictly increasing.
    Returns the composed selections.
    """
    a_seq = lru_cache(maxsize=None)(a_seq)
    b_seq = lru_cache(maxsize=None)(b_seq)

    def re_ba(n: int) -> int:
        # least current b stage swallowing current a stage n
        return _least_stage(b_seq, mu_ba(a_seq(n)))

    def re_ab(n: int) -> int:
        return _least_stage(a_seq, mu_ab(b_seq(n)))

    def step1(k: int) -> int:
        if k == 1:
            return 1
        return max(re_ab(alpha2(k - 1)), alpha1(k - 1) + 1)

    def step2(k: int) -> int:
        if k == 1:
            return re_ba(alpha1(1))
        return max(re_ba(alpha1(k)), alpha2(k - 1) + 1)

    alpha1 = _Memo(step1)
    alpha2 = _Memo(step2)
    return (lambda n: a_seq(alpha1(n))), (lambda n: b_seq(alpha2(n)))


@dataclass
class SubexhaustionResult:
    steps: int
    alphas: Dict[int, Tuple[int, ...]]
    pair_order: Tuple[Tuple[int, int], ...]
    verified: bool


def subexhaust(ep: ExhaustionProblem, steps: int = 10) -> SubexhaustionResult:
    """Stage selections for every chart, interleaved across all overlaps.

    Overlapping pairs are processed once each, in lexicographic order;
    every pass refines the two selections involved and refinement only
    discards stages, so established interleavings survive later passes.
    The output is re-verified against every oracle before returning.
    """
    if steps < 1:
        raise StructuralError("steps must be positive")
    seqs: Dict[int, Callable[[int], int]] = {
        i: (lambda n: n) for i in range(ep.n_charts)}
    order = tuple(sorted(ep.overlaps))
    for (i, j) in order:
        seqs[i], seqs[j] = _case_one_pair(seqs[i], seqs[j],
                                          ep.oracles[(j, i)], ep.oracles[(i, j)])
    alphas = {i: tuple(seqs[i](n) for n in range(1, steps + 1))
              for i in range(ep.n_charts)}
    ok, witnesses = verify_interleaving(ep, alphas)
    if not ok:
        raise ValidationFailure("constructed selections fail the interleaving",
                                {"kind": "interleaving", "witnesses": witnesses[:3]})
    return SubexhaustionResult(steps, alphas, order, ok)


def verify_interleaving(ep: ExhaustionProblem,
                        alphas: Dict[int, Tuple[int, ...]]):
    """Check every oracle against every selected stage pair.

    For charts i, j sharing an overlap and any selected stages a of i and
    b of j, one of the two must swallow the other: mu_ji(a) <= b or
    mu_ij(b) <= a.  Also checks strict monotonicity of each selection.
    """
    witnesses: List[dict] = []
    for i, seq in alphas.items():
        if any(a >= b for a, b in zip(seq, seq[1:])) or (seq and seq[0] < 1):
            witnesses.append({"chart": i, "reason": "not strictly increasing"})
    for (i, j) in ep.overlaps:
        mu_ji = ep.oracles[(j, i)]
        mu_ij = ep.oracles[(i, j)]
        for a in alphas.get(i, ()):
            for b in alphas.get(j, ()):
                if mu_ji(a) <= b or mu_ij(b) <= a:
                    continue
                witnesses.append({"pair": (i, j), "stages": (a, b)})
    return (not witnesses), witnesses
