"""Stage selection across chart overlaps and its post-hoc verification."""

import random

import pytest

from algebroidlab.errors import StructuralError, ValidationFailure
from algebroidlab.exhaustion import (IDENTITY_ORACLE, ExhaustionProblem,
                                     MonotoneOracle, SubexhaustionResult,
                                     subexhaust, verify_interleaving)


def _two_charts(mu_10, mu_01):
    # mu_10 swallows chart-0 stages inside chart 1
    return ExhaustionProblem(("U0", "U1"), ((0, 1),),
                             {(1, 0): mu_10, (0, 1): mu_01})


def test_oracle_prefix_and_tail_values():
    mu = MonotoneOracle(prefix=(2, 2, 5), slope=2, offset=0)
    assert [mu(n) for n in range(1, 6)] == [2, 2, 5, 8, 10]


def test_oracle_monotonicity_enforced():
    with pytest.raises(StructuralError):
        MonotoneOracle(prefix=(3, 2))
    with pytest.raises(StructuralError):
        MonotoneOracle(prefix=(9,), slope=1, offset=0)   # tail starts below 9
    with pytest.raises(StructuralError):
        MonotoneOracle(slope=0, offset=0)                # tail value 0
    with pytest.raises(StructuralError):
        MonotoneOracle(slope=-1)


def test_problem_requires_both_orientations():
    with pytest.raises(StructuralError):
        ExhaustionProblem(("A", "B"), ((0, 1),), {(1, 0): IDENTITY_ORACLE})
    with pytest.raises(StructuralError):
        ExhaustionProblem(("A", "B"), (),
                          {(1, 0): IDENTITY_ORACLE, (0, 1): IDENTITY_ORACLE})
    with pytest.raises(StructuralError):
        ExhaustionProblem(("A", "B"), ((1, 0),), {})


def test_two_chart_shifted_fixture():
    # swallowing into chart 1 costs one stage, back into chart 0 costs two
    ep = _two_charts(MonotoneOracle(slope=1, offset=1),
                     MonotoneOracle(slope=1, offset=2))
    res = subexhaust(ep, steps=6)
    assert res.alphas[0] == (1, 4, 7, 10, 13, 16)
    assert res.alphas[1] == (2, 5, 8, 11, 14, 17)
    assert res.verified


def test_two_chart_identity_oracles():
    ep = _two_charts(IDENTITY_ORACLE, IDENTITY_ORACLE)
    res = subexhaust(ep, steps=5)
    assert res.alphas[0] == (1, 2, 3, 4, 5)
    assert res.alphas[1] == (1, 2, 3, 4, 5)


def test_disjoint_charts_stay_identity():
    ep = ExhaustionProblem(("A", "B", "C"))
    res = subexhaust(ep, steps=4)
    assert res.alphas == {0: (1, 2, 3, 4), 1: (1, 2, 3, 4), 2: (1, 2, 3, 4)}
    assert res.pair_order == ()


def test_three_chart_chain_identity():
    oracles = {(1, 0): IDENTITY_ORACLE, (0, 1): IDENTITY_ORACLE,
               (2, 1): IDENTITY_ORACLE, (1, 2): IDENTITY_ORACLE}
    ep = ExhaustionProblem(("A", "B", "C"), ((0, 1), (1, 2)), oracles)
    res = subexhaust(ep, steps=5)
    assert all(res.alphas[i] == (1, 2, 3, 4, 5) for i in range(3))


def test_interleaving_postcondition_on_fixture():
    ep = _two_charts(MonotoneOracle(slope=1, offset=1),
                     MonotoneOracle(slope=1, offset=2))
    res = subexhaust(ep, steps=8)
    a0, a1 = res.alphas[0], res.alphas[1]
    # the two displayed inequalities of the two-chart recursion
    for n in range(8):
        assert ep.oracles[(1, 0)](a0[n]) <= a1[n]
    for n in range(1, 8):
        assert ep.oracles[(0, 1)](a1[n - 1]) <= a0[n]


def test_two_chart_superlinear_oracles():
    # doubling oracles: stages escalate geometrically but stay interleaved
    ep = _two_charts(MonotoneOracle(slope=2, offset=0),
                     MonotoneOracle(slope=2, offset=1))
    res = subexhaust(ep, steps=6)
    assert res.alphas[0] == (1, 5, 21, 85, 341, 1365)
    assert res.alphas[1] == (2, 10, 42, 170, 682, 2730)
    assert res.verified


def test_verify_detects_violation():
    ep = _two_charts(MonotoneOracle(slope=1, offset=1),
                     MonotoneOracle(slope=1, offset=2))
    ok, witnesses = verify_interleaving(ep, {0: (1, 2, 3), 1: (1, 2, 3)})
    assert not ok
    assert {"pair": (0, 1), "stages": (1, 1)} in witnesses


def test_verify_flags_non_increasing_selection():
    ep = ExhaustionProblem(("A",))
    ok, witnesses = verify_interleaving(ep, {0: (1, 1, 2)})
    assert not ok
    assert witnesses[0]["reason"] == "not strictly increasing"


def test_steps_must_be_positive():
    with pytest.raises(StructuralError):
        subexhaust(ExhaustionProblem(("A",)), steps=0)


def _random_oracle(rng, allow_super=False) -> MonotoneOracle:
    # superlinear tails are reserved for sparse graphs: stage values compound
    # through every refinement pass, so dense graphs would blow up the walk
    slope = rng.choice((0, 1, 1, 2)) if allow_super else rng.choice((0, 1, 1))
    plen = rng.randrange(0, 4)
    prefix = []
    v = rng.randrange(1, 4)
    for _ in range(plen):
        prefix.append(v)
        v += rng.randrange(0, 3)
    offset = rng.randrange(0, 4)
    first_tail = slope * (plen + 1) + offset
    if prefix and first_tail < prefix[-1]:
        offset += prefix[-1] - first_tail
    if slope == 0 and offset == 0:
        offset = 1
    return MonotoneOracle(tuple(prefix), slope, offset)


def _random_problem(rng) -> ExhaustionProblem:
    n = rng.randrange(2, 7)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    overlaps = tuple(sorted(p for p in pairs if rng.random() < 0.5))
    allow_super = len(overlaps) <= 3
    oracles = {}
    for (i, j) in overlaps:
        oracles[(i, j)] = _random_oracle(rng, allow_super)
        oracles[(j, i)] = _random_oracle(rng, allow_super)
    return ExhaustionProblem(tuple(f"U{k}" for k in range(n)), overlaps, oracles)


def test_randomized_problems_all_verify():
    rng = random.Random(20240817)
    for _ in range(50):
        ep = _random_problem(rng)
        res = subexhaust(ep, steps=8)
        assert res.verified
        ok, _ = verify_interleaving(ep, res.alphas)
        assert ok
        for seq in res.alphas.values():
            assert all(a < b for a, b in zip(seq, seq[1:]))
