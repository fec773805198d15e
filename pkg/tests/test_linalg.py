"""Rational linear algebra: oracles against sympy and brute-force reduction."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from algebroidlab.linalg import (
    Echelon,
    NotAComplexError,
    QMatrix,
    hstack,
    kernel_quotient_dims,
    quotient_dim_and_reps,
    span_intersection,
    vstack,
)


def _random_matrix(rng, nrows, ncols, lo=-3, hi=3):
    return QMatrix([[Fraction(rng.randrange(lo, hi + 1)) for _ in range(ncols)]
                    for _ in range(nrows)], ncols)


def test_rref_frozen():
    m = QMatrix([[1, 2, 3], [2, 4, 6], [1, 1, 1]])
    red, pivots = m.rref()
    assert pivots == [0, 1]
    assert red.rows[0] == [1, 0, -1]
    assert red.rows[1] == [0, 1, 2]
    assert all(v == 0 for v in red.rows[2])


def test_rank_kernel_image_dimensions_random():
    rng = random.Random(1234)
    for _ in range(100):
        nr, nc = rng.randrange(1, 6), rng.randrange(1, 6)
        m = _random_matrix(rng, nr, nc)
        r = m.rank()
        ker = m.kernel_basis()
        img = m.image_basis()
        assert len(ker) == nc - r          # rank-nullity
        assert len(img) == r
        for v in ker:
            assert all(x == 0 for x in m.apply(v))


def test_rank_against_sympy():
    sympy = pytest.importorskip("sympy")
    rng = random.Random(777)
    for _ in range(50):
        nr, nc = rng.randrange(1, 6), rng.randrange(1, 6)
        m = _random_matrix(rng, nr, nc)
        assert m.rank() == sympy.Matrix([[sympy.Rational(v) for v in row]
                                         for v_i, row in enumerate(m.rows)]).rank()


def test_kernel_is_canonical_and_deterministic():
    m = QMatrix([[1, 1, 0], [0, 0, 0]])
    k1 = m.kernel_basis()
    k2 = m.kernel_basis()
    assert k1 == k2 == [[Fraction(-1), Fraction(1), Fraction(0)],
                        [Fraction(0), Fraction(0), Fraction(1)]]


def test_solve_and_inverse():
    m = QMatrix([[2, 1], [1, 1]])
    x = m.solve([3, 2])
    assert x == [Fraction(1), Fraction(1)]
    inv = m.inverse()
    assert inv @ m == QMatrix.identity(2)
    assert QMatrix([[1, 1], [1, 1]]).inverse() is None
    assert QMatrix([[1, 1], [2, 2]]).solve([1, 3]) is None


def test_matmul_and_stacks():
    a = QMatrix([[1, 2], [3, 4]])
    b = QMatrix([[0, 1], [1, 0]])
    assert (a @ b).rows == [[2, 1], [4, 3]]
    assert hstack([a, b]).ncols == 4
    assert vstack([a, b]).nrows == 4


def test_echelon_membership_and_reduction():
    ech = Echelon(3)
    assert ech.add([1, 1, 0])
    assert ech.add([0, 1, 1])
    assert not ech.add([1, 2, 1])     # dependent
    assert ech.contains([2, 3, 1])
    assert not ech.contains([0, 0, 1])
    assert ech.rank == 2


def test_span_intersection():
    # span{(1,0,0),(0,1,0)} meet span{(0,1,0),(0,0,1)} = span{(0,1,0)}
    a = [[Fraction(1), Fraction(0), Fraction(0)], [Fraction(0), Fraction(1), Fraction(0)]]
    b = [[Fraction(0), Fraction(1), Fraction(0)], [Fraction(0), Fraction(0), Fraction(1)]]
    inter = span_intersection(a, b, 3)
    assert len(inter) == 1
    v = inter[0]
    assert v[0] == 0 and v[2] == 0 and v[1] != 0


def _brute_force_betti(d_in, d_out):
    """Independent oracle: betti from ranks only, via sympy."""
    sympy = pytest.importorskip("sympy")
    a = sympy.Matrix(d_in.nrows, d_in.ncols, lambda i, j: sympy.Rational(d_in.rows[i][j]))
    b = sympy.Matrix(d_out.nrows, d_out.ncols, lambda i, j: sympy.Rational(d_out.rows[i][j]))
    dim = d_out.ncols
    return dim - b.rank() - a.rank()


def test_kernel_quotient_dims_random_complexes():
    rng = random.Random(31337)
    checked = 0
    while checked < 40:
        # Build a genuine two-step complex: d_in maps into ker(d_out).
        dim = rng.randrange(2, 6)
        d_out = _random_matrix(rng, rng.randrange(1, 5), dim)
        ker = d_out.kernel_basis()
        if not ker:
            continue
        n_in = rng.randrange(1, 4)
        cols = []
        for _ in range(n_in):
            combo = [Fraction(0)] * dim
            for v in ker:
                f = Fraction(rng.randrange(-2, 3))
                combo = [c + f * x for c, x in zip(combo, v)]
            cols.append(combo)
        d_in = QMatrix.from_columns(cols, dim)
        res = kernel_quotient_dims(d_in, d_out)
        assert res["betti"] == _brute_force_betti(d_in, d_out)
        assert res["betti"] == res["kernel_dim"] - res["image_dim"]
        assert len(res["representatives"]) == res["betti"]
        checked += 1


def test_kernel_quotient_rejects_non_complex_with_witness():
    d_in = QMatrix([[1], [0]])   # image = span(e1)
    d_out = QMatrix([[1, 0]])    # e1 not in kernel
    with pytest.raises(NotAComplexError) as err:
        kernel_quotient_dims(d_in, d_out)
    assert err.value.witness == (0, 0, Fraction(1))


def test_quotient_representatives_reduced():
    cycles = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
    boundaries = [[Fraction(1), Fraction(1)]]
    betti, reps = quotient_dim_and_reps(cycles, boundaries, 2)
    assert betti == 1
    assert len(reps) == 1
