"""Exact linear algebra over the rationals.

All computations run on Fraction entries; there is no floating point in
this module.  Pivoting is deterministic (first nonzero entry scanning
columns left to right), so kernel and image bases, reduced echelon forms
and quotient representatives are reproducible byte for byte.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

QZERO = Fraction(0)
QONE = Fraction(1)

Vector = List[Fraction]


class NotAComplexError(ValueError):
    """Composite of two maps expected to vanish does not.

    Carries the first nonzero witness entry as (row, col, value).
    """

    def __init__(self, witness: Tuple[int, int, Fraction]):
        row, col, value = witness
        super().__init__(
            f"not a complex: composite has nonzero entry {value} at row {row}, column {col}")
        self.witness = witness


class QMatrix:
    """Dense rational matrix; rows of Fractions."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Sequence[Sequence] , ncols: Optional[int] = None):
        self.rows = [[Fraction(v) for v in row] for row in rows]
        self.nrows = len(self.rows)
        if self.nrows:
            self.ncols = len(self.rows[0])
            if any(len(r) != self.ncols for r in self.rows):
                raise ValueError("ragged rows")
        else:
            self.ncols = 0 if ncols is None else ncols

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "QMatrix":
        return cls([[QZERO] * ncols for _ in range(nrows)], ncols)

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls([[QONE if i == j else QZERO for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_columns(cls, cols: Sequence[Vector], nrows: Optional[int] = None) -> "QMatrix":
        if not cols:
            return cls.zeros(nrows or 0, 0)
        height = len(cols[0])
        if height == 0:
            return cls.zeros(0, len(cols))
        return cls([[col[i] for col in cols] for i in range(height)])

    def copy(self) -> "QMatrix":
        return QMatrix([row[:] for row in self.rows], self.ncols)

    def column(self, j: int) -> Vector:
        return [row[j] for row in self.rows]

    def columns(self) -> List[Vector]:
        return [self.column(j) for j in range(self.ncols)]

    def transpose(self) -> "QMatrix":
        return QMatrix([[self.rows[i][j] for i in range(self.nrows)]
                        for j in range(self.ncols)], self.nrows)

    def is_zero(self) -> bool:
        return all(v == 0 for row in self.rows for v in row)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QMatrix):
            return NotImplemented
        return (self.nrows, self.ncols) == (other.nrows, other.ncols) and self.rows == other.rows

    def __repr__(self) -> str:
        return f"QMatrix({self.nrows}x{self.ncols})"

    def __add__(self, other: "QMatrix") -> "QMatrix":
        self._shape_check(other, same=True)
        return QMatrix([[a + b for a, b in zip(r1, r2)]
                        for r1, r2 in zip(self.rows, other.rows)], self.ncols)

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        self._shape_check(other, same=True)
        return QMatrix([[a - b for a, b in zip(r1, r2)]
                        for r1, r2 in zip(self.rows, other.rows)], self.ncols)

    def __neg__(self) -> "QMatrix":
        return QMatrix([[-a for a in row] for row in self.rows], self.ncols)

    def scale(self, value) -> "QMatrix":
        v = Fraction(value)
        return QMatrix([[a * v for a in row] for row in self.rows], self.ncols)

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}")
        bt = other.transpose().rows
        out = []
        for row in self.rows:
            out_row = []
            for col in bt:
                acc = QZERO
                for a, b in zip(row, col):
                    if a and b:
                        acc += a * b
                out_row.append(acc)
            out.append(out_row)
        return QMatrix(out, other.ncols)

    def apply(self, vec: Sequence) -> Vector:
        v = [Fraction(x) for x in vec]
        if len(v) != self.ncols:
            raise ValueError("vector arity mismatch")
        return [sum((a * b for a, b in zip(row, v)), QZERO) for row in self.rows]

    def _shape_check(self, other: "QMatrix", same: bool = False) -> None:
        if same and (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")

    # -- reductions -------------------------------------------------------------

    def rref(self) -> Tuple["QMatrix", List[int]]:
        """Reduced row echelon form and the list of pivot columns."""
        m = [row[:] for row in self.rows]
        nrows, ncols = self.nrows, self.ncols
        pivots: List[int] = []
        pr = 0
        for col in range(ncols):
            pivot = None
            for r in range(pr, nrows):
                if m[r][col] != 0:
                    pivot = r
                    break
            if pivot is None:
                continue
            m[pr], m[pivot] = m[pivot], m[pr]
            inv = 1 / m[pr][col]
            m[pr] = [v * inv for v in m[pr]]
            for r in range(nrows):
                if r != pr and m[r][col] != 0:
                    f = m[r][col]
                    m[r] = [a - f * b for a, b in zip(m[r], m[pr])]
            pivots.append(col)
            pr += 1
            if pr == nrows:
                break
        out = QMatrix.__new__(QMatrix)
        out.rows = m
        out.nrows = nrows
        out.ncols = ncols
        return out, pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def kernel_basis(self) -> List[Vector]:
        """Basis of the null space; one vector per free column, in column order.

        Each basis vector has entry 1 at its free column and zeros at the
        other free columns, which makes the basis canonical.
        """
        red, pivots = self.rref()
        pivot_set = set(pivots)
        free = [j for j in range(self.ncols) if j not in pivot_set]
        basis: List[Vector] = []
        for j in free:
            vec = [QZERO] * self.ncols
            vec[j] = QONE
            for r, pc in enumerate(pivots):
                vec[pc] = -red.rows[r][j]
            basis.append(vec)
        return basis

    def image_basis(self) -> List[Vector]:
        """Basis of the column space: the original pivot columns."""
        _, pivots = self.rref()
        return [self.column(j) for j in pivots]

    def row_space_rref(self) -> List[Vector]:
        """Canonical basis of the row space: nonzero rows of the rref."""
        red, pivots = self.rref()
        return [red.rows[i][:] for i in range(len(pivots))]

    def solve(self, b: Sequence) -> Optional[Vector]:
        """One solution x of self @ x = b, or None if inconsistent."""
        bb = [Fraction(v) for v in b]
        if len(bb) != self.nrows:
            raise ValueError("rhs arity mismatch")
        aug = QMatrix([row + [val] for row, val in zip(self.rows, bb)] or [],
                      self.ncols + 1)
        if self.nrows == 0:
            return [QZERO] * self.ncols
        red, pivots = aug.rref()
        if self.ncols in pivots:
            return None
        x = [QZERO] * self.ncols
        for r, pc in enumerate(pivots):
            x[pc] = red.rows[r][self.ncols]
        return x

    def inverse(self) -> Optional["QMatrix"]:
        if self.nrows != self.ncols:
            raise ValueError("inverse of a non-square matrix")
        n = self.nrows
        aug = QMatrix([self.rows[i] + [QONE if j == i else QZERO for j in range(n)]
                       for i in range(n)], 2 * n)
        red, pivots = aug.rref()
        if pivots != list(range(n)):
            return None
        return QMatrix([red.rows[i][n:] for i in range(n)], n)


def hstack(mats: Sequence[QMatrix]) -> QMatrix:
    mats = [m for m in mats]
    if not mats:
        return QMatrix.zeros(0, 0)
    nrows = mats[0].nrows
    if any(m.nrows != nrows for m in mats):
        raise ValueError("row count mismatch in hstack")
    return QMatrix([sum((m.rows[i] for m in mats), []) for i in range(nrows)],
                   sum(m.ncols for m in mats))


def vstack(mats: Sequence[QMatrix]) -> QMatrix:
    mats = [m for m in mats]
    if not mats:
        return QMatrix.zeros(0, 0)
    ncols = mats[0].ncols
    if any(m.ncols != ncols for m in mats):
        raise ValueError("column count mismatch in vstack")
    rows = []
    for m in mats:
        rows.extend(row[:] for row in m.rows)
    return QMatrix(rows, ncols)


class Echelon:
    """Incrementally built reduced echelon span, for membership and reduction."""

    def __init__(self, dim: int):
        self.dim = dim
        self.rows: List[Vector] = []
        self.pivots: List[int] = []

    def reduce(self, vec: Sequence) -> Vector:
        """Residual of vec after elimination against the current span."""
        v = [Fraction(x) for x in vec]
        for row, p in zip(self.rows, self.pivots):
            if v[p] != 0:
                f = v[p]
                v = [a - f * b for a, b in zip(v, row)]
        return v

    def add(self, vec: Sequence) -> bool:
        """Insert vec into the span; True if it enlarged the span."""
        v = self.reduce(vec)
        pivot = next((i for i, x in enumerate(v) if x != 0), None)
        if pivot is None:
            return False
        inv = 1 / v[pivot]
        v = [x * inv for x in v]
        # Back-substitute into existing rows to keep the echelon reduced.
        for i, row in enumerate(self.rows):
            if row[pivot] != 0:
                f = row[pivot]
                self.rows[i] = [a - f * b for a, b in zip(row, v)]
        at = next((k for k, p in enumerate(self.pivots) if p > pivot), len(self.pivots))
        self.rows.insert(at, v)
        self.pivots.insert(at, pivot)
        return True

    def contains(self, vec: Sequence) -> bool:
        return all(x == 0 for x in self.reduce(vec))

    @property
    def rank(self) -> int:
        return len(self.rows)


def span_intersection(a: List[Vector], b: List[Vector], dim: int) -> List[Vector]:
    """Basis of span(a) meet span(b), as vectors in the ambient space."""
    if not a or not b:
        return []
    stacked = QMatrix([[(a[j][i] if j < len(a) else -b[j - len(a)][i])
                        for j in range(len(a) + len(b))] for i in range(dim)],
                      len(a) + len(b))
    out: List[Vector] = []
    ech = Echelon(dim)
    for ker in stacked.kernel_basis():
        vec = [sum((ker[j] * a[j][i] for j in range(len(a))), QZERO) for i in range(dim)]
        if ech.add(vec):
            out.append(vec)
    return out


def quotient_dim_and_reps(cycles: List[Vector], boundaries: List[Vector], dim: int
                          ) -> Tuple[int, List[Vector]]:
    """Dimension and canonical representatives of span(cycles)/span(boundaries).

    Boundaries must lie inside the cycle span (not checked here).  The
    representatives are the residuals of the cycle basis vectors after
    reduction modulo the boundary span, taken in order, each reduced
    against the previously accepted ones.
    """
    ech = Echelon(dim)
    for b in boundaries:
        ech.add(b)
    reps: List[Vector] = []
    rep_ech = Echelon(dim)
    for z in cycles:
        resid = ech.reduce(z)
        resid = rep_ech.reduce(resid)
        pivot = next((i for i, x in enumerate(resid) if x != 0), None)
        if pivot is None:
            continue
        inv = 1 / resid[pivot]
        resid = [x * inv for x in resid]
        rep_ech.add(resid)
        reps.append(resid)
    return len(reps), reps


def kernel_quotient_dims(d_in: QMatrix, d_out: QMatrix) -> Dict[str, object]:
    """Exact homology data of the two-step complex  . --d_in--> . --d_out--> .

    Verifies d_out @ d_in = 0 first and raises NotAComplexError with the
    first nonzero entry as a witness otherwise.  Returns kernel dimension,
    image dimension, quotient dimension, and canonical bases.
    """
    if d_in.ncols and d_out.ncols != d_in.nrows:
        raise ValueError("chain maps are not composable")
    comp = d_out @ d_in
    for i, row in enumerate(comp.rows):
        for j, v in enumerate(row):
            if v != 0:
                raise NotAComplexError((i, j, v))
    kernel = d_out.kernel_basis()
    image = d_in.image_basis()
    dim = d_out.ncols
    betti, reps = quotient_dim_and_reps(kernel, image, dim)
    return {
        "kernel_dim": len(kernel),
        "image_dim": len(image),
        "betti": betti,
        "kernel_basis": kernel,
        "image_basis": image,
        "representatives": reps,
    }
