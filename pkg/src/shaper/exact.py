"""Exact rational linear algebra used by the formal solvers.

Everything here works on :class:`fractions.Fraction` and sparse rows
(``dict`` from column index to coefficient).  The systems that come out of
order-by-order Taylor matching are large but very sparse, so a sparse
incremental Gauss-Jordan elimination is both simpler and faster than dense
matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Hashable, Iterable, Sequence

Row = dict[int, Fraction]


def to_fraction(value: Any) -> Fraction:
    """Convert ints, Fractions, ``"p/q"`` strings and decimal strings exactly.

    Floats are converted through their shortest ``repr`` so that ``0.1``
    becomes ``1/10`` rather than the binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        return Fraction(int(value.numerator), int(value.denominator))
    raise TypeError(f"cannot convert {value!r} to a rational")


def fmt(value: Fraction) -> str:
    """Lowest-terms ``p/q`` (or plain integer) formatting."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


# ---------------------------------------------------------------------------
# sparse incremental elimination


class InconsistentEquation(Exception):
    """Raised by :class:`LinearSystem` when an equation cannot be satisfied."""

    def __init__(self, tag: Hashable):
        super().__init__(f"inconsistent equation {tag!r}")
        self.tag = tag


@dataclass
class LinearSystem:
    """Incrementally reduced sparse system ``sum_j a_ij x_j = b_i``.

    Rows are kept in reduced row echelon form as they are added.  The pivot
    of a new row is its smallest remaining column, so unknowns should be
    numbered in the order in which they ought to be solved for; later
    columns end up free.
    """

    ncols: int
    _rows: dict[int, Row] = field(default_factory=dict)  # pivot column -> row
    _rhs: dict[int, Fraction] = field(default_factory=dict)

    def add(self, coeffs: Row, rhs: Fraction = Fraction(0), tag: Hashable = None) -> bool:
        """Add one equation.  Returns True if it increased the rank.

        Raises :class:`InconsistentEquation` (carrying ``tag``) if the
        equation reduces to ``0 = nonzero``.
        """
        row = {c: Fraction(v) for c, v in coeffs.items() if v != 0}
        b = Fraction(rhs)
        # pivot rows hold no other pivot column, so one pass suffices
        for col in [c for c in row if c in self._rows]:
            factor = row.get(col)
            if not factor:
                continue
            prow = self._rows[col]
            for c, v in prow.items():
                nv = row.get(c, 0) - factor * v
                if nv:
                    row[c] = nv
                else:
                    row.pop(c, None)
            b -= factor * self._rhs[col]
        if not row:
            if b != 0:
                raise InconsistentEquation(tag)
            return False
        pivot = min(row)
        inv = 1 / row[pivot]
        row = {c: v * inv for c, v in row.items()}
        b *= inv
        # eliminate the new pivot from the existing rows
        for pcol, prow in self._rows.items():
            factor = prow.get(pivot)
            if not factor:
                continue
            for c, v in row.items():
                nv = prow.get(c, 0) - factor * v
                if nv:
                    prow[c] = nv
                else:
                    prow.pop(c, None)
            self._rhs[pcol] -= factor * b
        self._rows[pivot] = row
        self._rhs[pivot] = b
        return True

    @property
    def rank(self) -> int:
        return len(self._rows)

    @property
    def pivots(self) -> list[int]:
        return sorted(self._rows)

    def free_columns(self) -> list[int]:
        return [c for c in range(self.ncols) if c not in self._rows]

    def rows(self) -> list[tuple[Row, Fraction]]:
        """Reduced rows and right-hand sides, in pivot order."""
        return [(dict(self._rows[c]), self._rhs[c]) for c in sorted(self._rows)]

    def forced(self) -> dict[int, Fraction]:
        """Unknowns whose value is the same in every solution."""
        return {c: self._rhs[c] for c, row in self._rows.items() if len(row) == 1}

    def relation(self, col: int) -> tuple[Fraction, Row]:
        """Express pivot unknown ``col`` as ``rhs - sum(coeff * free)``."""
        row = self._rows[col]
        return self._rhs[col], {c: v for c, v in row.items() if c != col}

    def solution(self, free_values: dict[int, Fraction] | None = None) -> list[Fraction]:
        """Particular solution with free unknowns set (default zero)."""
        free_values = free_values or {}
        x = [Fraction(0)] * self.ncols
        for c in self.free_columns():
            x[c] = Fraction(free_values.get(c, 0))
        for c, row in self._rows.items():
            val = self._rhs[c]
            for cc, v in row.items():
                if cc != c:
                    val -= v * x[cc]
            x[c] = val
        return x

    def nullspace(self) -> list[list[Fraction]]:
        """Basis of the homogeneous solution space, one vector per free column."""
        basis = []
        for f in self.free_columns():
            vec = [Fraction(0)] * self.ncols
            vec[f] = Fraction(1)
            for c, row in self._rows.items():
                v = row.get(f)
                if v:
                    vec[c] = -v
            basis.append(vec)
        return basis


# ---------------------------------------------------------------------------
# small dense helpers

Matrix = list[list[Fraction]]


def frac_matrix(rows: Iterable[Iterable[Any]]) -> Matrix:
    return [[to_fraction(v) for v in row] for row in rows]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def zeros(n: int, m: int | None = None) -> Matrix:
    return [[Fraction(0)] * (n if m is None else m) for _ in range(n)]


def matmul(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> Matrix:
    inner = len(b)
    cols = len(b[0]) if b else 0
    return [
        [sum((a[i][k] * b[k][j] for k in range(inner)), Fraction(0)) for j in range(cols)]
        for i in range(len(a))
    ]


def matvec(a: Sequence[Sequence[Fraction]], x: Sequence[Fraction]) -> list[Fraction]:
    return [sum((row[k] * x[k] for k in range(len(x))), Fraction(0)) for row in a]


def transpose(a: Sequence[Sequence[Fraction]]) -> Matrix:
    return [list(col) for col in zip(*a)]


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    if not rows:
        return 0
    system = LinearSystem(len(rows[0]))
    for row in rows:
        system.add({j: v for j, v in enumerate(row) if v})
    return system.rank


def inverse(a: Sequence[Sequence[Fraction]]) -> Matrix:
    """Gauss-Jordan inverse; raises ZeroDivisionError when singular."""
    n = len(a)
    work = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        work[col], work[piv] = work[piv], work[col]
        inv = 1 / work[col][col]
        work[col] = [v * inv for v in work[col]]
        for r in range(n):
            if r != col and work[r][col] != 0:
                f = work[r][col]
                work[r] = [v - f * w for v, w in zip(work[r], work[col])]
    return [row[n:] for row in work]


def det(a: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(a)
    work = [list(map(Fraction, row)) for row in a]
    result = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            work[col], work[piv] = work[piv], work[col]
            result = -result
        result *= work[col][col]
        for r in range(col + 1, n):
            if work[r][col] != 0:
                f = work[r][col] / work[col][col]
                work[r] = [v - f * w for v, w in zip(work[r], work[col])]
    return result


def is_symmetric(a: Sequence[Sequence[Fraction]]) -> bool:
    n = len(a)
    return all(a[i][j] == a[j][i] for i in range(n) for j in range(i + 1, n))


def is_positive_definite(a: Sequence[Sequence[Fraction]]) -> bool:
    """Sylvester's criterion on a symmetric rational matrix (exact)."""
    if not is_symmetric(a):
        return False
    n = len(a)
    return all(det([row[:k] for row in a[:k]]) > 0 for k in range(1, n + 1))


def to_float(a: Sequence[Sequence[Fraction]]):
    import numpy as np

    return np.array([[float(v) for v in row] for row in a], dtype=float)
