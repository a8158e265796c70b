"""Truncated multivariate Taylor series with exact rational coefficients.

A :class:`Jet` is a polynomial in ``q1, ..., qn`` known up to total degree
``order``; everything above that degree is unknown, not zero.  Arithmetic
follows the usual truncated power series rules: the result of combining
two jets is known only up to the smaller of the two orders, and a
derivative loses one order.

Variable indices in the Python API are 0-based (``diff(0)`` is the
derivative with respect to ``q1``).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import JetError

MultiIndex = tuple[int, ...]


@lru_cache(maxsize=None)
def monomials_of_degree(dim: int, degree: int) -> tuple[MultiIndex, ...]:
    """Exponent tuples of total degree ``degree``, ``q1`` powers first."""
    out = []
    for combo in combinations_with_replacement(range(dim), degree):
        alpha = [0] * dim
        for i in combo:
            alpha[i] += 1
        out.append(tuple(alpha))
    return tuple(out)


@lru_cache(maxsize=None)
def monomials(dim: int, order: int) -> tuple[MultiIndex, ...]:
    """All exponent tuples of degree <= ``order``, ordered by degree."""
    return tuple(a for d in range(order + 1) for a in monomials_of_degree(dim, d))


def _scalar(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    raise JetError(f"jet coefficients must be exact rationals, got {type(value).__name__}")


class Jet:
    """Exact truncated Taylor series around the origin.

    Coefficients are stored per total degree (one ``dict`` per degree), so
    iteration is deterministic and truncation is a slice.  Instances are
    treated as immutable.
    """

    __slots__ = ("dim", "order", "_parts")

    def __init__(self, dim: int, order: int, coeffs: Mapping[MultiIndex, object] | None = None):
        if dim < 1:
            raise JetError("jet dimension must be positive")
        if order < -1:
            raise JetError("jet order must be >= -1")
        self.dim = dim
        self.order = order
        parts: list[dict[MultiIndex, Fraction]] = [{} for _ in range(order + 1)]
        for alpha, c in (coeffs or {}).items():
            alpha = tuple(alpha)
            if len(alpha) != dim or any(e < 0 for e in alpha):
                raise JetError(f"bad multi-index {alpha} for dimension {dim}")
            d = sum(alpha)
            if d > order:
                continue
            c = _scalar(c)
            if c:
                parts[d][alpha] = parts[d].get(alpha, Fraction(0)) + c
                if not parts[d][alpha]:
                    del parts[d][alpha]
        self._parts = tuple(parts)

    @classmethod
    def _from_parts(cls, dim: int, order: int, parts: Sequence[dict]) -> "Jet":
        jet = object.__new__(cls)
        jet.dim = dim
        jet.order = order
        jet._parts = tuple({a: c for a, c in p.items() if c} for p in parts[: order + 1])
        return jet

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, dim: int, order: int) -> "Jet":
        return cls(dim, order)

    @classmethod
    def constant(cls, value, dim: int, order: int) -> "Jet":
        return cls(dim, order, {(0,) * dim: value})

    @classmethod
    def variable(cls, index: int, dim: int, order: int) -> "Jet":
        if not 0 <= index < dim:
            raise JetError(f"variable index {index} out of range for dimension {dim}")
        alpha = [0] * dim
        alpha[index] = 1
        return cls(dim, order, {tuple(alpha): 1})

    # -- access ------------------------------------------------------------

    def coeff(self, alpha: Iterable[int]) -> Fraction:
        alpha = tuple(alpha)
        d = sum(alpha)
        if len(alpha) != self.dim:
            raise JetError(f"multi-index {alpha} has wrong length for dimension {self.dim}")
        if d > self.order:
            raise JetError(f"coefficient of degree {d} is beyond truncation order {self.order}")
        return self._parts[d].get(alpha, Fraction(0))

    def part(self, degree: int) -> dict[MultiIndex, Fraction]:
        """Homogeneous component of the given degree (a copy)."""
        if degree > self.order or degree < 0:
            return {}
        return dict(self._parts[degree])

    def items(self) -> Iterator[tuple[MultiIndex, Fraction]]:
        for d, part in enumerate(self._parts):
            order = monomials_of_degree(self.dim, d)
            if len(part) * 4 < len(order):
                yield from sorted(part.items(), key=lambda kv: tuple(-e for e in kv[0]))
            else:
                for alpha in order:
                    if alpha in part:
                        yield alpha, part[alpha]

    @property
    def constant_term(self) -> Fraction:
        if self.order < 0:
            raise JetError("empty jet has no constant term")
        return self._parts[0].get((0,) * self.dim, Fraction(0))

    def is_zero(self) -> bool:
        return not any(self._parts)

    def max_degree(self) -> int:
        """Largest degree with a nonzero coefficient (-1 for the zero jet)."""
        for d in range(self.order, -1, -1):
            if self._parts[d]:
                return d
        return -1

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetError(f"cannot raise jet order from {self.order} to {order}")
        return Jet._from_parts(self.dim, order, self._parts)

    def with_order(self, order: int) -> "Jet":
        """Reinterpret the stored polynomial at another order.

        Raising the order asserts that the missing coefficients are zero,
        which is right for polynomial inputs.
        """
        if order <= self.order:
            return self.truncate(order)
        parts = list(self._parts) + [{} for _ in range(order - self.order)]
        return Jet._from_parts(self.dim, order, parts)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.dim != self.dim:
                raise JetError(f"dimension mismatch: {self.dim} vs {other.dim}")
            return other
        return Jet.constant(_scalar(other), self.dim, self.order)

    def __add__(self, other) -> "Jet":
        other = self._coerce(other)
        order = min(self.order, other.order)
        parts = []
        for d in range(order + 1):
            p = dict(self._parts[d])
            for a, c in other._parts[d].items():
                p[a] = p.get(a, Fraction(0)) + c
            parts.append(p)
        return Jet._from_parts(self.dim, order, parts)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet._from_parts(self.dim, self.order, [{a: -c for a, c in p.items()} for p in self._parts])

    def __sub__(self, other) -> "Jet":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Jet":
        return self._coerce(other) - self

    def scale(self, factor) -> "Jet":
        f = _scalar(factor)
        return Jet._from_parts(self.dim, self.order, [{a: c * f for a, c in p.items()} for p in self._parts])

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self.scale(other)
        other = self._coerce(other)
        order = min(self.order, other.order)
        parts: list[dict] = [{} for _ in range(order + 1)]
        for da in range(order + 1):
            pa = self._parts[da]
            if not pa:
                continue
            for db in range(order + 1 - da):
                pb = other._parts[db]
                if not pb:
                    continue
                target = parts[da + db]
                for a, ca in pa.items():
                    for b, cb in pb.items():
                        key = tuple(x + y for x, y in zip(a, b))
                        target[key] = target.get(key, 0) + ca * cb
        return Jet._from_parts(self.dim, order, parts)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self * other.inverse()
        return self.scale(1 / _scalar(other))

    def __rtruediv__(self, other) -> "Jet":
        return self.inverse() * _scalar(other)

    def __pow__(self, exponent: int) -> "Jet":
        if not isinstance(exponent, int) or exponent < 0:
            raise JetError("jets support non-negative integer powers only")
        result = Jet.constant(1, self.dim, self.order)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def diff(self, k: int) -> "Jet":
        """Formal partial derivative with respect to variable ``k`` (0-based)."""
        if not 0 <= k < self.dim:
            raise JetError(f"variable index {k} out of range for dimension {self.dim}")
        parts: list[dict] = [{} for _ in range(self.order)]
        for d in range(1, self.order + 1):
            for a, c in self._parts[d].items():
                if a[k]:
                    b = a[:k] + (a[k] - 1,) + a[k + 1 :]
                    parts[d - 1][b] = c * a[k]
        return Jet._from_parts(self.dim, self.order - 1, parts)

    def inverse(self) -> "Jet":
        """Multiplicative inverse to the same truncation order."""
        if self.order < 0:
            raise JetError("cannot invert an empty jet")
        a0 = self.constant_term
        if a0 == 0:
            raise JetError("not invertible at origin: zero constant term")
        inv0 = 1 / a0
        parts: list[dict] = [{(0,) * self.dim: inv0}]
        for d in range(1, self.order + 1):
            acc: dict = {}
            for j in range(1, d + 1):
                pa, pb = self._parts[j], parts[d - j]
                for a, ca in pa.items():
                    for b, cb in pb.items():
                        key = tuple(x + y for x, y in zip(a, b))
                        acc[key] = acc.get(key, 0) + ca * cb
            parts.append({k: -v * inv0 for k, v in acc.items()})
        return Jet._from_parts(self.dim, self.order, parts)

    def eval(self, point: Sequence) -> Fraction:
        """Evaluate the stored truncation at ``point`` (exactly for rationals)."""
        if len(point) != self.dim:
            raise JetError(f"point has length {len(point)}, expected {self.dim}")
        total = 0
        for alpha, c in self.items():
            term = c
            for x, e in zip(point, alpha):
                if e:
                    term = term * x**e
            total = total + term
        return total

    # -- comparison / display ----------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Jet):
            if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
                other = Jet.constant(other, self.dim, max(self.order, 0))
            else:
                return NotImplemented
        return self.dim == other.dim and self.order == other.order and self._parts == other._parts

    def __hash__(self) -> int:
        return hash((self.dim, self.order, tuple(frozenset(p.items()) for p in self._parts)))

    def equal_to_order(self, other: "Jet", order: int | None = None) -> bool:
        """Coefficient-wise equality up to ``order`` (default: common order)."""
        order = min(self.order, other.order) if order is None else order
        return all(self.part(d) == other.part(d) for d in range(order + 1))

    def to_str(self, names: Sequence[str] | None = None) -> str:
        names = names or [f"q{i + 1}" for i in range(self.dim)]
        terms = []
        for alpha, c in self.items():
            mono = "*".join(
                (n if e == 1 else f"{n}^{e}") for n, e in zip(names, alpha) if e
            )
            mag = abs(c)
            cstr = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
            if mono:
                body = mono if mag == 1 else f"{cstr}*{mono}"
            else:
                body = cstr
            terms.append(("-" if c < 0 else "+", body))
        if not terms:
            return "0"
        out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self) -> str:
        return self.to_str()

    def __repr__(self) -> str:
        return f"Jet(dim={self.dim}, order={self.order}, {self.to_str()!r})"


# ---------------------------------------------------------------------------
# operation-style entry points


def jet_add(a: Jet, b: Jet) -> Jet:
    return a + b


def jet_mul(a: Jet, b: Jet) -> Jet:
    return a * b


def jet_diff(a: Jet, k: int) -> Jet:
    return a.diff(k)


def jet_invert_scalar(a: Jet) -> Jet:
    return a.inverse()


def jet_eval(a: Jet, point: Sequence) -> Fraction:
    return a.eval(point)


# ---------------------------------------------------------------------------
# matrices of jets

JetMatrix = list[list[Jet]]


def jet_matmul(a: Sequence[Sequence[Jet]], b: Sequence[Sequence[Jet]]) -> JetMatrix:
    out = []
    for i in range(len(a)):
        row = []
        for j in range(len(b[0])):
            acc = a[i][0] * b[0][j]
            for k in range(1, len(b)):
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out


def jet_matvec(a: Sequence[Sequence[Jet]], x: Sequence[Jet]) -> list[Jet]:
    out = []
    for row in a:
        acc = row[0] * x[0]
        for k in range(1, len(x)):
            acc = acc + row[k] * x[k]
        out.append(acc)
    return out


def jet_transpose(a: Sequence[Sequence[Jet]]) -> JetMatrix:
    return [list(col) for col in zip(*a)]


def jet_matrix_inverse(a: Sequence[Sequence[Jet]]) -> JetMatrix:
    """Gauss-Jordan inverse over jets.

    Pivots are chosen among entries with a nonzero constant term, so the
    matrix only needs to be invertible at the origin.
    """
    n = len(a)
    dim, order = a[0][0].dim, min(e.order for row in a for e in row)
    one = Jet.constant(1, dim, order)
    zero = Jet.zero(dim, order)
    work = [list(row) + [one if i == j else zero for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col].constant_term != 0), None)
        if piv is None:
            raise JetError("matrix is singular at the origin")
        work[col], work[piv] = work[piv], work[col]
        inv = work[col][col].inverse()
        work[col] = [e * inv for e in work[col]]
        for r in range(n):
            if r != col and not work[r][col].is_zero():
                f = work[r][col]
                work[r] = [e - f * w for e, w in zip(work[r], work[col])]
    return [row[n:] for row in work]


def constant_matrix(a: Sequence[Sequence[Jet]]) -> list[list[Fraction]]:
    return [[e.constant_term for e in row] for row in a]
