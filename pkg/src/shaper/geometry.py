"""Open-loop mechanical control systems and their Riemannian data as jets.

Systems are given in adapted coordinates: the equilibrium is the origin and
the control codistribution is spanned by ``dq2, ..., dqn``, so ``q1`` is the
single unactuated direction.  Indices in the API are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from . import exact
from .errors import JetError, ValidationError
from .jets import Jet, JetMatrix, constant_matrix, jet_matrix_inverse
from .numeric import MechanicalEvaluator

DEFAULT_ORDER = 4


@dataclass(frozen=True, eq=False)
class ChristoffelField:
    """Levi-Civita coefficients ``coeffs[i][j][k]`` = S^i_{jk}."""

    coeffs: tuple[tuple[tuple[Jet, ...], ...], ...]

    def __getitem__(self, idx: tuple[int, int, int]) -> Jet:
        i, j, k = idx
        return self.coeffs[i][j][k]

    @property
    def n(self) -> int:
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return all(c.is_zero() for a in self.coeffs for b in a for c in b)

    def metricity_residual(self, metric: Sequence[Sequence[Jet]]) -> list[list[list[Jet]]]:
        """``d_k G_ij - S^l_{ki} G_lj - S^l_{kj} G_il`` for every (k, i, j)."""
        n = self.n
        out = []
        for k in range(n):
            block = []
            for i in range(n):
                row = []
                for j in range(n):
                    r = metric[i][j].diff(k)
                    for l in range(n):
                        r = r - self.coeffs[l][k][i] * metric[l][j] - self.coeffs[l][k][j] * metric[i][l]
                    row.append(r)
                block.append(row)
            out.append(block)
        return out


def first_kind(metric: Sequence[Sequence[Jet]]) -> list[list[list[Jet]]]:
    """Christoffel symbols of the first kind, ``out[l][j][k]`` = [jk, l]."""
    n = len(metric)
    d = [[[metric[a][b].diff(k) for k in range(n)] for b in range(n)] for a in range(n)]
    out = []
    for l in range(n):
        block = []
        for j in range(n):
            row = []
            for k in range(n):
                if k < j:
                    row.append(block[k][j])
                    continue
                row.append((d[l][k][j] + d[l][j][k] - d[j][k][l]).scale(Fraction(1, 2)))
            block.append(row)
        out.append(block)
    return out


def levi_civita(metric: Sequence[Sequence[Jet]], inverse: Sequence[Sequence[Jet]] | None = None) -> ChristoffelField:
    """Christoffel symbols of an arbitrary (possibly indefinite) metric."""
    n = len(metric)
    inv = inverse if inverse is not None else jet_matrix_inverse(metric)
    fk = first_kind(metric)
    coeffs = []
    for i in range(n):
        block = []
        for j in range(n):
            row = []
            for k in range(n):
                if k < j:
                    row.append(block[k][j])
                    continue
                acc = inv[i][0] * fk[0][j][k]
                for l in range(1, n):
                    acc = acc + inv[i][l] * fk[l][j][k]
                row.append(acc)
            block.append(tuple(row))
        coeffs.append(tuple(block))
    return ChristoffelField(tuple(coeffs))


@dataclass(frozen=True, eq=False)
class MechanicalSystem:
    """Metric ``G``, potential ``V_ol`` and the adapted control convention.

    ``metric`` is an n-by-n matrix of jets, ``potential`` a jet, both at
    truncation order ``order``.  The actuated codistribution is always
    ``span{dq2, ..., dqn}``.
    """

    metric: tuple[tuple[Jet, ...], ...]
    potential: Jet
    order: int = DEFAULT_ORDER
    notices: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        metric = tuple(tuple(row) for row in self.metric)
        object.__setattr__(self, "metric", metric)
        notices = list(self.notices)
        n = len(metric)
        if n < 2:
            raise ValidationError("need n >= 2: one unactuated plus at least one actuated direction")
        if any(len(row) != n for row in metric):
            raise ValidationError("metric must be a square matrix")
        if self.order < 2:
            raise ValidationError("truncation order must be at least 2 (Hessians are needed)")
        for i in range(n):
            for j in range(n):
                e = metric[i][j]
                if e.dim != n or self.potential.dim != n:
                    raise ValidationError(f"entry ({i + 1},{j + 1}) has dimension {e.dim}, expected {n}")
        for i in range(n):
            for j in range(i + 1, n):
                if not metric[i][j].equal_to_order(metric[j][i], self.order):
                    raise ValidationError(
                        f"metric is not symmetric: entries ({i + 1},{j + 1}) and ({j + 1},{i + 1}) differ",
                        entry=(i + 1, j + 1),
                    )
        G0 = constant_matrix(metric)
        if not exact.is_positive_definite(G0):
            raise ValidationError("metric at the origin is not positive-definite")
        dV0 = [self.potential.diff(k).constant_term for k in range(n)]
        if dV0[0] != 0:
            raise ValidationError(
                f"origin is not a controlled equilibrium: dV/dq1(0) = {exact.fmt(dV0[0])} must vanish",
                gradient=dV0,
            )
        if any(dV0[1:]):
            notices.append(
                "actuated gradient at the origin is nonzero ("
                + ", ".join(f"dV/dq{k + 1} = {exact.fmt(c)}" for k, c in enumerate(dV0) if k and c)
                + "); it is cancelled by the feedback"
            )
        object.__setattr__(self, "notices", tuple(notices))

    @classmethod
    def from_jets(cls, metric, potential: Jet, order: int | None = None, notices=()) -> "MechanicalSystem":
        """Build a system, re-reading polynomial inputs at ``order``."""
        order = potential.order if order is None else order
        metric = [[e.with_order(order) for e in row] for row in metric]
        return cls(metric, potential.with_order(order), order, tuple(notices))

    @property
    def n(self) -> int:
        return len(self.metric)

    def at_order(self, order: int) -> "MechanicalSystem":
        """The same polynomial data re-read at another truncation order."""
        if order == self.order:
            return self
        return MechanicalSystem.from_jets(self.metric, self.potential, order, self.notices)

    @cached_property
    def metric_at_origin(self) -> list[list[Fraction]]:
        return constant_matrix(self.metric)

    @cached_property
    def inverse_metric(self) -> JetMatrix:
        return jet_matrix_inverse(self.metric)

    @cached_property
    def christoffel(self) -> ChristoffelField:
        return levi_civita(self.metric, self.inverse_metric)

    @cached_property
    def evaluator(self) -> MechanicalEvaluator:
        return MechanicalEvaluator(self.metric, self.potential)


# ---------------------------------------------------------------------------
# operations


def metric_inverse(sys: MechanicalSystem) -> JetMatrix:
    try:
        return [list(row) for row in sys.inverse_metric]
    except JetError as exc:
        raise ValidationError(f"metric is singular at the origin: {exc.message}") from exc


def christoffel(sys: MechanicalSystem) -> ChristoffelField:
    return sys.christoffel


def hessian_at_origin(f: Jet) -> list[list[Fraction]]:
    """Matrix of second partial derivatives at the origin (exact)."""
    n = f.dim
    H = exact.zeros(n)
    for i in range(n):
        for j in range(i, n):
            alpha = [0] * n
            alpha[i] += 1
            alpha[j] += 1
            c = f.coeff(alpha) if f.order >= 2 else Fraction(0)
            H[i][j] = H[j][i] = 2 * c if i == j else c
    return H


def geodesic_spray_rhs(sys: MechanicalSystem, q, v, force=None) -> np.ndarray:
    """Acceleration of the forced system ``nabla_v v = -G#dV + G#force``."""
    return sys.evaluator.acceleration(q, v, force)
