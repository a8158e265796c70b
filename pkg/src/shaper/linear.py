"""Linearization at the equilibrium, Kalman controllability and target design.

The origin-level shaping condition says that the closed-loop product
``G_cl#(0) Hess(V_cl)(0)`` must equal ``G#(0) (Hess(V_ol)(0) + u)`` where
``u`` only has actuated rows.  :func:`design_target` picks such a matrix
with a prescribed positive spectrum by exact pole placement.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exact
from .errors import ControllabilityError, InfeasibleTargetError
from .geometry import MechanicalSystem, hessian_at_origin

EIGVEC_COND_LIMIT = 1e8


@dataclass(frozen=True)
class Linearization:
    mass: list[list[Fraction]]
    stiffness: list[list[Fraction]]
    input_map: list[list[Fraction]]  # n x (n-1), columns e2..en
    state_matrix: list[list[Fraction]]  # 2n x 2n
    input_matrix: list[list[Fraction]]  # 2n x (n-1)

    @property
    def n(self) -> int:
        return len(self.mass)

    @property
    def open_loop_matrix(self) -> list[list[Fraction]]:
        """``G#(0) Hess(V_ol)(0)``."""
        return exact.matmul(exact.inverse(self.mass), self.stiffness)


@dataclass(frozen=True)
class SpectralCertificate:
    """Spectrum of a rational matrix, decided exactly where it matters."""

    matrix: list[list[Fraction]]
    eigenvalues: tuple[complex, ...]
    real_positive: bool
    diagonalizable: bool
    eigvec_cond: float
    charpoly: tuple[Fraction, ...]

    @property
    def ok(self) -> bool:
        return self.real_positive and self.diagonalizable and self.eigvec_cond < EIGVEC_COND_LIMIT


@dataclass(frozen=True)
class TargetMatrix:
    A: list[list[Fraction]]
    u_at_origin: list[list[Fraction]]  # G(0) A - Hess(V_ol)(0); zero first row
    spectrum: tuple[Fraction, ...] | None
    certificate: SpectralCertificate


def linearize(sys: MechanicalSystem) -> Linearization:
    n = sys.n
    M = sys.metric_at_origin
    K = hessian_at_origin(sys.potential)
    Minv = exact.inverse(M)
    E = [[Fraction(int(i == j + 1)) for j in range(n - 1)] for i in range(n)]
    MinvK = exact.matmul(Minv, K)
    MinvE = exact.matmul(Minv, E)
    state = exact.zeros(2 * n)
    for i in range(n):
        state[i][n + i] = Fraction(1)
        for j in range(n):
            state[n + i][j] = -MinvK[i][j]
    inp = [[Fraction(0)] * (n - 1) for _ in range(n)] + MinvE
    return Linearization(M, K, E, state, inp)


def kalman_controllable(lin: Linearization) -> tuple[bool, int]:
    """Exact rank of ``[B, AB, ..., A^(2n-1) B]``."""
    A, B = lin.state_matrix, lin.input_matrix
    N = len(A)
    if not B or not B[0]:
        return False, 0
    blocks = []
    cur = B
    for _ in range(N):
        blocks.append(cur)
        cur = exact.matmul(A, cur)
    ctrb = [sum((blk[i] for blk in blocks), []) for i in range(N)]
    r = exact.rank(exact.transpose(ctrb))
    return r == N, r


# ---------------------------------------------------------------------------
# spectral certificate


def spectral_certificate(matrix: Sequence[Sequence[Fraction]]) -> SpectralCertificate:
    """Exact real/positive/diagonalizable test plus float diagnostics.

    Positivity and reality come from real-root isolation of the exact
    characteristic polynomial; diagonalizability from checking that its
    square-free part annihilates the matrix.
    """
    import sympy

    mat = [list(map(Fraction, row)) for row in matrix]
    n = len(mat)
    sm = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in mat])
    lam = sympy.Symbol("lam")
    p = sm.charpoly(lam)
    roots = sympy.real_roots(p.as_expr(), lam) if n else []
    real_positive = len(roots) == n and all(r.is_positive for r in roots)
    sqf = sympy.Poly(sympy.sqf_part(p.as_expr()), lam)
    # evaluate the square-free part at the matrix by Horner's rule
    acc = exact.zeros(n)
    for c in sqf.all_coeffs():
        acc = exact.matmul(acc, mat)
        for i in range(n):
            acc[i][i] += Fraction(int(c.p), int(c.q))
    diagonalizable = all(v == 0 for row in acc for v in row)
    fm = exact.to_float(mat)
    w, V = np.linalg.eig(fm)
    order = np.argsort(-w.real)
    w = w[order]
    cond = float(np.linalg.cond(V)) if diagonalizable else float("inf")
    coeffs = tuple(Fraction(int(c.p), int(c.q)) for c in p.all_coeffs())
    return SpectralCertificate(mat, tuple(complex(x) for x in w), real_positive, diagonalizable, cond, coeffs)


# ---------------------------------------------------------------------------
# target design by exact pole placement


def _poly_from_roots(roots: Sequence[Fraction]) -> list[Fraction]:
    coeffs = [Fraction(1)]
    for r in roots:
        nxt = coeffs + [Fraction(0)]
        for i, c in enumerate(coeffs):
            nxt[i + 1] -= r * c
        coeffs = nxt
    return coeffs  # highest degree first


def _poly_at_matrix(coeffs: Sequence[Fraction], A) -> list[list[Fraction]]:
    n = len(A)
    acc = exact.zeros(n)
    for c in coeffs:
        acc = exact.matmul(acc, A)
        for i in range(n):
            acc[i][i] += c
    return acc


def _ackermann(A, b, roots) -> list[Fraction] | None:
    """Gain row ``k`` giving A - b k the spectrum ``roots``, or None if (A, b) is not controllable."""
    n = len(A)
    cols = [b]
    for _ in range(n - 1):
        cols.append(exact.matvec(A, cols[-1]))
    C = exact.transpose(cols)
    if exact.det(C) == 0:
        return None
    Cinv = exact.inverse(C)
    pA = _poly_at_matrix(_poly_from_roots(roots), A)
    return exact.matmul([Cinv[-1]], pA)[0]


def _candidate_weights(m: int):
    for j in range(m):
        yield [Fraction(int(i == j)) for i in range(m)]
    yield [Fraction(1)] * m
    for j in range(m):
        yield [Fraction(i + 1 if i != j else -1) for i in range(m)]


def default_spectrum(n: int) -> tuple[Fraction, ...]:
    """All-ones spectrum spread to distinct values inside (1/2, 3/2)."""
    return tuple(Fraction(1, 2) + Fraction(k + 1, n + 1) for k in range(n))


def design_target(lin: Linearization, spectrum: Sequence | None = None) -> TargetMatrix:
    """Choose ``A = G#(0)(Hess(V_ol)(0) + u)`` with the requested spectrum.

    Only the actuated rows of ``u`` are free, so the first row of
    ``G(0) A`` always equals the first row of ``Hess(V_ol)(0)``.
    """
    n = lin.n
    ok, r = kalman_controllable(lin)
    if not ok:
        raise ControllabilityError(f"linearization is not controllable (Kalman rank {r} < {2 * n})")
    roots = tuple(exact.to_fraction(s) for s in (spectrum if spectrum is not None else default_spectrum(n)))
    if len(roots) != n:
        raise InfeasibleTargetError(f"spectrum request has {len(roots)} values, expected {n}")
    if any(s <= 0 for s in roots):
        raise InfeasibleTargetError("requested eigenvalues must be positive")
    Minv = exact.inverse(lin.mass)
    A0 = exact.matmul(Minv, lin.stiffness)
    E = exact.matmul(Minv, lin.input_map)  # n x (n-1)
    m = n - 1
    # cyclicity fix-ups for the multi-input case: try F0 = 0 first
    for shift in range(4):
        F0 = [[Fraction(((i + 2) * (j + 3) * shift) % 5 - 2) for j in range(n)] for i in range(m)] if shift else None
        A1 = A0 if F0 is None else [[A0[i][j] + sum(E[i][k] * F0[k][j] for k in range(m)) for j in range(n)] for i in range(n)]
        for w in _candidate_weights(m):
            b = exact.matvec(E, w)
            k = _ackermann(A1, b, roots)
            if k is None:
                continue
            F = [[-w[i] * k[j] for j in range(n)] for i in range(m)]
            if F0 is not None:
                F = [[F[i][j] + F0[i][j] for j in range(n)] for i in range(m)]
            A = [[A0[i][j] + sum(E[i][kk] * F[kk][j] for kk in range(m)) for j in range(n)] for i in range(n)]
            U = exact.matmul(lin.mass, A)
            U = [[U[i][j] - lin.stiffness[i][j] for j in range(n)] for i in range(n)]
            assert all(v == 0 for v in U[0]), "unactuated row changed"
            return TargetMatrix(A, U, roots, spectral_certificate(A))
    raise InfeasibleTargetError("pole placement failed for every single-input reduction")


def check_target(lin: Linearization, A: Sequence[Sequence]) -> TargetMatrix:
    """Wrap a user-supplied target, checking the unactuated-row constraint."""
    n = lin.n
    A = exact.frac_matrix(A)
    U = exact.matmul(lin.mass, A)
    U = [[U[i][j] - lin.stiffness[i][j] for j in range(n)] for i in range(n)]
    if any(U[0]):
        raise InfeasibleTargetError(
            "target changes the unactuated row: first row of G(0) A must equal the first row of Hess(V_ol)(0)"
        )
    return TargetMatrix(A, U, None, spectral_certificate(A))
