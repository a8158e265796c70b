"""The lambda-equation for one degree of underactuation, solved formally.

Conventions
-----------
``lambda`` is the (1,1)-tensor with ``G_ol = G_cl . lambda`` (as flat maps).
It is stored as the matrix ``L`` of the linear map ``v -> lambda(v)``, so
``L[j][i]`` is the component ``lambda_i^j`` and column 0 of ``L`` is
``lambda(d/dq1) = (lambda_1^1, ..., lambda_1^n)``.  With this convention
``G_cl# = L G#`` and ``G_ol G_cl# = L^T``.

Only column 0 enters the lambda-equation

    sum_i G_1i d_k lambda_1^i + sum_{j>=2} c_kj lambda_1^j = 0,
    c_kj = sum_i (S^i_kj G_i1 - S^i_k1 G_ij),

which is solved order by order in the Taylor coefficients.  The remaining
columns follow from the closed-loop metric, which is found by a second
linear solve (:func:`formal_closed_loop_metric`).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import exact
from .errors import (
    DegenerateCandidateError,
    FactorizationError,
    InconsistentSystemError,
    JetError,
    ValidationError,
)
from .exact import InconsistentEquation, LinearSystem
from .geometry import MechanicalSystem, first_kind, levi_civita
from .jets import Jet, JetMatrix, constant_matrix, jet_matmul, jet_matrix_inverse, jet_transpose, monomials

Coefficient = tuple[int, tuple[int, ...]]  # (component j, exponent alpha)

_LETTERS = "CDEFGHIJKLMNOPQRSTUVWXYZ"


def coefficient_name(j: int, alpha: Sequence[int]) -> str:
    """Human name of the Taylor coefficient of ``lambda_1^(j+1)`` at ``q^alpha``.

    Components are lettered C, D, E, ... and the exponents follow as digits,
    so ``C11`` is the ``q1 q2`` coefficient of ``lambda_1^1``.
    """
    digits = "".join(str(e) for e in alpha) if all(e < 10 for e in alpha) else ",".join(map(str, alpha))
    return f"{_LETTERS[j]}{digits}"


def _accumulate(rows, key, jet: Jet, shift, factor, col, maxdeg):
    """rows[(key, beta)][col] += factor * coeff(jet, gamma) for beta = gamma + shift."""
    if not factor:
        return
    sdeg = sum(shift)
    for gamma, c in jet.items():
        if sum(gamma) + sdeg > maxdeg:
            continue
        beta = tuple(a + b for a, b in zip(gamma, shift))
        row = rows[(key, beta)]
        row[col] = row.get(col, 0) + factor * c


def _solve(system_cols: int, rows, pins: Mapping[int, Fraction], module: str, describe) -> LinearSystem:
    """Add pins, then equations in increasing degree; report the first conflict."""
    system = LinearSystem(system_cols)
    for col, val in pins.items():
        try:
            system.add({col: Fraction(1)}, Fraction(val), tag=("pin", col))
        except InconsistentEquation as exc:  # pragma: no cover - pins are independent
            raise InconsistentSystemError("conflicting pins", order=0, row=str(exc.tag), module=module)
    for (key, beta), row in sorted(rows.items(), key=lambda kv: (sum(kv[0][1]), kv[0][0], tuple(-e for e in kv[0][1]))):
        coeffs = {c: v for c, v in row.items() if c != "rhs" and v}
        rhs = -row.get("rhs", 0)
        try:
            system.add(coeffs, rhs, tag=(key, beta))
        except InconsistentEquation:
            raise InconsistentSystemError(
                f"inconsistent linear system at order {sum(beta)}: {describe(key, beta)}",
                order=sum(beta),
                row=describe(key, beta),
                module=module,
            ) from None
    return system


# ---------------------------------------------------------------------------
# constant solutions: the kernel of Phi_G restricted to the adapted pattern


def phi_G_kernel_basis(G0: Sequence[Sequence]) -> list[list[list[Fraction]]]:
    """Basis of ``{L : L e1 in span(e1), L G0^-1 symmetric}``.

    Returns matrices in the ``L[j][i] = lambda_i^j`` convention; the length of
    the list is the kernel dimension, ``n(n-1)/2 + 1``.
    """
    G0 = exact.frac_matrix(G0)
    n = len(G0)
    try:
        Ginv = exact.inverse(G0)
    except ZeroDivisionError:
        raise ValidationError("degenerate G0: the kernel is only defined for nondegenerate metrics") from None
    # unknowns: L[0][0] and every L[j][i] with i >= 1
    cells = [(0, 0)] + [(j, i) for i in range(1, n) for j in range(n)]
    index = {cell: c for c, cell in enumerate(cells)}
    system = LinearSystem(len(cells))
    for a in range(n):
        for b in range(a + 1, n):
            # (L Ginv)[a][b] - (L Ginv)[b][a] = 0
            row: dict[int, Fraction] = defaultdict(Fraction)
            for m in range(n):
                if (a, m) in index:
                    row[index[(a, m)]] += Ginv[m][b]
                if (b, m) in index:
                    row[index[(b, m)]] -= Ginv[m][a]
            system.add(dict(row))
    basis = []
    for vec in system.nullspace():
        L = exact.zeros(n)
        for (j, i), c in index.items():
            L[j][i] = vec[c]
        basis.append(L)
    return basis


def lambda_coefficients(sys: MechanicalSystem) -> list[list[Jet]]:
    """``c[k][j] = sum_i (S^i_kj G_i1 - S^i_k1 G_ij)``, the undifferentiated terms."""
    n, S, G = sys.n, sys.christoffel, sys.metric
    out = []
    for k in range(n):
        row = []
        for j in range(n):
            acc = Jet.zero(n, sys.order - 1)
            if j:
                for i in range(n):
                    acc = acc + S[i, k, j] * G[i][0] - S[i, k, 0] * G[i][j]
            row.append(acc)
        out.append(row)
    return out


def constant_lambda_residual(sys: MechanicalSystem, lam0: Sequence[Sequence]) -> list[Jet]:
    """Residual of the lambda-equation for a constant ``lambda`` (one jet per k).

    ``lam0`` is a constant matrix in the ``L[j][i] = lambda_i^j`` convention;
    only its first column matters.
    """
    n = sys.n
    col = [exact.to_fraction(lam0[j][0]) for j in range(n)]
    c = lambda_coefficients(sys)
    out = []
    for k in range(n):
        acc = Jet.zero(n, sys.order - 1)
        for j in range(1, n):
            acc = acc + c[k][j].scale(col[j])
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# formal solution of the lambda-equation


@dataclass
class SolutionSpaceReport:
    """Forced and free Taylor coefficients of ``lambda_1^1, ..., lambda_1^n``.

    ``forced`` maps coefficients to the value they take in every solution;
    everything else is free (possibly tied to other free coefficients by
    ``relations``).  All conclusions hold for equations up to degree
    ``order - 1``, i.e. for a solve at truncation order ``order``.
    """

    n: int
    order: int
    forced: dict[Coefficient, Fraction]
    free: list[Coefficient]
    relations: list[str]
    origin_tail_basis: list[list[Fraction]]
    _system: LinearSystem = field(repr=False)
    _unknowns: list[Coefficient] = field(repr=False)

    def by_degree(self) -> list[tuple[int, list[tuple[Coefficient, Fraction]], list[Coefficient]]]:
        out = []
        for d in range(self.order + 1):
            forced = [(c, v) for c, v in self.forced.items() if sum(c[1]) == d]
            free = [c for c in self.free if sum(c[1]) == d]
            out.append((d, sorted(forced, key=lambda cv: self._unknowns.index(cv[0])), free))
        return out

    @property
    def parameters(self) -> list[Coefficient]:
        """Free coefficients that can be pinned independently of each other."""
        return [self._unknowns[c] for c in self._system.free_columns()]

    def is_forced(self, j: int, alpha: Sequence[int]) -> bool:
        return (j, tuple(alpha)) in self.forced

    def origin_tail_free(self) -> bool:
        """True when some ``lambda_1^j(0)``, j >= 2, can be nonzero."""
        return bool(self.origin_tail_basis)

    def ledger_lines(self) -> list[str]:
        lines = []
        for d, forced, free in self.by_degree():
            for (j, alpha), v in forced:
                lines.append(f"{coefficient_name(j, alpha)} = {exact.fmt(v)} (forced)")
            for j, alpha in free:
                lines.append(f"{coefficient_name(j, alpha)} free")
        return lines


def _lambda_rows(sys: MechanicalSystem, order: int):
    n = sys.n
    unknowns: list[Coefficient] = []
    for alpha in monomials(n, order):
        for j in range(n):
            unknowns.append((j, alpha))
    # column order: by degree, then component
    unknowns.sort(key=lambda u: (sum(u[1]), u[0]))
    col = {u: c for c, u in enumerate(unknowns)}
    sys = sys.at_order(order)
    G = sys.metric
    coeff = lambda_coefficients(sys)
    rows: dict = defaultdict(dict)
    maxdeg = order - 1
    for (j, alpha), c in col.items():
        for k in range(n):
            if alpha[k]:
                shift = alpha[:k] + (alpha[k] - 1,) + alpha[k + 1 :]
                _accumulate(rows, k, G[0][j], shift, Fraction(alpha[k]), c, maxdeg)
            if j:
                _accumulate(rows, k, coeff[k][j], alpha, Fraction(1), c, maxdeg)
    return unknowns, col, rows


def _describe_lambda(key, beta):
    mono = "*".join(f"q{i + 1}^{e}" if e > 1 else f"q{i + 1}" for i, e in enumerate(beta) if e) or "1"
    return f"coefficient of {mono} in equation k={key + 1}"


def formal_lambda_solve(sys: MechanicalSystem, order: int | None = None) -> SolutionSpaceReport:
    """Solve the lambda-equation order by order and classify coefficients."""
    order = sys.order if order is None else order
    if order < 1:
        raise ValidationError("order must be at least 1")
    unknowns, col, rows = _lambda_rows(sys, order)
    system = _solve(len(unknowns), rows, {}, "lambda_solver", _describe_lambda)
    forced_cols = system.forced()
    forced = {unknowns[c]: v for c, v in forced_cols.items()}
    free = [u for u in unknowns if u not in forced]
    relations = []
    for c in system.pivots:
        if c in forced_cols:
            continue
        rhs, rel = system.relation(c)
        terms = " ".join(
            f"{'-' if v > 0 else '+'} {exact.fmt(abs(v))}*{coefficient_name(*unknowns[f])}" for f, v in sorted(rel.items())
        )
        relations.append(f"{coefficient_name(*unknowns[c])} = {exact.fmt(rhs)} {terms}")
    n = sys.n
    zero = (0,) * n
    tail_cols = [col[(j, zero)] for j in range(1, n)]
    tails = [[vec[c] for c in tail_cols] for vec in system.nullspace()]
    basis_sys = LinearSystem(n - 1)
    for t in tails:
        basis_sys.add({i: v for i, v in enumerate(t) if v})
    tail_basis = [[row.get(i, Fraction(0)) for i in range(n - 1)] for row, _ in basis_sys.rows()]
    return SolutionSpaceReport(n, order, forced, free, relations, tail_basis, system, unknowns)


def lambda_column(
    sys: MechanicalSystem,
    pins: Mapping[Coefficient, object] | None = None,
    order: int | None = None,
) -> list[Jet]:
    """A solution ``(lambda_1^1, ..., lambda_1^n)`` as jets.

    ``pins`` fixes chosen Taylor coefficients; ``lambda_1^1(0)`` defaults to 1
    and every other free coefficient to zero.
    """
    order = sys.order if order is None else order
    n = sys.n
    pins = {(j, tuple(a)): exact.to_fraction(v) for (j, a), v in (pins or {}).items()}
    pins.setdefault((0, (0,) * n), Fraction(1))
    unknowns, col, rows = _lambda_rows(sys, order)
    for key in pins:
        if key not in col:
            raise ValidationError(f"cannot pin {key}: beyond truncation order {order}")
    system = _solve(len(unknowns), rows, {col[k]: v for k, v in pins.items()}, "lambda_solver", _describe_lambda)
    x = system.solution()
    coeffs: list[dict] = [dict() for _ in range(n)]
    for (j, alpha), c in col.items():
        if x[c]:
            coeffs[j][alpha] = x[c]
    return [Jet(n, order, coeffs[j]) for j in range(n)]


# ---------------------------------------------------------------------------
# closed-loop metric and the full lambda


@dataclass(frozen=True, eq=False)
class LambdaField:
    """``lambda`` as a matrix of jets, ``matrix[j][i] = lambda_i^j``."""

    matrix: tuple[tuple[Jet, ...], ...]

    @property
    def n(self) -> int:
        return len(self.matrix)

    @property
    def column(self) -> list[Jet]:
        """``lambda(d/dq1)``: the components ``lambda_1^1, ..., lambda_1^n``."""
        return [self.matrix[j][0] for j in range(self.n)]

    def component(self, i: int, j: int) -> Jet:
        """``lambda_i^j`` with 0-based indices."""
        return self.matrix[j][i]

    @property
    def at_origin(self) -> list[list[Fraction]]:
        return constant_matrix(self.matrix)

    def lambda_sharp(self, sys: MechanicalSystem) -> JetMatrix:
        """``lambda o G#`` which must be symmetric (it is ``G_cl#``)."""
        return jet_matmul(self.matrix, sys.inverse_metric)

    def is_symmetric_pattern(self, sys: MechanicalSystem) -> bool:
        M = self.lambda_sharp(sys)
        n = self.n
        return all(M[a][b] == M[b][a] for a in range(n) for b in range(a + 1, n))

    @classmethod
    def identity(cls, n: int, order: int) -> "LambdaField":
        one, zero = Jet.constant(1, n, order), Jet.zero(n, order)
        return cls(tuple(tuple(one if i == j else zero for i in range(n)) for j in range(n)))


def _describe_metric(key, beta):
    kind, idx = key
    mono = "*".join(f"q{i + 1}^{e}" if e > 1 else f"q{i + 1}" for i, e in enumerate(beta) if e) or "1"
    if kind == "factor":
        return f"coefficient of {mono} in (G_cl lambda e1 - G e1)_{idx + 1}"
    j, k = idx
    return f"coefficient of {mono} in the kinetic equation ({j + 1},{k + 1})"


def formal_closed_loop_metric(
    sys: MechanicalSystem,
    column: Sequence[Jet],
    origin_metric: Sequence[Sequence] | None = None,
    pins: Mapping[tuple[int, int, tuple[int, ...]], object] | None = None,
) -> JetMatrix:
    """Closed-loop metric jets compatible with the lambda column.

    Solves, as one exact linear system in the Taylor coefficients of the
    symmetric matrix ``G_cl``,

    * ``G_cl X = G e1`` with ``X`` the lambda column (so ``lambda e1 = X``),
    * ``sum_l X^l [jk, l]_cl = [jk, 1]_ol``, the kinetic shaping equation
      written through first-kind Christoffel symbols.

    ``origin_metric`` pins ``G_cl(0)``; other free coefficients are zero.
    """
    n, order = sys.n, sys.order
    X = [x.truncate(order) if x.order > order else x for x in column]
    if any(x.order < order for x in X):
        raise ValidationError("lambda column is known to lower order than the system")
    cells = [(a, b) for a in range(n) for b in range(a, n)]
    unknowns = [(a, b, alpha) for alpha in monomials(n, order) for (a, b) in cells]
    col = {u: c for c, u in enumerate(unknowns)}
    rows: dict = defaultdict(dict)
    G = sys.metric
    fk_ol = first_kind(G)
    half = Fraction(1, 2)
    for (a, b, alpha), c in col.items():
        # factorization: sum_y G_cl[x][y] X^y = G[x][0]
        _accumulate(rows, ("factor", a), X[b], alpha, Fraction(1), c, order)
        if a != b:
            _accumulate(rows, ("factor", b), X[a], alpha, Fraction(1), c, order)
        # kinetic: sum_l X^l * 1/2 (d_j Gcl[l][k] + d_k Gcl[l][j] - d_l Gcl[j][k])
        pair = {a, b}
        for j in range(n):
            for k in range(j, n):
                for l in range(n):
                    for m, other, sign in ((j, k, 1), (k, j, 1)):
                        # d_m Gcl[l][other]
                        if {l, other} == pair and alpha[m]:
                            shift = alpha[:m] + (alpha[m] - 1,) + alpha[m + 1 :]
                            _accumulate(rows, ("kin", (j, k)), X[l], shift, sign * half * alpha[m], c, order - 1)
                    if {j, k} == pair and alpha[l]:
                        shift = alpha[:l] + (alpha[l] - 1,) + alpha[l + 1 :]
                        _accumulate(rows, ("kin", (j, k)), X[l], shift, -half * alpha[l], c, order - 1)
    for x in range(n):
        for beta, v in G[x][0].items():
            rows[(("factor", x), beta)]["rhs"] = rows[(("factor", x), beta)].get("rhs", 0) - v
    for j in range(n):
        for k in range(j, n):
            for beta, v in fk_ol[0][j][k].items():
                if sum(beta) <= order - 1:
                    key = (("kin", (j, k)), beta)
                    rows[key]["rhs"] = rows[key].get("rhs", 0) - v
    pin_cols: dict[int, Fraction] = {}
    zero = (0,) * n
    if origin_metric is not None:
        N = exact.frac_matrix(origin_metric)
        for a, b in cells:
            pin_cols[col[(a, b, zero)]] = N[a][b]
    for (a, b, alpha), v in (pins or {}).items():
        a, b = min(a, b), max(a, b)
        pin_cols[col[(a, b, tuple(alpha))]] = exact.to_fraction(v)
    system = _solve(len(unknowns), rows, pin_cols, "lambda_solver", _describe_metric)
    x = system.solution()
    entries: dict = {cell: {} for cell in cells}
    for (a, b, alpha), c in col.items():
        if x[c]:
            entries[(a, b)][alpha] = x[c]
    out = [[None] * n for _ in range(n)]
    for a, b in cells:
        out[a][b] = out[b][a] = Jet(n, order, entries[(a, b)])
    return out


def closed_loop_metric_from_lambda(sys: MechanicalSystem, lam: LambdaField) -> JetMatrix:
    """``G_cl = G L^-1`` (flat maps), i.e. ``G_cl# = L G#``."""
    L0 = lam.at_origin
    if exact.det(L0) == 0:
        raise DegenerateCandidateError("degenerate candidate: lambda(q0) is singular")
    Linv = jet_matrix_inverse(lam.matrix)
    return jet_matmul(sys.metric, Linv)


def lambda_from_metric(sys: MechanicalSystem, G_cl: Sequence[Sequence[Jet]]) -> LambdaField:
    """``L = G_cl^-1 G`` so that ``G = G_cl L``."""
    try:
        inv = jet_matrix_inverse(G_cl)
    except JetError:
        raise DegenerateCandidateError("degenerate candidate: closed-loop metric is singular at the origin") from None
    L = jet_matmul(inv, sys.metric)
    return LambdaField(tuple(tuple(row) for row in L))


# ---------------------------------------------------------------------------
# residuals of the lambda-method conditions


@dataclass
class LambdaResiduals:
    """Frame components of the three conditions (all-zero means satisfied).

    ``cond_2a[k]``   = (nabla_k (G lambda))(d1, d1)
    ``cond_2b[j][k]``= polarized  nabla_{lambda d1} G_cl + 2 G_cl(nabla lambda d1, .) - 2 G(nabla d1, .)
    ``kinetic[j][k]``= P(nabla^cl_{dj} dk - nabla^ol_{dj} dk)
    """

    cond_2a: list[Jet]
    cond_2b: list[list[Jet]]
    kinetic: list[list[Jet]]

    @staticmethod
    def _zero(items) -> bool:
        return all(j.is_zero() for j in items)

    def vanish_2a(self) -> bool:
        return self._zero(self.cond_2a)

    def vanish_2b(self) -> bool:
        return self._zero(e for row in self.cond_2b for e in row)

    def vanish_kinetic(self) -> bool:
        return self._zero(e for row in self.kinetic for e in row)


def lambda_method_residuals(
    sys: MechanicalSystem, G_cl: Sequence[Sequence[Jet]], lam: LambdaField
) -> LambdaResiduals:
    n = sys.n
    G = sys.metric
    L = [list(r) for r in lam.matrix]
    prod = jet_matmul(G_cl, L)
    for a in range(n):
        for b in range(n):
            if not prod[a][b].equal_to_order(G[a][b], min(prod[a][b].order, G[a][b].order)):
                raise FactorizationError(
                    f"factorization G_ol = G_cl . lambda fails at entry ({a + 1},{b + 1})"
                )
    S = sys.christoffel
    # condition 2(a): T = L^T G, T[a][b] = G(lambda d_a, d_b)
    T = jet_matmul(jet_transpose(L), [list(r) for r in G])
    cond_2a = []
    for k in range(n):
        r = T[0][0].diff(k)
        for s in range(n):
            r = r - S[s, k, 0] * T[s][0] - S[s, k, 0] * T[0][s]
        cond_2a.append(r)
    # condition 2(b)
    X = lam.column
    dX = [[X[s].diff(j) for s in range(n)] for j in range(n)]
    nabla_X = [[dX[j][s] + sum((S[s, j, m] * X[m] for m in range(1, n)), S[s, j, 0] * X[0]) for s in range(n)] for j in range(n)]
    fk_ol = first_kind(G)
    cond_2b = [[None] * n for _ in range(n)]
    for j in range(n):
        for k in range(j, n):
            acc = None
            for m in range(n):
                t = G_cl[j][k].diff(m)
                for s in range(n):
                    t = t - S[s, m, j] * G_cl[s][k] - S[s, m, k] * G_cl[j][s]
                t = X[m] * t
                acc = t if acc is None else acc + t
            for s in range(n):
                acc = acc + G_cl[s][k] * nabla_X[j][s] + G_cl[s][j] * nabla_X[k][s]
            acc = acc - fk_ol[k][j][0] - fk_ol[j][k][0]
            cond_2b[j][k] = cond_2b[k][j] = acc
    # kinetic shaping PDE through the G-orthogonal projection onto span(d1)
    S_cl = levi_civita(G_cl)
    inv11 = G[0][0].inverse()
    kinetic = [[None] * n for _ in range(n)]
    for j in range(n):
        for k in range(j, n):
            acc = None
            for r in range(n):
                t = G[0][r] * (S_cl[r, j, k] - S[r, j, k])
                acc = t if acc is None else acc + t
            kinetic[j][k] = kinetic[k][j] = acc * inv11
    return LambdaResiduals(cond_2a, cond_2b, kinetic)
