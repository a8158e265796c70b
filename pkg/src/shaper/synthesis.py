"""Energy-shaping synthesis for one degree of underactuation.

The pipeline picks the origin data first (``lambda(d1)(0)``, ``G_cl#(0)``
and ``Hess(V_cl)(0)``), then extends it to jets: the lambda column from the
lambda-equation, the closed-loop metric from the kinetic equations and the
closed-loop potential from the potential-shaping PDE.  The feedback follows
from the two metrics and potentials.

Origin relations used throughout (``l = lambda(d1)(0)``, ``g1``/``h0`` the
first rows of ``G(0)`` and ``Hess(V_ol)(0)``, ``M = G_cl#(0)``,
``H = Hess(V_cl)(0)``)::

    M g1 = l          (metric factorization at the origin)
    H l  = h0         (potential PDE differentiated at the origin)

so ``g1.l = g1^T M g1`` and ``h0.l = l^T H l``.  Both must be positive for a
positive-definite pair, and conversely any admissible ``l`` with both
positive yields one.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import exact
from .errors import (
    DegenerateCandidateError,
    InconsistentSystemError,
    InfeasibleTargetError,
    SynthesisError,
)
from .exact import LinearSystem, fmt
from .geometry import MechanicalSystem, first_kind, hessian_at_origin
from .jets import Jet, constant_matrix, jet_matmul, jet_matrix_inverse, monomials
from .lambda_solver import (
    LambdaField,
    SolutionSpaceReport,
    _accumulate,
    _solve,
    formal_closed_loop_metric,
    formal_lambda_solve,
    lambda_column,
    lambda_from_metric,
)
from .linear import (
    SpectralCertificate,
    TargetMatrix,
    check_target,
    design_target,
    kalman_controllable,
    linearize,
    spectral_certificate,
)
from .numeric import PolyBank


@dataclass(frozen=True)
class Pins:
    """User choices for the free origin data.

    ``lambda11`` is ``lambda_1^1(0)``; ``metric_block`` the actuated block of
    ``G_cl#(0)`` and ``hessian_block`` the actuated block of
    ``Hess(V_cl)(0)``, both as dicts ``{(i, j): value}`` with 0-based actuated
    indices ``i, j >= 1``.
    """

    lambda11: Fraction | None = None
    metric_block: Mapping[tuple[int, int], Fraction] | None = None
    hessian_block: Mapping[tuple[int, int], Fraction] | None = None

    @property
    def empty(self) -> bool:
        return self.lambda11 is None and not self.metric_block and not self.hessian_block


@dataclass(frozen=True)
class Certificate:
    """Linear-level stabilization certificate at the origin."""

    product: list[list[Fraction]]  # G_cl#(0) Hess(V_cl)(0)
    spectral: SpectralCertificate
    metric_pd: bool
    hessian_pd: bool
    kind: str = "spectral (linear-level)"

    @property
    def ok(self) -> bool:
        return self.spectral.ok


@dataclass(frozen=True)
class CompatibilityReport:
    m: int
    alpha: list[Jet]
    residuals: dict[tuple[int, int], Jet]
    compatible: bool
    verdict: str


@dataclass(eq=False)
class FeedbackLaw:
    """``u_shp(q, v) = -u_kin(q)(v, v) - u_pot(q)`` as jets.

    ``u_kin[a][j][k]`` is symmetric in ``(j, k)``.
    """

    u_kin: list[list[list[Jet]]]
    u_pot: list[Jet]
    _bank: PolyBank | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.u_pot)

    @property
    def u_shp_quadratic(self) -> list[list[list[Jet]]]:
        return [[[-e for e in row] for row in blk] for blk in self.u_kin]

    @property
    def u_shp_constant(self) -> list[Jet]:
        return [-e for e in self.u_pot]

    def membership_residual(self) -> list[Jet]:
        """Jets that must vanish for ``u_shp`` to lie in the actuated codistribution."""
        return [e for row in self.u_kin[0] for e in row] + [self.u_pot[0]]

    def is_actuated_only(self) -> bool:
        return all(j.is_zero() for j in self.membership_residual())

    def _lowered(self) -> PolyBank:
        if self._bank is None:
            n = self.n
            jets = [self.u_kin[a][j][k] for a in range(n) for j in range(n) for k in range(n)] + list(self.u_pot)
            self._bank = PolyBank(jets, n)
        return self._bank

    def __call__(self, q, v, actuated_only: bool = True) -> np.ndarray:
        """Feedback covector at ``(q, v)``; the unactuated entry is dropped by default."""
        n = self.n
        vals = self._lowered()(q)
        kin = vals[: n**3].reshape(n, n, n)
        pot = vals[n**3 :]
        v = np.asarray(v, dtype=float)
        u = -np.einsum("ajk,j,k->a", kin, v, v) - pot
        if actuated_only:
            u[0] = 0.0
        return u


@dataclass(eq=False)
class ShapingSolution:
    system: MechanicalSystem
    lam: LambdaField
    metric: list[list[Jet]]  # G_cl
    potential: Jet  # V_cl
    feedback: FeedbackLaw
    certificate: Certificate
    branch: str
    lambda_report: SolutionSpaceReport | None = None
    target: TargetMatrix | None = None
    obstruction: str | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def order(self) -> int:
        return self.system.order

    @property
    def metric_sharp_at_origin(self) -> list[list[Fraction]]:
        return exact.inverse(constant_matrix(self.metric))

    @property
    def hessian_at_origin(self) -> list[list[Fraction]]:
        return hessian_at_origin(self.potential)

    @property
    def u_kin(self):
        return self.feedback.u_kin

    @property
    def u_pot(self):
        return self.feedback.u_pot


# ---------------------------------------------------------------------------
# compatibility


def compatibility_check(sys: MechanicalSystem, lam: LambdaField, m: int = 1) -> CompatibilityReport:
    """``alpha = Lambda_cl^-1 dV_ol`` and ``d alpha_j/dq_i - d alpha_i/dq_j`` for ``i < j <= m``."""
    n = sys.n
    # Lambda_cl = G_ol G_cl# = L^T
    LT = [[lam.matrix[j][i] for j in range(n)] for i in range(n)]
    try:
        inv = jet_matrix_inverse(LT)
    except Exception:
        raise SynthesisError("Lambda_cl is singular at the origin") from None
    dV = [sys.potential.diff(k) for k in range(n)]
    alpha = []
    for a in range(n):
        acc = inv[a][0] * dV[0]
        for b in range(1, n):
            acc = acc + inv[a][b] * dV[b]
        alpha.append(acc)
    residuals = {(i, j): alpha[j].diff(i) - alpha[i].diff(j) for i in range(m) for j in range(i + 1, m)}
    compatible = all(r.is_zero() for r in residuals.values())
    if not residuals:
        verdict = "trivially compatible: no index pairs i < j <= m for m = 1"
    else:
        verdict = "compatible" if compatible else "incompatible"
    return CompatibilityReport(m, alpha, residuals, compatible, verdict)


# ---------------------------------------------------------------------------
# potential shaping PDE


def formal_potential_solve(
    sys: MechanicalSystem,
    G_cl: Sequence[Sequence[Jet]],
    pinned_hessian: Sequence[Sequence] | Mapping[tuple[int, int], object] | None = None,
) -> Jet:
    """Solve ``sum_j Lambda_1j d_j V_cl = d_1 V_ol`` with ``V_cl(0) = dV_cl(0) = 0``.

    ``Lambda_1j`` is row 1 of ``G_ol G_cl#``.  ``pinned_hessian`` fixes
    entries of ``Hess(V_cl)(0)`` (a full matrix or a dict of entries); other
    free coefficients are set to zero.
    """
    n, order = sys.n, sys.order
    Lam = jet_matmul(sys.metric, jet_matrix_inverse(G_cl))
    row0 = Lam[0]
    unknowns = [alpha for alpha in monomials(n, order) if sum(alpha) >= 2]
    col = {a: c for c, a in enumerate(unknowns)}
    rows: dict = defaultdict(dict)
    for alpha, c in col.items():
        for j in range(n):
            if alpha[j]:
                shift = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1 :]
                _accumulate(rows, 0, row0[j], shift, Fraction(alpha[j]), c, order - 1)
    for beta, v in sys.potential.diff(0).items():
        key = (0, beta)
        rows[key]["rhs"] = rows[key].get("rhs", 0) - v
    pins: dict[int, Fraction] = {}
    if pinned_hessian is not None:
        if isinstance(pinned_hessian, Mapping):
            entries = {tuple(k): exact.to_fraction(v) for k, v in pinned_hessian.items()}
        else:
            H = exact.frac_matrix(pinned_hessian)
            if not exact.is_symmetric(H):
                raise SynthesisError("pinned Hessian must be symmetric")
            entries = {(i, j): H[i][j] for i in range(n) for j in range(i, n)}
        for (i, j), v in entries.items():
            i, j = min(i, j), max(i, j)
            alpha = [0] * n
            alpha[i] += 1
            alpha[j] += 1
            pins[col[tuple(alpha)]] = v / 2 if i == j else v

    def describe(key, beta):
        mono = "*".join(f"q{i + 1}^{e}" if e > 1 else f"q{i + 1}" for i, e in enumerate(beta) if e) or "1"
        return f"coefficient of {mono} in the potential shaping equation"

    try:
        system = _solve(len(unknowns), rows, pins, "shaping_synthesis", describe)
    except InconsistentSystemError as exc:
        if exc.order <= 1 and pins:
            raise InconsistentSystemError(
                "pinned Hessian entries violate the forced first-row relation " + exc.row,
                order=exc.order,
                row=exc.row,
                module="shaping_synthesis",
            ) from None
        raise
    x = system.solution()
    return Jet(n, order, {a: x[c] for a, c in col.items() if x[c]})


# ---------------------------------------------------------------------------
# feedback


def assemble_feedback(
    sys: MechanicalSystem, G_cl: Sequence[Sequence[Jet]], V_cl: Jet
) -> FeedbackLaw:
    """``u_kin = Lambda_cl [.,.]_cl - [.,.]_ol`` and ``u_pot = Lambda_cl dV_cl - dV_ol``."""
    n = sys.n
    Lam = jet_matmul(sys.metric, jet_matrix_inverse(G_cl))
    fk_cl = first_kind(G_cl)
    fk_ol = first_kind(sys.metric)
    u_kin = []
    for a in range(n):
        blk = [[None] * n for _ in range(n)]
        for j in range(n):
            for k in range(j, n):
                acc = -fk_ol[a][j][k]
                for l in range(n):
                    acc = acc + Lam[a][l] * fk_cl[l][j][k]
                blk[j][k] = blk[k][j] = acc
        u_kin.append(blk)
    dVcl = [V_cl.diff(k) for k in range(n)]
    u_pot = []
    for a in range(n):
        acc = -sys.potential.diff(a)
        for l in range(n):
            acc = acc + Lam[a][l] * dVcl[l]
        u_pot.append(acc)
    return FeedbackLaw(u_kin, u_pot)


# ---------------------------------------------------------------------------
# origin-level choices


def _admissible_origin_basis(n: int, report: SolutionSpaceReport) -> list[list[Fraction]]:
    """Basis of admissible ``lambda(d1)(0)``: e1 plus the free tails."""
    basis = [[Fraction(1)] + [Fraction(0)] * (n - 1)]
    for t in report.origin_tail_basis:
        basis.append([Fraction(0)] + list(t))
    return basis


def _dot(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _outer(a, b):
    return [[x * y for y in b] for x in a]


def _madd(*ms):
    n = len(ms[0])
    return [[sum((m[i][j] for m in ms), Fraction(0)) for j in range(n)] for i in range(n)]


def _mscale(m, s):
    return [[v * s for v in row] for row in m]


def _complement_projector(w):
    """``I - w w^T / |w|^2``: symmetric, PSD, kills ``w``."""
    n = len(w)
    ww = _dot(w, w)
    return [[Fraction(int(i == j)) - w[i] * w[j] / ww for j in range(n)] for i in range(n)]


def pd_feasible(g1, h0, basis) -> bool:
    """Exact test: is there ``l`` in span(basis) with ``g1.l > 0`` and ``h0.l > 0``?"""
    a = [_dot(g1, w) for w in basis]
    b = [_dot(h0, w) for w in basis]
    if not any(a) or not any(b):
        return False
    # the open cone is empty only if b = -mu a with mu > 0
    ratios = {bj / aj for aj, bj in zip(a, b) if aj}
    if all((aj == 0) == (bj == 0) for aj, bj in zip(a, b)) and len(ratios) == 1:
        return next(iter(ratios)) > 0
    return True


def _lattice(dim: int, radius: int):
    pts = [p for p in itertools.product(range(-radius, radius + 1), repeat=dim)]
    pts.sort(key=lambda p: (max((abs(x) for x in p), default=0), sum(abs(x) for x in p), [-x for x in p]))
    return pts


def _lambda_scan(pin: Fraction | None):
    if pin is not None:
        return [pin]
    return [Fraction(1), Fraction(-1), Fraction(2), Fraction(-2), Fraction(1, 2), Fraction(-1, 2)]


def _pd_origin(g1, h0, basis, pin):
    """Smallest lattice point ``l`` with both positivity conditions, scan order fixed."""
    tails = basis[1:]
    for lam in _lambda_scan(pin):
        for radius in range(0, 6):
            for coords in _lattice(len(tails), radius):
                if radius and max(abs(c) for c in coords) != radius:
                    continue
                l = [lam * e for e in basis[0]]
                for c, t in zip(coords, tails):
                    l = [x + c * y for x, y in zip(l, t)]
                if _dot(g1, l) > 0 and _dot(h0, l) > 0:
                    return l
    return None


def _paren(v: Fraction) -> str:
    return f"({fmt(v)})" if v < 0 else fmt(v)


def obstruction_text(sys: MechanicalSystem, report: SolutionSpaceReport) -> str:
    """Exact argument that no positive-definite ``G_cl(0)`` admits a certificate."""
    n = sys.n
    G0 = sys.metric_at_origin
    H0 = hessian_at_origin(sys.potential)
    g1, h0 = G0[0], H0[0]
    lines = [
        "positive-definite closed-loop metric is infeasible:",
        "  a positive-definite G_cl(0) with positive product spectrum forces Hess(V_cl)(0) positive-definite",
        "  (G_cl#(0) Hess(V_cl)(0) is similar to a congruence of Hess(V_cl)(0)),",
        "  and then l = lambda(d1)(0) must satisfy g1.l = g1^T G_cl#(0) g1 > 0 and h0.l = l^T Hess(V_cl)(0) l > 0;",
    ]
    if not report.origin_tail_free():
        h11, g11 = h0[0], g1[0]
        lines.append(
            f"  lambda_1^j(0) = 0 is forced for j >= 2, so l = (a, 0, ..., 0) and the conditions read "
            f"a*{_paren(g11)} > 0 and a*{_paren(h11)} > 0, impossible since Hess(V_ol)(0)_11 = {fmt(h11)} <= 0."
        )
    else:
        lines.append("  no admissible l satisfies both inequalities (the two functionals are negatively proportional).")
    diagonal = all(G0[i][j] == 0 for i in range(n) for j in range(n) if i != j)
    if n == 2 and diagonal and not report.origin_tail_free():
        h11, h12, g11 = H0[0][0], H0[0][1], G0[0][0]
        p11, p12 = h11 / g11, h12 / g11
        t0 = -p11
        lines += [
            f"  with G_cl#(0) = diag(a, c) and Hess(V_cl)(0) = [[{fmt(h11)}/a, {fmt(h12)}/a], [{fmt(h12)}/a, k]]"
            " the product is",
            f"    A = [[{fmt(p11)}, {fmt(p12)}], [{fmt(h12)}*c/a, c*k]]",
            f"  trace A > 0  =>  c*k > {fmt(t0)}",
            f"  det A > 0    =>  {fmt(p11)}*c*k - {fmt(h12 * h12 / g11)}*c/a > 0",
        ]
        if h12 != 0:
            coef = h11 / (h12 * h12)
            if h11 < 0:
                lines.append(f"               =>  c/a < {fmt(coef)}*c*k < {fmt(coef * t0)} < 0")
            else:
                lines.append("               =>  c/a < 0")
            lines.append(f"  so a and c have opposite signs and G_cl(0) = diag({fmt(g11)}/a, 1/c) is indefinite.")
    return "\n".join(lines)


def _target_candidates(sys, A, basis, pin):
    """Solutions ``(M, l)`` of ``M g1 = l``, ``A M = M A^T`` with ``l`` admissible."""
    n = sys.n
    g1 = sys.metric_at_origin[0]
    cells = [(a, b) for a in range(n) for b in range(a, n)]
    cidx = {c: i for i, c in enumerate(cells)}
    nb = len(basis)
    ncols = len(cells) + nb  # M entries, then coordinates of l in the basis

    def m_col(a, b):
        return cidx[(min(a, b), max(a, b))]

    def equations(system: LinearSystem):
        for a in range(n):
            row = defaultdict(Fraction)
            for b in range(n):
                row[m_col(a, b)] += g1[b]
            for k, w in enumerate(basis):
                row[len(cells) + k] -= w[a]
            system.add(dict(row))
        for a in range(n):
            for b in range(a + 1, n):
                row = defaultdict(Fraction)
                for m in range(n):
                    row[m_col(m, b)] += A[a][m]
                    row[m_col(a, m)] -= A[b][m]
                system.add(dict(row))

    def unpack(x):
        M = [[x[m_col(a, b)] for b in range(n)] for a in range(n)]
        l = [sum((x[len(cells) + k] * basis[k][i] for k in range(nb)), Fraction(0)) for i in range(n)]
        return M, l

    for lam in _lambda_scan(pin):
        system = LinearSystem(ncols)
        system.add({len(cells): Fraction(1)}, lam)
        try:
            equations(system)
        except Exception:
            continue
        base = system.solution()
        null = system.nullspace()
        yield lam, base, null, unpack


def _pd_search_target(sys, A, basis, pin):
    """Look for a positive-definite ``G_cl#(0)`` compatible with target ``A``."""
    from scipy.optimize import minimize

    fallback = None
    for lam, base, null, unpack in _target_candidates(sys, A, basis, pin):
        M0, l0 = unpack(base)
        if exact.det(M0) != 0 and fallback is None:
            fallback = (M0, l0)
        if exact.is_positive_definite(M0):
            return M0, l0, True
        if not null:
            continue
        B = np.array([[float(v) for v in vec] for vec in null])
        x0 = np.array([float(v) for v in base])

        def mineig(t):
            M, _ = unpack(list(x0 + t @ B))
            return float(np.linalg.eigvalsh(np.array(M, dtype=float))[0])

        starts = [np.zeros(len(null))]
        for i in range(len(null)):
            for s in (1.0, -1.0, 10.0, -10.0):
                e = np.zeros(len(null))
                e[i] = s
                starts.append(e)
        for t0 in starts:
            res = minimize(lambda t: -min(mineig(t), 1.0), t0, method="Nelder-Mead",
                           options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 2000})
            if -res.fun <= 0:
                continue
            for den in (1, 2, 3, 4, 5, 6, 8, 10, 12, 16, 20, 50, 100, 1000, 10**6):
                t = [Fraction(float(v)).limit_denominator(den) for v in res.x]
                x = [b + sum((ti * vec[c] for ti, vec in zip(t, null)), Fraction(0)) for c, b in enumerate(base)]
                M, l = unpack(x)
                if exact.is_positive_definite(M):
                    return M, l, True
    if fallback is None:
        raise DegenerateCandidateError("degenerate candidate: every scanned lambda_1^1 gives a singular G_cl#(0)")
    return fallback[0], fallback[1], False


# ---------------------------------------------------------------------------
# completion to jets


def _complete(sys, report, l, M, H, branch, target=None, obstruction=None, notes=()) -> ShapingSolution:
    n = sys.n
    zero = (0,) * n
    pins = {(j, zero): l[j] for j in range(n)}
    column = lambda_column(sys, pins)
    try:
        Minv = exact.inverse(M)
    except ZeroDivisionError:
        raise DegenerateCandidateError("degenerate candidate: G_cl#(0) is singular") from None
    G_cl = formal_closed_loop_metric(sys, column, Minv)
    lam = lambda_from_metric(sys, G_cl)
    V_cl = formal_potential_solve(sys, G_cl, H)
    feedback = assemble_feedback(sys, G_cl, V_cl)
    product = exact.matmul(M, H)
    cert = Certificate(product, spectral_certificate(product), exact.is_positive_definite(Minv),
                       exact.is_positive_definite(H))
    return ShapingSolution(sys, lam, G_cl, V_cl, feedback, cert, branch, report, target, obstruction, list(notes))


def _check_controllable(sys):
    ok, r = kalman_controllable(linearize(sys))
    if not ok:
        from .errors import ControllabilityError

        raise ControllabilityError(f"linearization is not controllable (Kalman rank {r} < {2 * sys.n})")


def potential_only_synthesize(sys: MechanicalSystem) -> ShapingSolution:
    """Keep ``G_cl = G`` and make ``Hess(V_cl)(0)`` positive-definite via the actuated block."""
    n = sys.n
    H0 = hessian_at_origin(sys.potential)
    h11 = H0[0][0]
    if h11 <= 0:
        raise SynthesisError(
            f"potential-only shaping needs Hess(V_ol)(0)_11 > 0, got {fmt(h11)}; use full synthesis"
        )
    if exact.is_positive_definite(H0):
        H = H0
    else:
        # Schur complement of h11 made the identity: leading minors stay positive
        b = H0[0][1:]
        H = [row[:] for row in H0]
        for i in range(1, n):
            for j in range(1, n):
                H[i][j] = b[i - 1] * b[j - 1] / h11 + int(i == j)
    G = [list(row) for row in sys.metric]
    V_cl = formal_potential_solve(sys, G, H)
    feedback = assemble_feedback(sys, G, V_cl)
    Minv = exact.inverse(sys.metric_at_origin)
    product = exact.matmul(Minv, H)
    cert = Certificate(product, spectral_certificate(product), True, exact.is_positive_definite(H))
    lam = LambdaField.identity(n, sys.order)
    return ShapingSolution(sys, lam, G, V_cl, feedback, cert, "potential-only", None)


def synthesize(
    sys: MechanicalSystem,
    target: TargetMatrix | Sequence[Sequence] | None = None,
    pins: Pins | None = None,
    spectrum: Sequence | None = None,
) -> ShapingSolution:
    """Full energy-shaping synthesis.

    Modes, in order of precedence:

    * all pins given (``lambda11``, metric block, Hessian block): the origin
      data is fixed by the pins and the first-row relations;
    * a target matrix or spectrum request: ``G_cl#(0)`` is solved from the
      target, preferring a positive-definite solution;
    * nothing given and ``Hess(V_ol)(0)_11 > 0``: potential shaping only;
    * otherwise a positive-definite pair is built when one exists, and the
      default pole-placement target is used when it does not.
    """
    pins = pins or Pins()
    n = sys.n
    _check_controllable(sys)
    G0 = sys.metric_at_origin
    H0 = hessian_at_origin(sys.potential)
    g1, h0 = G0[0], H0[0]
    report = formal_lambda_solve(sys)
    basis = _admissible_origin_basis(n, report)
    if pins.lambda11 is not None and pins.lambda11 == 0:
        raise DegenerateCandidateError("lambda_1^1(0) must be nonzero")
    pd_possible = pd_feasible(g1, h0, basis)
    obstruction = None if pd_possible else obstruction_text(sys, report)

    if pins.metric_block or pins.hessian_block:
        if pins.lambda11 is None or not pins.metric_block or not pins.hessian_block:
            raise SynthesisError("pinned synthesis needs lambda11, the metric block and the Hessian block")
        return _pinned(sys, report, pins, obstruction)

    if target is None and spectrum is None:
        if pins.lambda11 is None and H0[0][0] > 0:
            return potential_only_synthesize(sys)
        if pd_possible:
            l = _pd_origin(g1, h0, basis, pins.lambda11)
            if l is not None:
                M = _madd(_mscale(_outer(l, l), 1 / _dot(g1, l)), _complement_projector(g1))
                H = _madd(_mscale(_outer(h0, h0), 1 / _dot(h0, l)), _complement_projector(l))
                return _complete(sys, report, l, M, H, "kinetic+potential (positive-definite)")

    lin = linearize(sys)
    if target is None:
        tm = design_target(lin, spectrum)
    elif isinstance(target, TargetMatrix):
        tm = target
    else:
        tm = check_target(lin, target)
    if not tm.certificate.ok:
        raise InfeasibleTargetError("target matrix fails the spectral certificate")
    M, l, pd = _pd_search_target(sys, tm.A, basis, pins.lambda11)
    H = exact.matmul(exact.inverse(M), tm.A)
    if not exact.is_symmetric(H):  # pragma: no cover - guaranteed by A M = M A^T
        raise SynthesisError("target solve produced a nonsymmetric Hessian")
    notes = []
    if not pd and obstruction is None:
        notes.append("no positive-definite G_cl(0) found for this target; not proven infeasible")
    return _complete(sys, report, l, M, H, "kinetic+potential (target)", tm, None if pd else obstruction, notes)


def _pinned(sys, report, pins: Pins, obstruction) -> ShapingSolution:
    n = sys.n
    G0 = sys.metric_at_origin
    H0 = hessian_at_origin(sys.potential)
    g1, h0 = G0[0], H0[0]
    l = [exact.to_fraction(pins.lambda11)] + [Fraction(0)] * (n - 1)

    def solve_first_row(block, vec, rhs, what):
        """Symmetric matrix with given actuated block and ``X vec = rhs``."""
        X = exact.zeros(n)
        for (i, j), v in block.items():
            if not (1 <= i < n and 1 <= j < n):
                raise SynthesisError(f"{what} pin ({i + 1},{j + 1}) is outside the actuated block")
            X[i][j] = X[j][i] = exact.to_fraction(v)
        missing = [(i, j) for i in range(1, n) for j in range(i, n) if (i, j) not in block and (j, i) not in block]
        if missing:
            raise SynthesisError(f"{what} block is incomplete: missing entries {[(i + 1, j + 1) for i, j in missing]}")
        # unknowns X[0][j], j = 0..n-1
        system = LinearSystem(n)
        for a in range(n):
            coeffs = {}
            r = rhs[a]
            if a == 0:
                for j in range(n):
                    coeffs[j] = coeffs.get(j, 0) + vec[j]
            else:
                coeffs[a] = vec[0]
                for j in range(1, n):
                    r -= X[a][j] * vec[j]
            try:
                system.add(coeffs, r)
            except Exception:
                raise SynthesisError(f"{what} pins are inconsistent with the forced first-row relation") from None
        if system.rank < n:
            raise DegenerateCandidateError(f"degenerate candidate: {what} first row is not determined")
        x = system.solution()
        for j in range(n):
            X[0][j] = X[j][0] = x[j]
        return X

    M = solve_first_row(pins.metric_block, g1, l, "metric")
    H = solve_first_row(pins.hessian_block, l, h0, "Hessian")
    if exact.det(M) == 0:
        raise DegenerateCandidateError("degenerate candidate: pinned G_cl#(0) is singular")
    sol = _complete(sys, report, l, M, H, "kinetic+potential (pinned)", None, None)
    if not sol.certificate.metric_pd:
        sol.obstruction = obstruction or "pinned G_cl(0) is not positive-definite"
    return sol
