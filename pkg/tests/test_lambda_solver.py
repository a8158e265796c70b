import random
import time
from fractions import Fraction

import pytest

import _oracle
from _systems import constant_system, random_pd, random_system, two_link
from shaper import exact
from shaper.errors import DegenerateCandidateError, FactorizationError, InconsistentSystemError, ValidationError
from shaper.jets import Jet, jet_matmul
from shaper.lambda_solver import (
    LambdaField,
    closed_loop_metric_from_lambda,
    coefficient_name,
    constant_lambda_residual,
    formal_closed_loop_metric,
    formal_lambda_solve,
    lambda_column,
    lambda_from_metric,
    lambda_method_residuals,
    phi_G_kernel_basis,
)

Z = (0, 0)


def _brute_force_kernel_dim(G0):
    """Nullspace of the symmetry constraints over all n^2 entries plus the pattern rows."""
    n = len(G0)
    Ginv = exact.inverse(exact.frac_matrix(G0))
    rows = []
    for a in range(n):
        for b in range(a + 1, n):
            row = [Fraction(0)] * (n * n)
            for m in range(n):
                row[a * n + m] += Ginv[m][b]
                row[b * n + m] -= Ginv[m][a]
            rows.append(row)
    for j in range(1, n):  # lambda_1^j = L[j][0] = 0
        row = [Fraction(0)] * (n * n)
        row[j * n] = Fraction(1)
        rows.append(row)
    return _oracle.nullspace_dim(rows, n * n)


def test_kernel_identity_n2():
    basis = phi_G_kernel_basis([[1, 0], [0, 1]])
    assert len(basis) == 2
    span = {tuple(map(tuple, b)) for b in basis}
    assert span == {((1, 0), (0, 0)), ((0, 0), (0, 1))}


def test_kernel_dimensions():
    assert len(phi_G_kernel_basis([[1, 0, 0], [0, 1, 0], [0, 0, 1]])) == 4
    assert len(phi_G_kernel_basis([[2, 0], [0, 3]])) == 2


def test_kernel_elements_satisfy_constraints():
    G0 = random_pd(random.Random(3), 4)
    Ginv = exact.inverse(G0)
    for L in phi_G_kernel_basis(G0):
        assert exact.is_symmetric(exact.matmul(L, Ginv))
        assert all(L[j][0] == 0 for j in range(1, 4))


def test_kernel_matches_brute_force():
    rng = random.Random(11)
    for n in range(2, 6):
        G0 = random_pd(rng, n)
        assert len(phi_G_kernel_basis(G0)) == _brute_force_kernel_dim(G0) == n * (n - 1) // 2 + 1


def test_kernel_degenerate_metric():
    with pytest.raises(ValidationError, match="degenerate"):
        phi_G_kernel_basis([[1, 1], [1, 1]])


def test_constant_residual_examples():
    s = constant_system([[2, 1], [1, 3]], [[1, 0], [0, 1]])
    assert all(r.is_zero() for r in constant_lambda_residual(s, [[5, 1], [0, 2]]))
    t = two_link()
    a, d = Fraction(-3, 2), Fraction(7)
    assert all(r.is_zero() for r in constant_lambda_residual(t, [[a, 0], [0, d]]))
    bad = constant_lambda_residual(t, [[1, 0], [1, 1]])
    # first-order term 2*q2 survives in the k = 1 equation
    assert bad[0].coeff((0, 1)) == 2


def test_two_link_forced_coefficients():
    t0 = time.perf_counter()
    rep = formal_lambda_solve(two_link(3), 3)
    assert time.perf_counter() - t0 < 1.0
    assert rep.forced[(0, (1, 1))] == 0
    assert rep.forced[(1, (0, 0))] == 0
    assert not rep.is_forced(0, Z)
    lines = rep.ledger_lines()
    assert "C11 = 0 (forced)" in lines and "D00 = 0 (forced)" in lines and "C00 free" in lines
    assert not rep.origin_tail_free()


def test_two_link_degree_one_brute_force():
    """The degree-1 equations alone, solved by sympy, force C11 and D00."""
    import sympy as sp

    q1, q2 = _oracle.symbols(2)
    c = sp.symbols("C00 C10 C01 C20 C11 C02")
    d = sp.symbols("D00 D10 D01")
    C = c[0] + c[1] * q1 + c[2] * q2 + c[3] * q1**2 + c[4] * q1 * q2 + c[5] * q2**2
    D = d[0] + d[1] * q1 + d[2] * q2
    eq1 = sp.expand((1 + q2**2) * sp.diff(C, q1) + 2 * q2 * D)
    eq2 = sp.expand((1 + q2**2) * sp.diff(C, q2) - 2 * q1 * D)
    eqs = []
    for e in (eq1, eq2):
        p = sp.Poly(e, q1, q2)
        eqs += [p.coeff_monomial(m) for m in (1, q1, q2)]
    sol = sp.solve(eqs, list(c[1:]) + [d[0]], dict=True)[0]
    assert sol[c[4]] == 0 and sol[d[0]] == 0
    assert c[0] not in sol


def test_constant_metric_has_no_forced_coefficients():
    rep = formal_lambda_solve(constant_system([[2, 1], [1, 3]], [[1, 0], [0, 1]]), 3)
    assert rep.forced == {}
    assert rep.origin_tail_free()


def test_cross_term_metric_leaves_tail_free():
    rep = formal_lambda_solve(two_link(3, cross=True), 3)
    assert not rep.is_forced(1, Z)
    assert rep.origin_tail_basis == [[1]]


def test_by_degree_partition_is_exhaustive():
    rep = formal_lambda_solve(random_system(random.Random(2), n=3, order=3))
    seen = []
    for _, forced, free in rep.by_degree():
        seen += [c for c, _ in forced] + free
    assert sorted(seen) == sorted(rep._unknowns)
    assert len(set(seen)) == len(seen)


def test_coefficient_names():
    assert coefficient_name(0, (1, 1)) == "C11"
    assert coefficient_name(1, (0, 0)) == "D00"
    assert coefficient_name(2, (1, 0, 2)) == "E102"


def test_lambda_column_pins_and_defaults():
    col = lambda_column(two_link(), {})
    assert col[0] == 1 and col[1].is_zero()
    col = lambda_column(two_link(), {(0, Z): Fraction(-191, 100)})
    assert col[0].constant_term == Fraction(-191, 100)


def test_lambda_column_rejects_forced_pin():
    with pytest.raises(InconsistentSystemError) as info:
        lambda_column(two_link(), {(1, Z): 1})
    assert info.value.order == 1
    assert "q2" in info.value.row or "q1" in info.value.row


def test_identity_lambda_residuals_vanish():
    s = two_link()
    lam = LambdaField.identity(2, s.order)
    res = lambda_method_residuals(s, [list(r) for r in s.metric], lam)
    assert res.vanish_2a() and res.vanish_2b() and res.vanish_kinetic()


def test_two_link_solution_residuals_vanish():
    s = two_link()
    a, c = Fraction(-191, 100), Fraction(43, 10)
    col = lambda_column(s, {(0, Z): a})
    G_cl = formal_closed_loop_metric(s, col, [[1 / a, 0], [0, 1 / c]])
    lam = lambda_from_metric(s, G_cl)
    res = lambda_method_residuals(s, G_cl, lam)
    assert res.vanish_kinetic() and res.vanish_2a() and res.vanish_2b()
    assert lam.is_symmetric_pattern(s)


def test_constant_metric_diag_lambda_residuals_vanish():
    s = constant_system([[2, 1], [1, 3]], [[1, 0], [0, 1]])
    G0inv = exact.inverse(s.metric_at_origin)
    L0 = [[Fraction(2), Fraction(0)], [Fraction(0), Fraction(2)]]
    lam = LambdaField(tuple(tuple(Jet.constant(v, 2, 4) for v in row) for row in L0))
    G_cl = closed_loop_metric_from_lambda(s, lam)
    res = lambda_method_residuals(s, G_cl, lam)
    assert res.vanish_2a() and res.vanish_2b() and res.vanish_kinetic()
    assert exact.is_symmetric(exact.matmul(L0, G0inv))


def test_factorization_precondition():
    s = two_link()
    lam = LambdaField.identity(2, s.order)
    wrong = [[Jet.constant(2, 2, 4), Jet.zero(2, 4)], [Jet.zero(2, 4), Jet.constant(1, 2, 4)]]
    with pytest.raises(FactorizationError):
        lambda_method_residuals(s, wrong, lam)


def test_closed_loop_metric_from_lambda_examples():
    s = two_link()
    G_cl = closed_loop_metric_from_lambda(s, LambdaField.identity(2, 4))
    assert all(G_cl[i][j] == s.metric[i][j] for i in range(2) for j in range(2))
    a, c = Fraction(-191, 100), Fraction(43, 10)
    col = lambda_column(s, {(0, Z): a})
    lam = lambda_from_metric(s, formal_closed_loop_metric(s, col, [[1 / a, 0], [0, 1 / c]]))
    G_cl = closed_loop_metric_from_lambda(s, lam)
    assert [[e.constant_term for e in row] for row in G_cl] == [[1 / a, 0], [0, 1 / c]]
    assert all(G_cl[0][1] == G_cl[1][0] for _ in range(1))
    singular = LambdaField(tuple(tuple(Jet.constant(v, 2, 4) for v in row) for row in [[1, 0], [0, 0]]))
    with pytest.raises(DegenerateCandidateError, match="degenerate candidate"):
        closed_loop_metric_from_lambda(s, singular)


@pytest.mark.parametrize("seed", range(6))
def test_closed_loop_metric_symmetric_and_factorizes(seed):
    rng = random.Random(seed)
    s = random_system(rng, n=2, order=3)
    col = lambda_column(s, {})
    g1 = [s.metric_at_origin[i][0] for i in range(2)]
    l = [c.constant_term for c in col]
    N = [[g1[i] * g1[j] / (g1[0] * l[0]) + (int(i == j) - l[i] * l[j] / sum(x * x for x in l)) for j in range(2)]
         for i in range(2)]
    G_cl = formal_closed_loop_metric(s, col, N)
    assert G_cl[0][1] == G_cl[1][0]
    lam = lambda_from_metric(s, G_cl)
    prod = jet_matmul(G_cl, [list(r) for r in lam.matrix])
    assert all(prod[i][j] == s.metric[i][j] for i in range(2) for j in range(2))
    assert lam.column[0] == col[0] and lam.column[1] == col[1]
