import random
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

import _oracle
from _systems import constant_system, random_system, two_link
from shaper.errors import ValidationError
from shaper.geometry import (
    MechanicalSystem,
    christoffel,
    geodesic_spray_rhs,
    hessian_at_origin,
    metric_inverse,
)
from shaper.jets import Jet


def test_metric_inverse_examples():
    s = constant_system([[1, 0], [0, 1]], [[1, 0], [0, 1]])
    inv = metric_inverse(s)
    assert inv[0][0] == 1 and inv[1][1] == 1 and inv[0][1].is_zero()
    s = constant_system([[2, 0], [0, 3]], [[1, 0], [0, 1]])
    inv = metric_inverse(s)
    assert inv[0][0] == Fraction(1, 2) and inv[1][1] == Fraction(1, 3)
    inv = metric_inverse(two_link(4))
    assert dict(inv[0][0].items()) == {(0, 0): 1, (0, 2): -1, (0, 4): 1}
    assert dict(inv[1][1].items()) == {(0, 0): 1, (2, 0): -1, (4, 0): 1}


def test_christoffel_two_link_against_symbolic_oracle():
    order = 4
    s = two_link(order)
    S = christoffel(s)
    q1, q2 = qs = _oracle.symbols(2)
    expected = {
        (0, 0, 1): q2 / (1 + q2**2),
        (0, 1, 1): -q1 / (1 + q2**2),
        (1, 0, 0): -q2 / (1 + q1**2),
        (1, 0, 1): q1 / (1 + q1**2),
    }
    for i in range(2):
        for j in range(2):
            for k in range(2):
                key = (i, min(j, k), max(j, k))
                want = _oracle.taylor(expected.get(key, sp.Integer(0)), qs, order - 1)
                assert dict(S[i, j, k].items()) == want, (i, j, k)


def test_christoffel_random_metric_against_oracle():
    rng = random.Random(7)
    s = random_system(rng, n=2, order=3)
    qs = _oracle.symbols(2)
    G = sp.Matrix(2, 2, lambda i, j: _oracle.jet_to_sympy(s.metric[i][j], qs))
    want = _oracle.christoffel(G, qs)
    S = christoffel(s)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                assert dict(S[i, j, k].items()) == _oracle.taylor(want[i][j][k], qs, 2)


def test_christoffel_vanishes_for_constant_metric():
    s = constant_system([[2, 1], [1, 3]], [[1, 0], [0, 1]])
    assert christoffel(s).is_zero()


@pytest.mark.parametrize("seed", range(5))
def test_metricity_and_symmetry(seed):
    s = random_system(random.Random(seed), n=3, order=3)
    S = christoffel(s)
    res = S.metricity_residual(s.metric)
    assert all(r.is_zero() for blk in res for row in blk for r in row)
    for i in range(3):
        for j in range(3):
            for k in range(3):
                assert S[i, j, k] == S[i, k, j]


def test_hessian_examples():
    assert hessian_at_origin(two_link().potential) == [[-2, 2], [2, 2]]
    q1 = Jet.variable(0, 2, 4)
    assert hessian_at_origin(q1.scale(3)) == [[0, 0], [0, 0]]
    half = (q1 * q1 + Jet.variable(1, 2, 4) ** 2).scale(Fraction(1, 2))
    assert hessian_at_origin(half) == [[1, 0], [0, 1]]


def test_spray_examples():
    free = constant_system([[1, 0], [0, 1]], [[0, 0], [0, 0]])
    assert np.allclose(geodesic_spray_rhs(free, [0.3, 0.2], [1.0, 0.0]), 0)
    osc = constant_system([[1, 0], [0, 1]], [[1, 0], [0, 1]])
    assert np.allclose(geodesic_spray_rhs(osc, [1.0, 0.0], [0.0, 0.0]), [-1, 0])
    assert np.allclose(geodesic_spray_rhs(two_link(), [0, 0], [0, 0]), 0)


def test_spray_matches_symbolic_geodesic_equation():
    s = two_link()
    q1, q2 = qs = _oracle.symbols(2)
    G = sp.diag(1 + q2**2, 1 + q1**2)
    V = -(q1**2) + 2 * q1 * q2 + q2**2
    S = _oracle.christoffel(G, qs)
    point, vel = (0.3, -0.2), (0.5, 0.7)
    sub = dict(zip(qs, point))
    dV = sp.Matrix([sp.diff(V, q) for q in qs])
    rhs = -G.inv() * dV
    acc = [float((rhs[i] - sum(S[i][j][k] * vel[j] * vel[k] for j in range(2) for k in range(2))).subs(sub))
           for i in range(2)]
    assert np.allclose(geodesic_spray_rhs(s, point, vel), acc, atol=1e-12)


def test_spray_reduces_for_constant_metric():
    G0 = [[2, 1], [1, 3]]
    H0 = [[1, 2], [2, 5]]
    s = constant_system(G0, H0)
    q = np.array([0.1, -0.4])
    want = -np.linalg.solve(np.array(G0, float), np.array(H0, float) @ q)
    assert np.allclose(geodesic_spray_rhs(s, q, [0.3, 0.1]), want)


def _jet(c, order=4):
    return Jet.constant(c, 2, order)


def test_validation_rejects_bad_systems():
    V = two_link().potential
    with pytest.raises(ValidationError, match="not symmetric"):
        MechanicalSystem([[_jet(1), _jet(1)], [_jet(0), _jet(1)]], V, 4)
    with pytest.raises(ValidationError, match="positive-definite"):
        MechanicalSystem([[_jet(1), _jet(2)], [_jet(2), _jet(1)]], V, 4)
    with pytest.raises(ValidationError, match="equilibrium"):
        MechanicalSystem([[_jet(1), _jet(0)], [_jet(0), _jet(1)]], Jet.variable(0, 2, 4), 4)
    with pytest.raises(ValidationError, match="n >= 2"):
        MechanicalSystem([[Jet.constant(1, 1, 4)]], Jet.zero(1, 4), 4)


def test_actuated_gradient_is_reported_not_rejected():
    s = MechanicalSystem([[_jet(1), _jet(0)], [_jet(0), _jet(1)]], Jet.variable(1, 2, 4), 4)
    assert any("dV/dq2 = 1" in note for note in s.notices)


def test_error_messages_carry_module_tag():
    with pytest.raises(ValidationError) as info:
        MechanicalSystem([[_jet(1), _jet(2)], [_jet(2), _jet(1)]], two_link().potential, 4)
    assert str(info.value).startswith("[geometry]")
