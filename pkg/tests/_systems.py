"""Systems and random generators shared by the tests."""

from __future__ import annotations

import random
from fractions import Fraction

from shaper.geometry import MechanicalSystem
from shaper.jets import Jet, monomials

TWO_LINK_METRIC = ("(q2)^2 + 1", "0", "(q1)^2 + 1")
TWO_LINK_POTENTIAL = "-(q1)^2 + 2*q1*q2 + (q2)^2"

# pins from the certified indefinite example
A_PIN = Fraction(-191, 100)
C_PIN = Fraction(43, 10)
K_PIN = Fraction(1)


def two_link(order: int = 4, cross: bool = False) -> MechanicalSystem:
    """diag(1 + q2^2, 1 + q1^2) (optionally with a 2 q1 q2 cross term) and V = -q1^2 + 2 q1 q2 + q2^2."""
    q1, q2 = Jet.variable(0, 2, order), Jet.variable(1, 2, order)
    one = Jet.constant(1, 2, order)
    off = (q1 * q2).scale(2) if cross else Jet.zero(2, order)
    G = [[one + q2 * q2, off], [off, one + q1 * q1]]
    V = -(q1 * q1) + (q1 * q2).scale(2) + q2 * q2
    return MechanicalSystem(G, V, order)


def constant_system(G0, H0, order: int = 4) -> MechanicalSystem:
    """Constant metric ``G0`` and quadratic potential ``1/2 q^T H0 q``."""
    n = len(G0)
    G = [[Jet.constant(G0[i][j], n, order) for j in range(n)] for i in range(n)]
    coeffs = {}
    for i in range(n):
        for j in range(i, n):
            a = [0] * n
            a[i] += 1
            a[j] += 1
            coeffs[tuple(a)] = Fraction(H0[i][j]) / (2 if i == j else 1)
    return MechanicalSystem(G, Jet(n, order, coeffs), order)


def rand_frac(rng: random.Random, num: int = 5, den: int = 4) -> Fraction:
    return Fraction(rng.randint(-num, num), rng.randint(1, den))


def random_pd(rng: random.Random, n: int) -> list[list[Fraction]]:
    A = [[rand_frac(rng) for _ in range(n)] for _ in range(n)]
    return [[sum(A[k][i] * A[k][j] for k in range(n)) + int(i == j) for j in range(n)] for i in range(n)]


def random_system(rng: random.Random, n: int = 2, order: int = 3, density: float = 0.4) -> MechanicalSystem:
    """Random polynomial metric (PD at the origin) with an equilibrium potential."""
    G0 = random_pd(rng, n)
    G = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            c = {(0,) * n: G0[i][j]}
            for a in monomials(n, 2):
                if sum(a) >= 1 and rng.random() < density:
                    c[a] = rand_frac(rng)
            G[i][j] = G[j][i] = Jet(n, order, c)
    V = {}
    for a in monomials(n, min(order, 3)):
        if sum(a) >= 2 and rng.random() < 0.5:
            V[a] = rand_frac(rng)
    for k in range(1, n):
        e = [0] * n
        e[k] = 1
        if rng.random() < 0.3:
            V[tuple(e)] = rand_frac(rng)
    return MechanicalSystem(G, Jet(n, order, V), order)
