"""Floating-point evaluation of jets and of mechanical equations of motion.

Jets are lowered once into a shared monomial basis; evaluating a whole
family of jets at a point is then one small matrix-vector product.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .jets import Jet


class PolyBank:
    """Evaluate many jets (as polynomials) at the same point."""

    def __init__(self, jets: Sequence[Jet], dim: int | None = None):
        jets = list(jets)
        self.dim = dim if dim is not None else jets[0].dim
        index: dict[tuple[int, ...], int] = {}
        entries = []
        for row, jet in enumerate(jets):
            for alpha, c in jet.items():
                col = index.setdefault(alpha, len(index))
                entries.append((row, col, float(c)))
        if not index:
            index[(0,) * self.dim] = 0
        self.exponents = np.array(list(index), dtype=np.int64).reshape(len(index), self.dim)
        self.coeffs = np.zeros((len(jets), len(index)))
        for row, col, c in entries:
            self.coeffs[row, col] += c
        self._max_exp = int(self.exponents.max()) if self.exponents.size else 0

    def monomials(self, q: np.ndarray) -> np.ndarray:
        # table of powers q_i**e for e <= max exponent, then gather
        powers = np.ones((self.dim, self._max_exp + 1))
        for e in range(1, self._max_exp + 1):
            powers[:, e] = powers[:, e - 1] * q
        return np.prod(powers[np.arange(self.dim), self.exponents], axis=1)

    def __call__(self, q) -> np.ndarray:
        return self.coeffs @ self.monomials(np.asarray(q, dtype=float))


class MechanicalEvaluator:
    """Numerical metric, potential and geodesic spray of a polynomial system."""

    def __init__(self, metric: Sequence[Sequence[Jet]], potential: Jet):
        n = len(metric)
        self.n = n
        jets = [metric[i][j] for i in range(n) for j in range(n)]
        jets += [metric[i][j].diff(k) for k in range(n) for i in range(n) for j in range(n)]
        jets += [potential.diff(k) for k in range(n)]
        jets += [potential]
        self._bank = PolyBank(jets, n)

    def evaluate(self, q):
        n = self.n
        vals = self._bank(q)
        G = vals[: n * n].reshape(n, n)
        dG = vals[n * n : n * n + n**3].reshape(n, n, n)  # dG[k] = d/dq_k G
        dV = vals[n * n + n**3 : n * n + n**3 + n]
        V = vals[-1]
        return G, dG, dV, V

    def metric(self, q) -> np.ndarray:
        return self.evaluate(q)[0]

    def energy(self, q, v) -> float:
        G, _, _, V = self.evaluate(q)
        v = np.asarray(v, dtype=float)
        return 0.5 * v @ G @ v + V

    def acceleration(self, q, v, force=None) -> np.ndarray:
        """Solve ``G (a + Gamma(v, v)) = -dV + force`` for the acceleration."""
        G, dG, dV, _ = self.evaluate(q)
        v = np.asarray(v, dtype=float)
        # first-kind Christoffel contraction: sum_k v_k (dG_k v) - 1/2 v^T dG_l v
        dGv = dG @ v  # dGv[k, l] = sum_j dG[k][l, j] v_j
        w = v @ dGv - 0.5 * np.einsum("lij,i,j->l", dG, v, v)
        rhs = -dV - w
        if force is not None:
            rhs = rhs + np.asarray(force, dtype=float)
        return np.linalg.solve(G, rhs)
