"""Potential shaping alone when the unactuated Hessian entry is already positive.

The metric is left untouched; the actuated block of the Hessian is replaced so
that its Schur complement becomes the identity, keeping row 1 fixed.
Run: python demos/potential_only.py
"""

from shaper.config import parse_config
from shaper.exact import fmt
from shaper.geometry import hessian_at_origin
from shaper.synthesis import potential_only_synthesize

SYSTEM = """
[system]
n = 3
g_1_1 = 1 + (q2)^2
g_1_2 = 0
g_1_3 = 1/2
g_2_2 = 2
g_2_3 = q1
g_3_3 = 1 + (q1)^2
potential = (q1)^2 + 3*q1*q2 - q2*q3 - 1/2*(q3)^2
"""


def main():
    system = parse_config(SYSTEM, "potential-only demo").build_system()
    print("Hess(V_ol)(0):", [[fmt(v) for v in row] for row in hessian_at_origin(system.potential)])
    sol = potential_only_synthesize(system)
    print("Hess(V_cl)(0):", [[fmt(v) for v in row] for row in sol.hessian_at_origin])
    print("V_cl =", sol.potential.to_str())
    print("u_pot =", [u.to_str() for u in sol.u_pot])
    print("feedback acts only on q2, q3:", sol.feedback.is_actuated_only())


if __name__ == "__main__":
    main()
