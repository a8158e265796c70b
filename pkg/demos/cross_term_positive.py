"""Cross-term metric: the tail of lambda(d1) at the origin is free.

Adding 2*q1*q2 to the off-diagonal metric entry leaves lambda_1^2(0) free,
which opens a positive-definite closed-loop metric and a positive-definite
closed-loop Hessian, so the closed-loop energy is a Lyapunov function.
Run: python demos/cross_term_positive.py
"""

from pathlib import Path

from shaper.config import load_config
from shaper.exact import fmt
from shaper.lambda_solver import coefficient_name, formal_lambda_solve
from shaper.simulator import energy_drift, simulate_closed, simulate_open_with_feedback
from shaper.synthesis import synthesize

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "cross_term_metric.ini"


def main():
    cfg = load_config(CONFIG)
    system = cfg.build_system()

    rep = formal_lambda_solve(system.at_order(3), 3)
    print("degree-0 and degree-1 ledger:")
    for d, forced, free in rep.by_degree()[:2]:
        for (j, alpha), v in forced:
            print(f"  {coefficient_name(j, alpha)} = {fmt(v)} (forced)")
        for j, alpha in free:
            print(f"  {coefficient_name(j, alpha)} free")
    print("admissible lambda(d1)(0) tail directions:", rep.origin_tail_basis)

    sol = synthesize(system)
    cert = sol.certificate
    print("\nbranch:", sol.branch)
    print("G_cl#(0):", [[fmt(v) for v in row] for row in sol.metric_sharp_at_origin])
    print("Hess(V_cl)(0):", [[fmt(v) for v in row] for row in sol.hessian_at_origin])
    print("metricPD:", cert.metric_pd, " hessianPD:", cert.hessian_pd)

    sim = cfg.sim_config()
    closed = simulate_closed(sol, sim)
    opened = simulate_open_with_feedback(system, sol, sim)
    print(f"closed-loop energy drift {energy_drift(closed):.2e}, open loop + feedback {energy_drift(opened):.2e}")


if __name__ == "__main__":
    main()
