"""Two-link system: certified closed loop with an indefinite metric.

The unactuated Hessian entry is negative, so every admissible closed-loop
metric is indefinite.  With pins a = -191/100, c = 43/10, k = 1 the product
G_cl#(0) Hess(V_cl)(0) still has a real positive, diagonalizable spectrum and
the linearized closed loop is stable.  Run: python demos/two_link_indefinite.py
"""

from fractions import Fraction
from pathlib import Path

import numpy as np

from shaper.config import load_config
from shaper.exact import fmt
from shaper.simulator import compare_trajectories, energy_drift, simulate_closed, simulate_open_with_feedback
from shaper.synthesis import Pins, synthesize

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "indefinite_metric.ini"


def main():
    cfg = load_config(CONFIG)
    system = cfg.build_system()
    pins = Pins(cfg.lambda11, cfg.metric_block, cfg.hessian_block)
    sol = synthesize(system, pins=pins)
    cert = sol.certificate

    print("product:", [[fmt(v) for v in row] for row in cert.product])
    print("eigenvalues:", [round(z.real, 6) for z in cert.spectral.eigenvalues])
    print("metricPD:", cert.metric_pd, " certificate:", cert.ok)
    print("V_cl =", sol.potential.to_str())
    print()
    print(sol.obstruction)
    print()

    # small initial conditions stay small; the truncation error shrinks like eps^5
    for eps in (1e-2, 1e-3):
        sim = cfg.sim_config(q0=[eps, eps])
        a = simulate_open_with_feedback(system, sol, sim)
        b = simulate_closed(sol, sim)
        print(
            f"eps={eps:g}: max|q|={np.abs(b.q).max():.3e}  deviation={compare_trajectories(a, b):.3e}"
            f"  drift={energy_drift(b):.3e}"
        )

    # another certified choice: trace 2, det 4/5, still indefinite
    alt = synthesize(system, pins=Pins(Fraction(-10, 11), {(1, 1): Fraction(2)}, {(1, 1): Fraction(2)}))
    print("\nwith a=-10/11, c=2, k=2:", [[fmt(v) for v in row] for row in alt.certificate.product],
          "certificate:", alt.certificate.ok)


if __name__ == "__main__":
    main()
