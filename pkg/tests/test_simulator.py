import io
import math
from types import SimpleNamespace

import numpy as np
import pytest

from _systems import A_PIN, C_PIN, K_PIN, constant_system, two_link
from shaper.errors import SimulationError
from shaper.simulator import (
    SimConfig,
    compare_trajectories,
    energy_drift,
    simulate_closed,
    simulate_open_with_feedback,
    simulate_unforced,
)
from shaper.synthesis import Pins, assemble_feedback, synthesize

G0 = [[2, "1/2"], ["1/2", 1]]
H0 = [[-2, 1], [1, 1]]


def _trivial_solution(s):
    G = [list(r) for r in s.metric]
    return SimpleNamespace(system=s, metric=G, potential=s.potential, feedback=assemble_feedback(s, G, s.potential))


@pytest.fixture(scope="module")
def constant_solution():
    from fractions import Fraction

    s = constant_system([[Fraction(v) for v in row] for row in G0], H0)
    return s, synthesize(s)


@pytest.fixture(scope="module")
def pinned():
    s = two_link()
    return s, synthesize(s, pins=Pins(A_PIN, {(1, 1): C_PIN}, {(1, 1): K_PIN}))


def test_free_particle_straight_line():
    s = constant_system([[1, 0], [0, 1]], [[0, 0], [0, 0]])
    cfg = SimConfig([0.5, -1.0], [1.0, 0.0], horizon=2.0)
    tr = simulate_open_with_feedback(s, _trivial_solution(s), cfg)
    assert np.allclose(tr.q, np.array([0.5, -1.0]) + np.outer(tr.times, [1.0, 0.0]), atol=1e-10)


def test_harmonic_oscillator_period():
    s = constant_system([[1, 0], [0, 1]], [[1, 0], [0, 1]])
    steps = 6283
    cfg = SimConfig([1.0, 0.0], [0.0, 0.5], horizon=2 * math.pi, step=2 * math.pi / steps)
    tr = simulate_unforced(s, cfg)
    assert len(tr.times) == steps + 1
    assert np.allclose(tr.q[-1], [1.0, 0.0], atol=1e-6)
    assert np.allclose(tr.v[-1], [0.0, 0.5], atol=1e-6)


def test_rk4_fourth_order():
    s = constant_system([[1, 0], [0, 1]], [[1, 0], [0, 1]])
    errs = []
    for h in (0.1, 0.05):
        tr = simulate_unforced(s, SimConfig([1.0, 0.0], [0.0, 0.0], horizon=1.0, step=h))
        errs.append(abs(tr.q[-1, 0] - math.cos(1.0)))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.1)


def test_sample_count_and_csv_export():
    s = constant_system([[1, 0], [0, 1]], [[1, 0], [0, 1]])
    tr = simulate_unforced(s, SimConfig([0.1, 0.0], [0.0, 0.0], horizon=0.01, step=1e-3))
    assert len(tr.times) == 11
    buf = io.StringIO()
    tr.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,q1,q2,v1,v2,E"
    assert len(lines) == 12
    first = lines[1].split(",")
    assert len(first) == 6 and float(first[1]) == 0.1
    rows = [list(map(float, line.split(","))) for line in lines[1:]]
    assert rows == [[t, *q, *v, e] for t, q, v, e in zip(tr.times, tr.q, tr.v, tr.energies)]
    assert float(lines[-1].split(",")[0]) == pytest.approx(0.01)


def test_constant_metric_feedback_is_exact(constant_solution):
    s, sol = constant_solution
    cfg = SimConfig([0.1, -0.05], [0.0, 0.1], horizon=1.0)
    dev = compare_trajectories(simulate_open_with_feedback(s, sol, cfg), simulate_closed(sol, cfg))
    assert dev < 1e-8


def test_closed_loop_energy_drift(constant_solution):
    _, sol = constant_solution
    tr = simulate_closed(sol, SimConfig([0.1, -0.05], [0.0, 0.1], horizon=10.0))
    assert energy_drift(tr) < 1e-8
    assert energy_drift(tr, sol.metric, sol.potential) == pytest.approx(energy_drift(tr), abs=1e-15)


def test_open_loop_energy_in_closed_loop_quantities(constant_solution):
    s, sol = constant_solution
    tr = simulate_open_with_feedback(s, sol, SimConfig([0.1, -0.05], [0.0, 0.1], horizon=10.0, energy="closed"))
    assert energy_drift(tr) < 1e-6


def test_equilibrium_stays_put(pinned):
    s, sol = pinned
    cfg = SimConfig([0.0, 0.0], [0.0, 0.0], horizon=1.0)
    for tr in (simulate_closed(sol, cfg), simulate_open_with_feedback(s, sol, cfg)):
        assert np.max(np.abs(tr.states)) < 1e-15
        assert energy_drift(tr) == 0


def test_time_reversal(constant_solution):
    _, sol = constant_solution
    fwd = simulate_closed(sol, SimConfig([0.1, -0.05], [0.2, 0.1], horizon=2.0))
    back = simulate_closed(sol, SimConfig(list(fwd.q[-1]), list(-fwd.v[-1]), horizon=2.0))
    assert np.allclose(back.q[-1], [0.1, -0.05], atol=1e-10)
    assert np.allclose(-back.v[-1], [0.2, 0.1], atol=1e-10)


def test_identity_solution_matches_unforced():
    s = two_link()
    sol = _trivial_solution(s)
    cfg = SimConfig([0.05, 0.02], [0.0, 0.0], horizon=1.0)
    assert compare_trajectories(simulate_closed(sol, cfg), simulate_unforced(s, cfg)) == 0


def test_indefinite_closed_loop_bounded_small_amplitude(pinned):
    s, sol = pinned
    cfg = SimConfig([1e-2, 1e-2], [0.0, 0.0], horizon=10.0)
    for tr in (simulate_closed(sol, cfg), simulate_open_with_feedback(s, sol, cfg)):
        assert not tr.diverged
        assert np.max(np.abs(tr.q)) < 10 * 1e-2


def test_divergence_is_flagged():
    s = constant_system([[1, 0], [0, 1]], [[-1, 0], [0, -1]])
    tr = simulate_unforced(s, SimConfig([1.0, 0.0], [0.0, 0.0], horizon=40.0, step=1e-2))
    assert tr.diverged and tr.times[-1] < 40.0 and tr.notes


def test_grid_mismatch():
    s = constant_system([[1, 0], [0, 1]], [[1, 0], [0, 1]])
    a = simulate_unforced(s, SimConfig([0.1, 0], [0, 0], horizon=0.1))
    b = simulate_unforced(s, SimConfig([0.1, 0], [0, 0], horizon=0.2))
    with pytest.raises(SimulationError):
        compare_trajectories(a, b)
    assert compare_trajectories(a, a) == 0


def test_config_validation():
    with pytest.raises(SimulationError):
        SimConfig([0, 0], [0, 0], step=0)
    with pytest.raises(SimulationError):
        SimConfig([0, 0], [0, 0], horizon=1e-4, step=1e-3)
    with pytest.raises(SimulationError):
        SimConfig([0, 0], [0, 0], integrator="euler")
