"""Fixed-step RK4 integration of open-loop-with-feedback and closed-loop dynamics."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import SimulationError
from .geometry import MechanicalSystem
from .numeric import MechanicalEvaluator

DIVERGENCE_NORM = 1e6


@dataclass(frozen=True)
class SimConfig:
    q0: Sequence[float]
    v0: Sequence[float]
    horizon: float = 10.0
    step: float = 1e-3
    integrator: str = "rk4"
    energy: str = "closed"  # which metric/potential pair measures E

    def __post_init__(self):
        if self.step <= 0:
            raise SimulationError("step must be positive")
        if self.horizon < self.step:
            raise SimulationError("horizon must be at least one step")
        if self.integrator != "rk4":
            raise SimulationError(f"unknown integrator {self.integrator!r}; only 'rk4' is available")
        if self.energy not in ("open", "closed"):
            raise SimulationError("energy reference must be 'open' or 'closed'")
        if len(self.q0) != len(self.v0):
            raise SimulationError("q0 and v0 have different lengths")

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.step))


@dataclass
class Trajectory:
    times: np.ndarray
    q: np.ndarray  # (samples, n)
    v: np.ndarray
    energies: np.ndarray
    diverged: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.q.shape[1]

    @property
    def states(self) -> np.ndarray:
        return np.hstack([self.q, self.v])

    def to_csv(self, path_or_file) -> None:
        n = self.n
        header = ["t"] + [f"q{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)] + ["E"]
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for t, q, v, e in zip(self.times, self.q, self.v, self.energies):
                w.writerow(["%.17g" % x for x in (t, *q, *v, e)])
        finally:
            if own:
                fh.close()


def _integrate(accel: Callable, energy: Callable, cfg: SimConfig) -> Trajectory:
    h = cfg.step
    N = cfg.steps
    q = np.array(cfg.q0, dtype=float)
    v = np.array(cfg.v0, dtype=float)
    n = len(q)
    Q = np.empty((N + 1, n))
    Vs = np.empty((N + 1, n))
    Q[0], Vs[0] = q, v

    def f(q, v):
        return v, accel(q, v)

    last = N
    diverged = False
    for i in range(N):
        k1q, k1v = f(q, v)
        k2q, k2v = f(q + 0.5 * h * k1q, v + 0.5 * h * k1v)
        k3q, k3v = f(q + 0.5 * h * k2q, v + 0.5 * h * k2v)
        k4q, k4v = f(q + h * k3q, v + h * k3v)
        q = q + h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q)
        v = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(v))) or np.linalg.norm(np.hstack([q, v])) > DIVERGENCE_NORM:
            diverged = True
            last = i
            break
        Q[i + 1], Vs[i + 1] = q, v
    Q, Vs = Q[: last + 1], Vs[: last + 1]
    times = np.arange(last + 1) * h
    E = np.array([energy(a, b) for a, b in zip(Q, Vs)])
    notes = [f"diverged after t = {times[-1]:.6g}"] if diverged else []
    return Trajectory(times, Q, Vs, E, diverged, notes)


def _closed_evaluator(solution) -> MechanicalEvaluator:
    return MechanicalEvaluator(solution.metric, solution.potential)


def simulate_unforced(sys: MechanicalSystem, cfg: SimConfig) -> Trajectory:
    ev = sys.evaluator
    return _integrate(lambda q, v: ev.acceleration(q, v), ev.energy, cfg)


def simulate_open_with_feedback(sys: MechanicalSystem, solution, cfg: SimConfig) -> Trajectory:
    """Open-loop equations driven by ``u_shp``, whose unactuated entry is dropped."""
    ev = sys.evaluator
    u = solution.feedback
    energy = _closed_evaluator(solution).energy if cfg.energy == "closed" else ev.energy
    return _integrate(lambda q, v: ev.acceleration(q, v, u(q, v)), energy, cfg)


def simulate_closed(solution, cfg: SimConfig) -> Trajectory:
    """Conservative closed loop with metric ``G_cl`` and potential ``V_cl``."""
    ev = _closed_evaluator(solution)
    energy = ev.energy if cfg.energy == "closed" else solution.system.evaluator.energy
    return _integrate(lambda q, v: ev.acceleration(q, v), energy, cfg)


def compare_trajectories(a: Trajectory, b: Trajectory) -> float:
    """Sup-norm deviation of the states over the common time grid."""
    if a.times.shape != b.times.shape or not np.allclose(a.times, b.times, rtol=0, atol=1e-12):
        raise SimulationError("trajectories are sampled on different time grids")
    return float(np.max(np.abs(a.states - b.states)))


def energy_drift(traj: Trajectory, metric=None, potential=None) -> float:
    """``max |E(t) - E(0)|``, recomputing E when a metric and potential are given."""
    if metric is not None:
        ev = MechanicalEvaluator(metric, potential)
        E = np.array([ev.energy(q, v) for q, v in zip(traj.q, traj.v)])
    else:
        E = traj.energies
    return float(np.max(np.abs(E - E[0])))
