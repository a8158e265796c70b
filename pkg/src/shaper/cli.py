"""``shaper`` command line: validate, analyse, synthesize and simulate a system file."""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import exact
from .config import SystemConfig, load_config, parse_rational
from .errors import ConfigError, ShaperError
from .exact import fmt
from .geometry import MechanicalSystem, hessian_at_origin
from .lambda_solver import coefficient_name, formal_lambda_solve
from .linear import kalman_controllable, linearize
from .simulator import compare_trajectories, energy_drift, simulate_closed, simulate_open_with_feedback
from .synthesis import Pins, ShapingSolution, compatibility_check, synthesize

SCHEMA = "shaper.synthesis/1"
COMMANDS = ("validate", "controllability", "lambda", "synthesize", "simulate", "report")


def _matrix(m) -> str:
    return "[" + ", ".join("[" + ", ".join(fmt(v) for v in row) + "]" for row in m) + "]"


def _heading(title: str) -> list[str]:
    return [title, "=" * len(title)]


# ---------------------------------------------------------------------------
# report sections


def validate_section(cfg: SystemConfig, system: MechanicalSystem) -> list[str]:
    lines = _heading("validate")
    lines.append(f"source: {cfg.source}")
    lines.append(f"n = {system.n}, truncation order K = {system.order}")
    lines.append("actuated codistribution: span{" + ", ".join(f"dq{i + 1}" for i in range(1, system.n)) + "}")
    lines.append(f"G(0) = {_matrix(system.metric_at_origin)} (positive-definite)")
    lines.append(f"Hess(V_ol)(0) = {_matrix(hessian_at_origin(system.potential))}")
    lines.append("equilibrium: dV_ol/dq1(0) = 0")
    for note in system.notices:
        lines.append(f"notice: {note}")
    lines.append("status: valid")
    return lines


def controllability_section(system: MechanicalSystem) -> list[str]:
    ok, r = kalman_controllable(linearize(system))
    lines = _heading("controllability")
    lines.append(f"Kalman rank = {r} of {2 * system.n}")
    lines.append("linearization: " + ("controllable" if ok else "not controllable"))
    return lines


def lambda_section(system: MechanicalSystem) -> list[str]:
    rep = formal_lambda_solve(system)
    n = system.n
    lines = _heading("lambda")
    names = ", ".join(f"{coefficient_name(j, (0,) * n)[0]} = lambda_1^{j + 1}" for j in range(n))
    lines.append(f"unknowns: Taylor coefficients of {names}; digits are exponents of q1..q{n}")
    lines.append(f"equations solved up to degree {rep.order - 1} (truncation order K = {rep.order})")
    for d, forced, free in rep.by_degree():
        lines.append(f"degree {d}:")
        for (j, alpha), v in forced:
            lines.append(f"  {coefficient_name(j, alpha)} = {fmt(v)} (forced)")
        for j, alpha in free:
            lines.append(f"  {coefficient_name(j, alpha)} free")
    if rep.relations:
        lines.append("relations among free coefficients:")
        lines += [f"  {r}" for r in rep.relations]
    zero = (0,) * n
    lines.append(
        f"lambda_1^1(q0) = {coefficient_name(0, zero)}: "
        + ("forced" if rep.is_forced(0, zero) else "free")
    )
    if rep.origin_tail_free():
        lines.append("lambda_1^j(q0), j >= 2: admissible directions " + ", ".join(
            "(" + ", ".join(fmt(v) for v in vec) + ")" for vec in rep.origin_tail_basis))
    else:
        lines.append("lambda_1^j(q0), j >= 2: all forced to zero")
    return lines


def synthesis_section(sol: ShapingSolution) -> list[str]:
    system = sol.system
    cert = sol.certificate
    lines = _heading("synthesize")
    lines.append(f"branch: {sol.branch}")
    lam0 = sol.lam.at_origin
    lines.append(f"lambda_1^1(q0) = {fmt(lam0[0][0])}")
    lines.append(f"lambda(q0) = {_matrix(lam0)}")
    lines.append(f"G_cl#(q0) = {_matrix(sol.metric_sharp_at_origin)}")
    lines.append(f"G_cl(q0) = {_matrix(exact.inverse(sol.metric_sharp_at_origin))}")
    lines.append(f"Hess(V_cl)(q0) = {_matrix(sol.hessian_at_origin)}")
    lines.append(f"product G_cl#(q0) Hess(V_cl)(q0) = {_matrix(cert.product)}")
    lines.append("characteristic polynomial coefficients = [" + ", ".join(fmt(c) for c in cert.spectral.charpoly) + "]")
    eig = ", ".join(f"{z.real:.12g}" + (f"{z.imag:+.3g}i" if abs(z.imag) > 1e-12 else "") for z in cert.spectral.eigenvalues)
    lines.append(f"eigenvalues = [{eig}]")
    lines.append(f"real positive spectrum: {str(cert.spectral.real_positive).lower()}")
    lines.append(f"diagonalizable: {str(cert.spectral.diagonalizable).lower()}"
                 f" (eigenvector condition number {cert.spectral.eigvec_cond:.3e})")
    lines.append(f"metricPD = {str(cert.metric_pd).lower()}")
    lines.append(f"hessianPD = {str(cert.hessian_pd).lower()}")
    lines.append(f"certificate: {cert.kind}: " + ("pass" if cert.ok else "fail"))
    if not cert.metric_pd:
        lines.append("note: the closed-loop energy is not definite; stability evidence is spectral and by simulation")
    if sol.obstruction:
        lines.append("obstruction:")
        lines += [f"  {ln}" for ln in sol.obstruction.splitlines()]
    lines += [f"note: {n}" for n in sol.notes]
    compat = compatibility_check(system, sol.lam)
    lines.append(f"compatibility: {compat.verdict}")
    lines.append(
        "u_shp dq1-component: "
        + ("zero" if sol.feedback.is_actuated_only() else "NONZERO")
        + f" to order {system.order - 1}"
    )
    n = system.n
    lines.append("closed-loop metric G_cl:")
    for i in range(n):
        for j in range(i, n):
            lines.append(f"  G_cl[{i + 1},{j + 1}] = {sol.metric[i][j].to_str()}")
    lines.append(f"closed-loop potential V_cl = {sol.potential.to_str()}")
    lines.append("lambda column:")
    for j, jet in enumerate(sol.lam.column):
        lines.append(f"  lambda_1^{j + 1} = {jet.to_str()}")
    if sol.lambda_report is not None:
        lines.append("coefficient ledger:")
        lines += [f"  {ln}" for ln in sol.lambda_report.ledger_lines()]
    return lines


def simulation_section(system, sol, cfg: SystemConfig, out: Path | None, **overrides) -> list[str]:
    sim = cfg.sim_config(**overrides)
    a = simulate_open_with_feedback(system, sol, sim)
    b = simulate_closed(sol, sim)
    lines = _heading("simulate")
    lines.append(f"integrator: RK4, step {sim.step:g}, horizon {sim.horizon:g}")
    lines.append("q0 = [" + ", ".join(f"{x:.6g}" for x in sim.q0) + "], v0 = [" + ", ".join(f"{x:.6g}" for x in sim.v0) + "]")
    for name, tr in (("open loop + u_shp", a), ("closed loop", b)):
        flag = "diverged" if tr.diverged else "completed"
        lines.append(f"{name}: {flag}, {len(tr.times)} samples, max |q| = {np.abs(tr.q).max():.6e}")
    if not a.diverged and not b.diverged:
        lines.append(f"max state deviation = {compare_trajectories(a, b):.6e}")
    lines.append(f"closed-loop energy drift (closed loop) = {energy_drift(b):.6e}")
    lines.append(f"closed-loop energy drift (open loop + u_shp) = {energy_drift(a):.6e}")
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        a.to_csv(out / "open_loop.csv")
        b.to_csv(out / "closed_loop.csv")
        lines.append(f"trajectories written to {out / 'open_loop.csv'} and {out / 'closed_loop.csv'}")
    return lines


def solution_document(sol: ShapingSolution) -> dict:
    """Machine-readable synthesis result with exact values as ``p/q`` strings."""
    cert = sol.certificate
    n = sol.system.n

    def mat(m):
        return [[fmt(v) for v in row] for row in m]

    return {
        "schema": SCHEMA,
        "n": n,
        "order": sol.system.order,
        "branch": sol.branch,
        "lambda11": fmt(sol.lam.at_origin[0][0]),
        "lambda_origin": mat(sol.lam.at_origin),
        "closed_loop_metric_sharp_origin": mat(sol.metric_sharp_at_origin),
        "closed_loop_metric_origin": mat(exact.inverse(sol.metric_sharp_at_origin)),
        "hessian_origin": mat(sol.hessian_at_origin),
        "product": mat(cert.product),
        "charpoly": [fmt(c) for c in cert.spectral.charpoly],
        "eigenvalues": [float(z.real) for z in cert.spectral.eigenvalues],
        "metricPD": cert.metric_pd,
        "hessianPD": cert.hessian_pd,
        "certificate": {
            "kind": cert.kind,
            "pass": cert.ok,
            "real_positive": cert.spectral.real_positive,
            "diagonalizable": cert.spectral.diagonalizable,
        },
        "closed_loop_metric": [[sol.metric[i][j].to_str() for j in range(n)] for i in range(n)],
        "closed_loop_potential": sol.potential.to_str(),
        "lambda_column": [j.to_str() for j in sol.lam.column],
        "obstruction": sol.obstruction,
        "ledger": sol.lambda_report.ledger_lines() if sol.lambda_report else [],
    }


# ---------------------------------------------------------------------------
# argument handling


_PIN = re.compile(r"^\s*(?:(\d+)\s*,\s*(\d+)|([A-Za-z]))\s*=\s*(.+)$")


def _parse_block_pin(text: str, n: int, alias: str, flag: str) -> tuple[tuple[int, int], Fraction]:
    """``i,j=p/q`` (1-based, actuated block) or ``<alias>=p/q`` when n = 2."""
    m = _PIN.match(text)
    if m is None:
        raise ConfigError(f"{flag} {text!r}: expected i,j=p/q or {alias}=p/q")
    value = parse_rational(m.group(4), flag)
    if m.group(3) is not None:
        if m.group(3) != alias or n != 2:
            raise ConfigError(f"{flag} {text!r}: the short form {alias}=p/q names the (2,2) entry and needs n = 2")
        return (1, 1), value
    i, j = int(m.group(1)) - 1, int(m.group(2)) - 1
    if not (1 <= i < n and 1 <= j < n):
        raise ConfigError(f"{flag} {text!r}: entry must lie in the actuated block 2..{n}")
    return (min(i, j), max(i, j)), value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shaper", description="Energy-shaping synthesis for one degree of underactuation.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="system definition file (INI)")
    p.add_argument("--order", type=int, help="truncation order K (default: config value, else 4)")
    p.add_argument("--pin-lambda11", metavar="P/Q", help="value of lambda_1^1 at the origin")
    p.add_argument("--pin-metric", action="append", default=[], metavar="I,J=P/Q",
                   help="entry of the actuated block of G_cl#(0); 'c=p/q' for n = 2")
    p.add_argument("--pin-hess", action="append", default=[], metavar="I,J=P/Q",
                   help="entry of the actuated block of Hess(V_cl)(0); 'k=p/q' for n = 2")
    p.add_argument("--spectrum", metavar="S1,S2,...", help="target eigenvalues for pole placement")
    p.add_argument("--horizon", type=float, help="simulation horizon")
    p.add_argument("--step", type=float, help="simulation step")
    p.add_argument("--out", type=Path, help="directory for report, JSON result and CSV trajectories")
    return p


def _pins(args, cfg: SystemConfig) -> tuple[Pins, list[Fraction] | None]:
    lam = parse_rational(args.pin_lambda11, "--pin-lambda11") if args.pin_lambda11 else cfg.lambda11
    metric = dict(cfg.metric_block)
    hess = dict(cfg.hessian_block)
    for t in args.pin_metric:
        k, v = _parse_block_pin(t, cfg.n, "c", "--pin-metric")
        metric[k] = v
    for t in args.pin_hess:
        k, v = _parse_block_pin(t, cfg.n, "k", "--pin-hess")
        hess[k] = v
    spectrum = cfg.spectrum
    if args.spectrum:
        spectrum = [parse_rational(s, "--spectrum") for s in args.spectrum.split(",")]
    return Pins(lam, metric or None, hess or None), spectrum


_NEGATIVE = re.compile(r"^-\d")


def _glue_negative_values(argv: list[str]) -> list[str]:
    """``--pin-lambda11 -191/100`` -> ``--pin-lambda11=-191/100`` so argparse keeps the value."""
    out: list[str] = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_negative_values(argv))
    try:
        cfg = load_config(args.config).with_order(args.order)
        system = cfg.build_system()
        cmd = args.command
        lines: list[str] = []
        doc = None
        if cmd in ("validate", "report"):
            lines += validate_section(cfg, system)
        if cmd in ("controllability", "report"):
            lines += ([""] if lines else []) + controllability_section(system)
        if cmd in ("lambda", "report"):
            lines += ([""] if lines else []) + lambda_section(system)
        sol = None
        if cmd in ("synthesize", "simulate", "report"):
            pins, spectrum = _pins(args, cfg)
            sol = synthesize(system, pins=pins, spectrum=spectrum)
            doc = solution_document(sol)
            if cmd != "simulate":
                lines += ([""] if lines else []) + synthesis_section(sol)
        if cmd in ("simulate", "report"):
            lines += ([""] if lines else []) + simulation_section(
                system, sol, cfg, args.out, horizon=args.horizon, step=args.step
            )
        text = "\n".join(lines) + "\n"
        stdout.write(text)
        if args.out is not None:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / f"{cmd}.txt").write_text(text)
            if doc is not None:
                (args.out / "synthesis.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return 0
    except ShaperError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
