"""System definition files.

INI syntax with three sections::

    [system]
    n = 2
    order = 4                      ; optional, default 4
    g_1_1 = (q2)^2 + 1             ; upper triangle required (1-based indices)
    g_1_2 = 0
    g_2_2 = (q1)^2 + 1
    potential = -(q1)^2 + 2*q1*q2 + (q2)^2

    [synthesis]                    ; optional
    lambda11 = -191/100            ; lambda_1^1 at the origin
    metric_2_2 = 43/10             ; actuated block of G_cl#(0)
    hessian_2_2 = 1                ; actuated block of Hess(V_cl)(0)
    spectrum = 1, 3/2              ; target eigenvalues instead of pins

    [simulation]                   ; optional
    q0 = 0.01, 0.01
    v0 = 0, 0
    horizon = 10
    step = 0.001

Lower-triangle entries ``g_j_i`` may be given too; they must then agree with
the upper triangle, otherwise validation reports the asymmetric pair.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError, ParseError
from .geometry import DEFAULT_ORDER, MechanicalSystem
from .parsing import parse_polynomial
from .simulator import SimConfig

_ENTRY = re.compile(r"g_(\d+)_(\d+)$")
_BLOCK = re.compile(r"(metric|hessian)_(\d+)_(\d+)$")


def parse_rational(text: str, where: str = "value") -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{where}: expected a rational p/q, got {text.strip()!r}") from None


def _rational_list(text: str, where: str) -> list[Fraction]:
    return [parse_rational(p, where) for p in text.split(",") if p.strip()]


def _float_list(text: str, where: str) -> list[float]:
    try:
        return [float(Fraction(p.strip())) if "/" in p else float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"{where}: expected comma-separated numbers, got {text.strip()!r}") from None


@dataclass
class SystemConfig:
    n: int
    order: int
    metric: dict[tuple[int, int], str]  # 0-based (i, j) -> expression text
    potential: str
    lambda11: Fraction | None = None
    metric_block: dict[tuple[int, int], Fraction] = field(default_factory=dict)
    hessian_block: dict[tuple[int, int], Fraction] = field(default_factory=dict)
    spectrum: list[Fraction] | None = None
    simulation: dict = field(default_factory=dict)
    source: str = "<config>"

    def with_order(self, order: int | None) -> "SystemConfig":
        if order is None:
            return self
        return replace(self, order=order)

    def build_system(self) -> MechanicalSystem:
        """Parse every expression and validate the resulting system."""
        n, order = self.n, self.order
        notices: list[str] = []
        jets = {}
        for (i, j), text in sorted(self.metric.items()):
            key = f"g_{i + 1}_{j + 1}"
            jets[(i, j)] = self._parse(text, key, notices)
        metric = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                if (i, j) not in jets:
                    raise ConfigError(f"{self.source} [system]: missing metric entry g_{i + 1}_{j + 1}")
                metric[i][j] = jets[(i, j)]
                metric[j][i] = jets.get((j, i), jets[(i, j)])
        potential = self._parse(self.potential, "potential", notices)
        return MechanicalSystem(metric, potential, order, tuple(notices))

    def _parse(self, text, key, notices):
        try:
            return parse_polynomial(text, self.n, self.order, notices, label=key)
        except ParseError as exc:
            raise ConfigError(f"{self.source} [system] {key}: {exc.message}") from exc

    def sim_config(self, **overrides) -> SimConfig:
        opts = dict(self.simulation)
        opts.update({k: v for k, v in overrides.items() if v is not None})
        n = self.n
        q0 = opts.get("q0", [1e-2] * n)
        v0 = opts.get("v0", [0.0] * n)
        if len(q0) != n or len(v0) != n:
            raise ConfigError(f"{self.source} [simulation]: q0 and v0 need {n} entries")
        return SimConfig(q0, v0, horizon=opts.get("horizon", 10.0), step=opts.get("step", 1e-3))


def load_config(path: str | Path) -> SystemConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def parse_config(text: str, source: str = "<config>") -> SystemConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if not cp.has_section("system"):
        raise ConfigError(f"{source}: missing [system] section")
    sysec = cp["system"]
    try:
        n = int(sysec.get("n", ""))
    except ValueError:
        raise ConfigError(f"{source} [system]: n must be an integer") from None
    if n < 2:
        raise ConfigError(f"{source} [system]: n must be at least 2")
    order = sysec.get("order")
    try:
        order = int(order) if order is not None else DEFAULT_ORDER
    except ValueError:
        raise ConfigError(f"{source} [system]: order must be an integer") from None
    metric = {}
    for key, value in sysec.items():
        m = _ENTRY.match(key)
        if m:
            i, j = int(m.group(1)) - 1, int(m.group(2)) - 1
            if not (0 <= i < n and 0 <= j < n):
                raise ConfigError(f"{source} [system]: metric entry {key} outside 1..{n}")
            metric[(i, j)] = value
        elif key not in ("n", "order", "potential"):
            raise ConfigError(f"{source} [system]: unknown key {key!r}")
    if "potential" not in sysec:
        raise ConfigError(f"{source} [system]: missing potential")
    cfg = SystemConfig(n, order, metric, sysec["potential"], source=source)
    if cp.has_section("synthesis"):
        for key, value in cp["synthesis"].items():
            where = f"{source} [synthesis] {key}"
            m = _BLOCK.match(key)
            if key == "lambda11":
                cfg.lambda11 = parse_rational(value, where)
            elif key == "spectrum":
                cfg.spectrum = _rational_list(value, where)
            elif m:
                i, j = int(m.group(2)) - 1, int(m.group(3)) - 1
                block = cfg.metric_block if m.group(1) == "metric" else cfg.hessian_block
                block[(min(i, j), max(i, j))] = parse_rational(value, where)
            else:
                raise ConfigError(f"{where}: unknown key")
    if cp.has_section("simulation"):
        sim = {}
        for key, value in cp["simulation"].items():
            where = f"{source} [simulation] {key}"
            if key in ("q0", "v0"):
                sim[key] = _float_list(value, where)
            elif key in ("horizon", "step"):
                sim[key] = _float_list(value, where)[0]
            else:
                raise ConfigError(f"{where}: unknown key")
        cfg.simulation = sim
    for extra in cp.sections():
        if extra not in ("system", "synthesis", "simulation"):
            raise ConfigError(f"{source}: unknown section [{extra}]")
    return cfg
