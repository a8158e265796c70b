"""Exception hierarchy.  Every error carries the module it came from."""

from __future__ import annotations


class ShaperError(Exception):
    """Base class; ``module`` names the pipeline stage that raised."""

    module = "shaper"

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def __str__(self) -> str:
        return f"[{self.module}] {self.message}"


class JetError(ShaperError, ValueError):
    module = "jet_core"


class ValidationError(ShaperError, ValueError):
    module = "geometry"


class ControllabilityError(ShaperError):
    module = "linear_analysis"


class InfeasibleTargetError(ShaperError):
    module = "linear_analysis"


class InconsistentSystemError(ShaperError):
    """A formal order-by-order solve hit an unsatisfiable equation."""

    module = "lambda_solver"

    def __init__(self, message: str, order: int, row: str, module: str | None = None):
        super().__init__(message, order=order, row=row)
        self.order = order
        self.row = row
        if module:
            self.module = module


class DegenerateCandidateError(ShaperError):
    module = "lambda_solver"


class FactorizationError(ShaperError):
    module = "lambda_solver"


class SynthesisError(ShaperError):
    module = "shaping_synthesis"

    def __init__(self, message: str, obstruction: str | None = None):
        super().__init__(message, obstruction=obstruction)
        self.obstruction = obstruction


class SimulationError(ShaperError):
    module = "simulator"


class ParseError(ShaperError, ValueError):
    """Syntax error in a polynomial expression, with its location."""

    module = "cli_io"

    def __init__(self, message: str, text: str, pos: int, expected: tuple[str, ...] = (), line: int = 1):
        self.text = text
        self.pos = pos
        self.line = line
        self.column = pos + 1
        self.expected = tuple(expected)
        loc = f"line {line}, column {self.column}"
        exp = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{loc}: {message}{exp}")


class ConfigError(ShaperError, ValueError):
    module = "cli_io"
