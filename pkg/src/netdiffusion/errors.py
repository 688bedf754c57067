"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: ``DataError`` -> 2, ``NumericalError`` -> 3.
"""

from __future__ import annotations


class DiffusionError(Exception):
    """Base class for all library errors."""


class DataError(DiffusionError, ValueError):
    """Malformed input: wrong shapes, non-finite entries, bad files."""


class DimensionError(DataError):
    """Operands whose dimensions do not conform."""


class ParseError(DataError):
    """A text file could not be parsed.

    ``line`` is 1-based and may be ``None`` for whole-file problems.
    """

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
        if line is not None:
            where = f"{where}:{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class NumericalError(DiffusionError):
    """A computation that cannot produce a trustworthy number."""


class SingularSystemError(NumericalError):
    """``I - A`` (or ``A``) is singular to working precision."""

    def __init__(self, message: str, condition: float):
        self.condition = condition
        super().__init__(f"{message} (condition estimate {condition:.3e})")


class ConvergenceError(NumericalError):
    """An eigenvalue/singular value routine failed to converge."""


class NonConvergentModelError(NumericalError):
    """Equilibrium requested for a model whose spectral radius is >= 1."""

    def __init__(self, spectral_radius: float):
        self.spectral_radius = spectral_radius
        super().__init__(
            f"spectral radius {spectral_radius:.6g} >= 1: the recurrence does not "
            "converge, so the algebraic fixed point is not its limit"
        )


class FJConditionError(DataError):
    """One or more Friedkin-Johnsen conditions on (S, G) are violated.

    ``violations`` maps condition name (``"range"``, ``"susceptibility"``,
    ``"convexity"``, ``"self_influence"``) to a human-readable detail.
    """

    def __init__(self, violations: dict[str, str]):
        self.violations = dict(violations)
        detail = "; ".join(f"{k}: {v}" for k, v in self.violations.items())
        super().__init__(f"Friedkin-Johnsen conditions violated: {detail}")


class UndefinedCorrelationError(DataError):
    """Graph correlation requested for a graph with constant off-diagonal."""


class CalibrationError(NumericalError):
    """Attenuation calibration impossible (every sampled graph has rho = 0)."""


class StudyError(DiffusionError):
    """Every replicate at some rate aborted."""


class RegimeWarning(UserWarning):
    """Inputs fall outside the regime where an approximation is intended."""


class StabilityWarning(UserWarning):
    """Continuous-time fixed point is not asymptotically stable."""
