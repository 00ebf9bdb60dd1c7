"""Exception hierarchy shared by the numerical modules and the commands."""
from typing import Any, Optional


class LabError(Exception):
    """Base class for every failure raised by the lab."""

    exit_code = 1


class ModulusDomainError(LabError, ValueError):
    """Elliptic modulus (or derived argument) outside its admissible range."""


class DivergenceError(LabError):
    """A quantity diverged: K(1), a blown-up trajectory or a collapsed step size."""

    def __init__(self, message: str, last_state: Optional[Any] = None, last_time: Optional[float] = None):
        super().__init__(message)
        self.last_state = last_state
        self.last_time = last_time


class RegionMismatchError(LabError, ValueError):
    """Orbit evaluator called with (A, B) outside the region it describes."""


class FrameError(LabError, ValueError):
    """Original-frame and rescaled-frame states mixed in one computation."""


class NoBranchError(LabError):
    """No periodic-orbit branch exists for the requested lambda."""


class ConvergenceError(LabError):
    """An iteration (Newton, quadrature, finite differences) did not converge."""

    def __init__(self, message: str, best_residual: Optional[float] = None, iterations: Optional[int] = None):
        super().__init__(message)
        self.best_residual = best_residual
        self.iterations = iterations


class ConfigError(LabError):
    """Invalid run configuration."""

    exit_code = 2
