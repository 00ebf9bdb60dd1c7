"""Physical parameters (sigma, beta, rho) and the derived lambda, epsilon."""
import math
from dataclasses import dataclass, replace
from typing import Optional

from .exceptions import ConfigError

# lambda at which both periodic branches are born from the homoclinic loops
LAMBDA_HOMOCLINIC_LIMIT = 2.0 / 3.0


@dataclass(frozen=True)
class Params:
    """
    Lorenz parameters. lambda = (sigma+1)/(beta+2) and epsilon = rho**-1/2 are
    always derived, never stored.
    """

    sigma: float
    beta: float
    rho: Optional[float] = None

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if not self.beta > 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if self.rho is not None and not self.rho > 0:
            raise ConfigError(f"rho must be positive, got {self.rho}")

    @property
    def lam(self) -> float:
        return (self.sigma + 1.0) / (self.beta + 2.0)

    @property
    def epsilon(self) -> float:
        if self.rho is None:
            raise ConfigError("epsilon needs rho")
        return 1.0 / math.sqrt(self.rho)

    @property
    def rho_star(self) -> float:
        """Subcritical Hopf value of rho for X+/-; infinite when sigma <= beta + 1."""
        if self.sigma <= self.beta + 1.0:
            return math.inf
        return self.sigma * (self.sigma + self.beta + 3.0) / (self.sigma - self.beta - 1.0)

    @classmethod
    def from_lambda(cls, lam: float, beta: float, rho: Optional[float] = None) -> "Params":
        """Fix beta and choose sigma = lambda (beta + 2) - 1."""
        return cls(sigma=lam * (beta + 2.0) - 1.0, beta=beta, rho=rho)

    def with_rho(self, rho: Optional[float]) -> "Params":
        return replace(self, rho=rho)

    def as_dict(self) -> dict:
        return {"sigma": self.sigma, "beta": self.beta, "rho": self.rho, "lambda": self.lam}
