"""
Integrable limit of the rescaled Lorenz system.

At epsilon = 0 the rescaled equations xi' = eta, eta' = -xi zeta, zeta' = xi eta
conserve A = xi**2/2 - zeta and B = sqrt(eta**2 + zeta**2). Every level set is
one of: a symmetric periodic orbit L1 (|A| < B), a pair of asymmetric
periodic orbits L2+/- (A > B), a pair of homoclinic loops L3+/- (A = B) or
an equilibrium (A = -B, or B = 0). This module classifies (A, B), evaluates
the closed-form orbits and their period, action and frequency.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np

from .elliptic import EllipticModulus, ellip_KE, jacobi, sech
from .exceptions import RegionMismatchError
from .states import Frame, State3, reflect

logger = logging.getLogger(__name__)

REGION_TOL = 1e-12
# half-width of the tau window sampled on a homoclinic loop, in units of 1/sqrt(B)
HOMOCLINIC_HALF_WIDTH = 20.0

ArrayLike = Union[float, np.ndarray]

__all__ = [
    "ConservedPair", "Region", "OrbitTag", "OrbitFamily", "OrbitMeasures", "ActionDerivatives",
    "PolarState", "conserved", "classify_region", "eval_L1", "eval_L2", "eval_L3",
    "period_action_frequency", "action_derivatives", "to_polar", "from_polar", "reflect",
    "sample_orbit", "k1_modulus", "k2_modulus",
]


@dataclass(frozen=True)
class ConservedPair:
    A: ArrayLike
    B: ArrayLike

    def __post_init__(self):
        if np.any(np.asarray(self.B) < 0):
            raise RegionMismatchError(f"B must be non-negative, got {self.B}")


class Region(str, Enum):
    D1 = "D1"
    D2 = "D2"
    D3 = "D3"
    D4 = "D4"
    EQUILIBRIUM_LINE_B0 = "EquilibriumLineB0"
    UNPHYSICAL = "Unphysical"


class OrbitTag(str, Enum):
    L1 = "L1"
    L2_PLUS = "L2plus"
    L2_MINUS = "L2minus"
    L3_PLUS = "L3plus"
    L3_MINUS = "L3minus"
    EQUILIBRIUM_LINE = "EquilibriumLine"

    @property
    def sign(self) -> int:
        return -1 if self in (OrbitTag.L2_MINUS, OrbitTag.L3_MINUS) else 1


class OrbitMeasures(NamedTuple):
    T: float
    I: float
    Omega: float


class ActionDerivatives(NamedTuple):
    dI_dk: float
    dI_dB_k: float
    dI_dB_A: float


class PolarState(NamedTuple):
    xi: ArrayLike
    phi: ArrayLike
    B: ArrayLike


def conserved(s: State3) -> ConservedPair:
    s.require(Frame.RESCALED)
    return ConservedPair(A=0.5 * s.x * s.x - s.z, B=np.hypot(s.y, s.z))


def classify_region(p: ConservedPair, tol: float = REGION_TOL) -> Region:
    """
    Case analysis of (A, B) with a relative band around the diagonals A = +-B.

    Args:
        p: Conserved pair
        tol: Relative tolerance; 0 gives exact comparisons

    Returns:
        Region of the (A, B) half-plane
    """
    A, B = float(p.A), float(p.B)
    if B <= tol:
        return Region.EQUILIBRIUM_LINE_B0
    band = tol * max(1.0, B)
    if A < -B - band:
        return Region.UNPHYSICAL
    if abs(A + B) <= band:
        return Region.D4
    if abs(A - B) <= band:
        return Region.D3
    if A > B:
        return Region.D2
    return Region.D1


def k1_modulus(p: ConservedPair) -> EllipticModulus:
    """k1**2 = (A+B)/(2B), built from its complement (B-A)/(2B)."""
    return EllipticModulus.from_complement((p.B - p.A) / (2.0 * p.B))


def k2_modulus(p: ConservedPair) -> EllipticModulus:
    """k2**2 = 2/(1 + A/B), built from its complement (A-B)/(A+B)."""
    return EllipticModulus.from_complement((p.A - p.B) / (p.A + p.B))


def _require_region(p: ConservedPair, expected: Region, tol: float) -> None:
    region = classify_region(p, tol)
    if region is not expected:
        raise RegionMismatchError(f"(A, B) = ({p.A}, {p.B}) lies in {region.value}, expected {expected.value}")


def _l1_state(mod: EllipticModulus, B: float, tau: ArrayLike) -> State3:
    root_b = math.sqrt(B)
    sn, cn, dn = jacobi(root_b * np.asarray(tau, dtype=float), mod)
    k = mod.k
    return State3(2.0 * k * root_b * cn, -2.0 * k * B * dn * sn, B * (1.0 - 2.0 * mod.m * sn * sn))


def _l2_state(mod: EllipticModulus, B: float, tau: ArrayLike, sign: int) -> State3:
    root_b = math.sqrt(B)
    k = mod.k
    sn, cn, dn = jacobi(root_b * np.asarray(tau, dtype=float) / k, mod)
    return State3(sign * 2.0 * root_b * dn / k, -sign * 2.0 * B * sn * cn, B * (1.0 - 2.0 * sn * sn))


def _l3_state(B: float, tau: ArrayLike, sign: int) -> State3:
    root_b = math.sqrt(B)
    u = root_b * np.asarray(tau, dtype=float)
    sech_u, tanh_u = sech(u), np.tanh(u)
    return State3(sign * 2.0 * root_b * sech_u, -sign * 2.0 * B * tanh_u * sech_u, B * (1.0 - 2.0 * tanh_u * tanh_u))


def eval_L1(p: ConservedPair, tau: ArrayLike, tol: float = REGION_TOL) -> State3:
    _require_region(p, Region.D1, tol)
    return _l1_state(k1_modulus(p), float(p.B), tau)


def eval_L2(p: ConservedPair, tau: ArrayLike, sign: int = 1, tol: float = REGION_TOL) -> State3:
    _require_region(p, Region.D2, tol)
    return _l2_state(k2_modulus(p), float(p.B), tau, _unit_sign(sign))


def eval_L3(B: float, tau: ArrayLike, sign: int = 1) -> State3:
    if not B > 0:
        raise RegionMismatchError(f"homoclinic loops need B > 0, got {B}")
    return _l3_state(float(B), tau, _unit_sign(sign))


def _unit_sign(sign: int) -> int:
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    return sign


@dataclass(frozen=True)
class OrbitFamily:
    """Unperturbed orbit identified by its tag, (A, B) and elliptic modulus."""

    tag: OrbitTag
    pair: ConservedPair
    modulus: Optional[EllipticModulus] = None

    def __post_init__(self):
        if self.tag in (OrbitTag.L1, OrbitTag.L2_PLUS, OrbitTag.L2_MINUS) and self.modulus is None:
            raise RegionMismatchError(f"{self.tag.value} needs an elliptic modulus")

    @classmethod
    def for_pair(cls, p: ConservedPair, sign: int = 1, tol: float = REGION_TOL) -> "OrbitFamily":
        region = classify_region(p, tol)
        if region is Region.D1:
            return cls(OrbitTag.L1, p, k1_modulus(p))
        if region is Region.D2:
            tag = OrbitTag.L2_PLUS if _unit_sign(sign) > 0 else OrbitTag.L2_MINUS
            return cls(tag, p, k2_modulus(p))
        if region is Region.D3:
            tag = OrbitTag.L3_PLUS if _unit_sign(sign) > 0 else OrbitTag.L3_MINUS
            return cls(tag, p, EllipticModulus.from_k(1.0))
        if region in (Region.D4, Region.EQUILIBRIUM_LINE_B0):
            return cls(OrbitTag.EQUILIBRIUM_LINE, p)
        raise RegionMismatchError(f"(A, B) = ({p.A}, {p.B}) has no real orbit")

    @classmethod
    def symmetric(cls, modulus: EllipticModulus, B: float) -> "OrbitFamily":
        """L1 orbit from (k1, B); A = B(2 k1**2 - 1)."""
        return cls(OrbitTag.L1, ConservedPair(A=B * (modulus.m - modulus.mc), B=B), modulus)

    @classmethod
    def asymmetric(cls, modulus: EllipticModulus, B: float, sign: int = 1) -> "OrbitFamily":
        """L2 orbit from (k2, B); A = B(2/k2**2 - 1)."""
        tag = OrbitTag.L2_PLUS if _unit_sign(sign) > 0 else OrbitTag.L2_MINUS
        return cls(tag, ConservedPair(A=B * (1.0 + modulus.mc) / modulus.m, B=B), modulus)

    @property
    def is_periodic(self) -> bool:
        return self.tag in (OrbitTag.L1, OrbitTag.L2_PLUS, OrbitTag.L2_MINUS)

    def evaluate(self, tau: ArrayLike) -> State3:
        B = float(self.pair.B)
        if self.tag is OrbitTag.L1:
            return _l1_state(self.modulus, B, tau)
        if self.tag in (OrbitTag.L2_PLUS, OrbitTag.L2_MINUS):
            return _l2_state(self.modulus, B, tau, self.tag.sign)
        if self.tag in (OrbitTag.L3_PLUS, OrbitTag.L3_MINUS):
            return _l3_state(B, tau, self.tag.sign)
        tau = np.asarray(tau, dtype=float)
        zeros = np.zeros_like(tau)
        return State3(zeros, zeros + math.sqrt(max(B * B - float(self.pair.A) ** 2, 0.0)), zeros - float(self.pair.A))


def period_action_frequency(f: OrbitFamily) -> OrbitMeasures:
    """
    Period, action and frequency of an L1 or L2 orbit.

    For L2 the period is the two-loop period 4 K k2 / sqrt(B) over which the
    action 16 sqrt(B) E / k2 is accumulated; the closed forms repeat after half
    of it.

    Args:
        f: Orbit family with tag L1 or L2+/-

    Returns:
        OrbitMeasures(T, I, Omega)
    """
    if not f.is_periodic:
        raise RegionMismatchError(f"{f.tag.value} has no finite period")
    B = float(f.pair.B)
    root_b = math.sqrt(B)
    K, E = ellip_KE(f.modulus)
    if f.tag is OrbitTag.L1:
        T = 4.0 * K / root_b
        I = 16.0 * root_b * (E - f.modulus.mc * K)
    else:
        k = f.modulus.k
        T = 4.0 * K * k / root_b
        I = 16.0 * root_b * E / k
    return OrbitMeasures(T=T, I=I, Omega=1.0 / T)


def action_derivatives(f: OrbitFamily) -> ActionDerivatives:
    """Partial derivatives of the action in the (k, B) and (A, B) charts."""
    if not f.is_periodic:
        raise RegionMismatchError(f"{f.tag.value} has no action")
    B = float(f.pair.B)
    root_b = math.sqrt(B)
    K, E = ellip_KE(f.modulus)
    k = f.modulus.k
    I = period_action_frequency(f).I
    if f.tag is OrbitTag.L1:
        return ActionDerivatives(
            dI_dk=16.0 * root_b * k * K,
            dI_dB_k=I / (2.0 * B),
            dI_dB_A=4.0 * (2.0 * E - K) / root_b,
        )
    return ActionDerivatives(
        dI_dk=-16.0 * root_b * K / (k * k),
        dI_dB_k=I / (2.0 * B),
        dI_dB_A=4.0 * (2.0 * E - K * (1.0 + f.modulus.mc)) / (k * root_b),
    )


def to_polar(s: State3) -> PolarState:
    """zeta = B cos(phi), eta = B sin(phi)."""
    s.require(Frame.RESCALED)
    B = np.hypot(s.y, s.z)
    if np.any(B == 0):
        raise RegionMismatchError("polar angle undefined on the line B = 0")
    return PolarState(xi=s.x, phi=np.arctan2(s.y, s.z), B=B)


def from_polar(xi: ArrayLike, phi: ArrayLike, B: ArrayLike) -> State3:
    return State3(xi, B * np.sin(phi), B * np.cos(phi), Frame.RESCALED)


def sample_orbit(f: OrbitFamily, n: int = 400) -> Tuple[np.ndarray, State3]:
    """Sample one period (or a window of a homoclinic loop) on a uniform tau grid."""
    if f.is_periodic:
        tau = np.linspace(0.0, period_action_frequency(f).T, n)
    elif f.tag in (OrbitTag.L3_PLUS, OrbitTag.L3_MINUS):
        half = HOMOCLINIC_HALF_WIDTH / math.sqrt(float(f.pair.B))
        tau = np.linspace(-half, half, n)
    else:
        tau = np.linspace(0.0, 1.0, n)
    logger.debug(f"sampling {f.tag.value} at {n} points over [{tau[0]:.4g}, {tau[-1]:.4g}]")
    return tau, f.evaluate(tau)
