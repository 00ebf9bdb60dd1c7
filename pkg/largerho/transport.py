"""
Leading-order time averages and heat transport on the large-rho periodic orbits.

Transport is H = <XY>. At the nonzero equilibria it is beta(rho - 1); on the
symmetric and asymmetric orbits it is rho * h_j(lambda) + O(rho**1/2) with
h_j = beta(1 - R_j). The gap beta R_j to the equilibrium value is what keeps
the periodic attractors below the upper bound.
"""
import logging
from dataclasses import dataclass, replace
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize

from .elliptic import ellip_KE, find_kstar, ke_combination
from .exceptions import LabError, NoBranchError
from .melnikov import Branch, BranchPoint, rhs_sym, solve_sym_branch, sweep_branches
from .orbits import period_action_frequency
from .params import LAMBDA_HOMOCLINIC_LIMIT, Params

logger = logging.getLogger(__name__)

# Configuration Constants
PROPORTIONALITY_TOL = 1e-3
# averaging windows shorter than this get a proportionally looser tolerance
REFERENCE_WINDOW = 500.0
INVERT_LAMBDA_LO = LAMBDA_HOMOCLINIC_LIMIT + 1e-6
INVERT_LAMBDA_HI_MAX = 1e6
REMAINDER_ORDERS = ("O(rho^1/2)", "O(rho^3/2)", "O(rho^5/2)")


class FixedPointTransport(NamedTuple):
    H: float
    conducting: bool


@dataclass(frozen=True)
class AveragesZ:
    """Leading terms of <Z>, <Z**2>, <Z**3> (coefficients times rho**n)."""

    z1: float
    z2: float
    z3: float
    rho: float
    order_remainder: Tuple[str, str, str] = REMAINDER_ORDERS

    @property
    def coefficients(self) -> Tuple[float, float, float]:
        return self.z1 / self.rho, self.z2 / self.rho ** 2, self.z3 / self.rho ** 3


@dataclass(frozen=True)
class TransportPoint:
    lam: float
    h1: Optional[float] = None
    h2: Optional[float] = None
    R1: Optional[float] = None
    R2: Optional[float] = None
    gap: Optional[float] = None

    def as_row(self) -> List[Optional[float]]:
        return [self.lam, self.h1, self.h2, self.R1, self.R2, self.gap]


@dataclass(frozen=True)
class ProportionalityReport:
    """Relative deviations of the three averaged identities on a trajectory."""

    xx_vs_xy: float
    xy_vs_bz: float
    xyz_vs_bz2: float
    xyz2_vs_bz3: float
    window: float
    tolerance: float

    @property
    def worst(self) -> float:
        return max(self.xx_vs_xy, self.xy_vs_bz, self.xyz_vs_bz2, self.xyz2_vs_bz3)

    @property
    def passed(self) -> bool:
        return self.worst <= self.tolerance


def fixed_point_transport(rho: float, beta: float) -> FixedPointTransport:
    """H+- = beta(rho - 1) at X+-; for rho <= 1 only the conducting state exists and H = 0."""
    if rho <= 1.0:
        return FixedPointTransport(H=0.0, conducting=True)
    return FixedPointTransport(H=beta * (rho - 1.0), conducting=False)


def nusselt(H: float, rho: float, beta: float) -> float:
    """Mode-reduced Nusselt number 1 + 2H/(beta rho)."""
    return 1.0 + 2.0 * H / (beta * rho)


def _e_terms(point: BranchPoint, beta: float) -> Tuple[float, float, float, float, float]:
    K, E = ellip_KE(point.modulus)
    m, mc = point.modulus.m, point.modulus.mc
    e1 = ke_combination(point.modulus, (1.0, -1.0), (-1.0, 2.0))
    e2 = (4.0 * m - 1.0) * K + 4.0 * (mc - m) * E
    return K, E, e1, e2, 4.0 * e1 + beta * e2


def z3_inner_factor(point: BranchPoint) -> float:
    """(32k**4 - 36k**2 + 19)K - (64k**4 - 64k**2 + 34)E, the beta**2 part of the <Z**3> bracket."""
    return ke_combination(point.modulus, (19.0, -36.0, 32.0), (-34.0, 64.0, -64.0))


def averages_sym(point: BranchPoint, params: Optional[Params] = None) -> AveragesZ:
    """
    Leading-order <Z>, <Z**2>, <Z**3> on the symmetric periodic orbit.

    Args:
        point: Accepted symmetric BranchPoint
        params: Supplies rho; coefficients alone are returned when rho is unset

    Returns:
        AveragesZ scaled by rho, rho**2, rho**3
    """
    if point.branch is not Branch.SYMMETRIC:
        raise NoBranchError("time-average expansion is defined on the symmetric branch")
    beta, sigma = point.beta, point.sigma
    rho = 1.0 if params is None or params.rho is None else params.rho
    K, E, e1, e2, d1 = _e_terms(point, beta)
    gap = K - 2.0 * E
    c1 = 1.0 - (point.B / sigma) * gap / K
    c2 = 1.0 - 3.0 * beta * gap * gap * (8.0 * e1 + beta * e2) / (d1 * d1 * K)
    c3 = 1.0 - 9.0 * beta * gap * gap / (5.0 * d1 ** 3 * K) * (
        20.0 * d1 * e1 + beta * beta * gap * z3_inner_factor(point)
    )
    return AveragesZ(z1=c1 * rho, z2=c2 * rho ** 2, z3=c3 * rho ** 3, rho=rho)


def averages_fixed_point(params: Params) -> AveragesZ:
    """Exact averages at X+-, Z = rho - 1."""
    z = params.rho - 1.0
    return AveragesZ(z1=z, z2=z * z, z3=z ** 3, rho=params.rho, order_remainder=("exact", "exact", "exact"))


def z3_sign_threshold() -> float:
    """
    lambda at which the beta**2 part of the <Z**3> bracket changes sign.

    The factor depends on k1 only, and k1 on lambda only, so the threshold is
    independent of beta. The factor is negative between it and lambda = inf,
    where <Z**3> exceeds its equilibrium value for large beta.
    """
    kstar = find_kstar()

    def factor(k: float) -> float:
        return ke_combination(k, (19.0, -36.0, 32.0), (-34.0, 64.0, -64.0))

    k_root = optimize.brentq(factor, kstar + 1e-9, 1.0 - 1e-9, xtol=1e-15)
    lam = 0.5 * (rhs_sym(k_root) + 1.0)
    logger.debug(f"<Z^3> sign change at k1={k_root:.12f}, lambda={lam:.10f}")
    return lam


def R_sym(point: BranchPoint) -> float:
    """R1 = (B/sigma)(1 - 2E/K)."""
    K, E = ellip_KE(point.modulus)
    return (point.B / point.sigma) * (K - 2.0 * E) / K


def R_asym(point: BranchPoint) -> float:
    """R2 = (B/sigma)(K(2 - k2**2) - 2E)/(K k2**2)."""
    K, _ = ellip_KE(point.modulus)
    gap = ke_combination(point.modulus, (2.0, -1.0), (-2.0,))
    return (point.B / point.sigma) * gap / (K * point.modulus.m)


def h_transport(point: BranchPoint, params: Optional[Params] = None) -> TransportPoint:
    """
    Scaled transport h_j = H_j/rho = beta(1 - R_j) at leading order.

    Args:
        point: Accepted BranchPoint of either branch
        params: Optional; when rho is set the gap is beta(1 - 1/rho) - h_j

    Returns:
        TransportPoint with the fields of the point's branch filled in
    """
    beta = point.beta
    ceiling = beta if params is None or params.rho is None else beta * (1.0 - 1.0 / params.rho)
    if point.branch is Branch.SYMMETRIC:
        R1 = R_sym(point)
        h1 = beta * (1.0 - R1)
        return TransportPoint(lam=point.lam, h1=h1, R1=R1, gap=ceiling - h1)
    if not LAMBDA_HOMOCLINIC_LIMIT < point.lam < 1.0:
        raise NoBranchError(f"asymmetric transport requested at lambda={point.lam:.6g} outside (2/3, 1)")
    R2 = R_asym(point)
    h2 = beta * (1.0 - R2)
    return TransportPoint(lam=point.lam, h2=h2, R2=R2, gap=ceiling - h2)


def attach_transport(point: BranchPoint, params: Optional[Params] = None) -> BranchPoint:
    tp = h_transport(point, params)
    return replace(point, transport_h=tp.h1 if point.branch is Branch.SYMMETRIC else tp.h2)


def period_average_zeta(point: BranchPoint, n: int = 4096) -> float:
    """(1/T) int zeta dtau over one closed-form period, by the periodic rectangle rule."""
    family = point.family()
    period = period_action_frequency(family).T
    tau = np.linspace(0.0, period, n, endpoint=False)
    return float(np.mean(family.evaluate(tau).z))


def monotone_h1_scan(lambda_grid: Sequence[float], beta: float, jobs: int = 1) -> List[TransportPoint]:
    """h1 on a lambda grid; raises LabError unless strictly increasing."""
    grid = sorted(lambda_grid)
    if grid and grid[0] <= LAMBDA_HOMOCLINIC_LIMIT:
        raise NoBranchError(f"h1 scan needs lambda > 2/3, got {grid[0]}")
    params_list = [Params.from_lambda(lam, beta) for lam in grid]
    points = sweep_branches(params_list, Branch.SYMMETRIC, jobs)
    rows = []
    for point in points:
        if isinstance(point, LabError):
            raise point
        rows.append(h_transport(point))
    values = [row.h1 for row in rows]
    if any(b <= a for a, b in zip(values, values[1:])):
        logger.error(f"h1 not monotone on grid {grid}: {values}")
        raise LabError("h1 is not strictly increasing on the requested grid")
    return rows


def transport_curve(lambda_grid: Iterable[float], beta: float, rho: Optional[float] = None, jobs: int = 1) -> List[TransportPoint]:
    """
    Rows lambda, h1, h2, R1, R2, gap for a lambda grid at fixed beta.

    h2/R2 are present on (2/3, 1) only. gap refers to the symmetric orbit.
    """
    grid = list(lambda_grid)
    params_list = [Params.from_lambda(lam, beta, rho) for lam in grid]
    sym = sweep_branches(params_list, Branch.SYMMETRIC, jobs)
    asym = sweep_branches(params_list, Branch.ASYMMETRIC, jobs)
    rows = []
    for lam, params, s_point, a_point in zip(grid, params_list, sym, asym):
        row = TransportPoint(lam=lam)
        if isinstance(s_point, BranchPoint):
            s_tp = h_transport(s_point, params)
            row = replace(row, h1=s_tp.h1, R1=s_tp.R1, gap=s_tp.gap)
        if isinstance(a_point, BranchPoint):
            a_tp = h_transport(a_point, params)
            row = replace(row, h2=a_tp.h2, R2=a_tp.R2)
        rows.append(row)
    return rows


def invert_R1(target: float, beta: float) -> Tuple[float, float]:
    """
    lambda (and sigma at this beta) with R1(lambda) = target.

    R1 decreases from 1 at lambda = 2/3 to 0 as lambda -> inf. This is the
    handle for choosing sigma(rho) with H_sym ~ rho**gamma.

    Returns:
        Tuple (lambda, sigma)
    """
    if not 0.0 < target < 1.0:
        raise NoBranchError(f"R1 target {target} outside (0, 1)")

    def excess(lam: float) -> float:
        return R_sym(solve_sym_branch(Params.from_lambda(lam, beta), stability=False)) - target

    lo = INVERT_LAMBDA_LO
    if excess(lo) < 0.0:
        raise NoBranchError(f"R1 target {target} too close to 1 to resolve")
    hi = 2.0
    while excess(hi) > 0.0:
        hi *= 2.0
        if hi > INVERT_LAMBDA_HI_MAX:
            raise NoBranchError(f"R1 target {target} too close to 0 to resolve")
    lam = optimize.brentq(excess, lo, hi, xtol=1e-14, rtol=1e-14)
    return lam, lam * (beta + 2.0) - 1.0


def sigma_for_scaling(rho: float, gamma: float, beta: float) -> float:
    """sigma with R1 = 1 - rho**(gamma - 1), so that H_sym grows like rho**gamma."""
    if not 0.0 < gamma < 1.0:
        raise NoBranchError(f"scaling exponent gamma={gamma} outside (0, 1)")
    return invert_R1(1.0 - rho ** (gamma - 1.0), beta)[1]


def _time_average(times: np.ndarray, values: np.ndarray) -> float:
    return float(integrate.trapezoid(values, times) / (times[-1] - times[0]))


def proportionality_check(trajectory, beta: float, t_transient: float = 0.0, tolerance: Optional[float] = None) -> ProportionalityReport:
    """
    Check <X**2> = <XY> = beta<Z>, <XYZ> = beta<Z**2>, <XYZ**2> = beta<Z**3>.

    The identities hold for infinite averages; over a window of length T the
    error is O(1/T), so the default tolerance grows as the window shrinks
    below 500 time units.
    """
    times = np.asarray(trajectory.times)
    keep = times >= t_transient
    t = times[keep]
    if t.size < 2:
        raise LabError("no samples left after the transient")
    X, Y, Z = (np.asarray(trajectory.states)[keep, i] for i in range(3))
    window = float(t[-1] - t[0])
    if tolerance is None:
        tolerance = PROPORTIONALITY_TOL * max(1.0, REFERENCE_WINDOW / window)

    xx = _time_average(t, X * X)
    xy = _time_average(t, X * Y)
    z1 = _time_average(t, Z)
    xyz = _time_average(t, X * Y * Z)
    z2 = _time_average(t, Z * Z)
    xyz2 = _time_average(t, X * Y * Z * Z)
    z3 = _time_average(t, Z ** 3)

    def rel(a: float, b: float) -> float:
        scale = max(abs(a), abs(b))
        return abs(a - b) / scale if scale > 0 else 0.0

    report = ProportionalityReport(
        xx_vs_xy=rel(xx, xy),
        xy_vs_bz=rel(xy, beta * z1),
        xyz_vs_bz2=rel(xyz, beta * z2),
        xyz2_vs_bz3=rel(xyz2, beta * z3),
        window=window,
        tolerance=tolerance,
    )
    if not report.passed:
        logger.warning(f"averaging window {window:.4g} leaves proportionality deviation {report.worst:.3e} > {tolerance:.1e}")
    return report
