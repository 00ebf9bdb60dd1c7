"""
Melnikov analysis of the periodic orbits that survive the epsilon perturbation.

The averaged drift of (A, B) along an unperturbed orbit is given by two
Melnikov integrals M1~ and M3. Their simultaneous zeros with a nondegenerate
Jacobian DM locate periodic orbits of the full system for small epsilon:

  * symmetric (D1, modulus k1) orbits for lambda > 2/3, asymptotically stable;
  * asymmetric (D2, modulus k2) pairs for 2/3 < lambda < 1, of saddle type.

Both zero conditions reduce to one monotone equation in the modulus,
rhs(k) = 2 lambda - 1, after B has been eliminated in closed form.
Root-finding is done in the log-complement s = -ln(1 - k**2) so that lambda
arbitrarily close to 2/3 (k -> 1) stays resolvable.
"""
import cmath
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from scipy import integrate, optimize

from .appendix_verify import F2
from .elliptic import EllipticModulus, ModulusLike, as_modulus, ellip_KE, find_kstar, ke_combination
from .exceptions import ConvergenceError, LabError, ModulusDomainError, NoBranchError
from .orbits import OrbitFamily, action_derivatives, eval_L3, period_action_frequency
from .params import LAMBDA_HOMOCLINIC_LIMIT, Params

logger = logging.getLogger(__name__)

# Configuration Constants
RESIDUAL_TOL = 1e-9
KSTAR_GUARD = 1e-10
BISECTION_XTOL = 1e-15
BISECTION_MAXITER = 200
# log-complement window searched for the symmetric root; grows until bracketed
SYM_LOG_S_START = math.log(64.0)
SYM_LOG_S_MAX = math.log(1e8)
ASYM_LOG_S_MIN = math.log(1e-14)
ASYM_LOG_S_MAX = math.log(60.0)
FD_REL_STEP = 1e-6
QUADRATURE_RTOL = 1e-12
QUADRATURE_MIN_POINTS = 256
QUADRATURE_MAX_POINTS = 1 << 16
# sech**2(40) < 1e-34: tail of the homoclinic loop below double precision
HOMOCLINIC_CUTOFF = 40.0


class Branch(str, Enum):
    SYMMETRIC = "symmetric"
    ASYMMETRIC = "asymmetric"


class Stability(str, Enum):
    STABLE = "stable"
    SADDLE = "saddle"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class BranchPoint:
    """Solved Melnikov data at one lambda."""

    branch: Branch
    lam: float
    modulus: EllipticModulus
    B: float
    sigma: float
    beta: float
    residuals: Tuple[float, float]
    trDM: float = math.nan
    detDM: float = math.nan
    transport_h: Optional[float] = None

    @property
    def k(self) -> float:
        return self.modulus.k

    @property
    def A(self) -> float:
        if self.branch is Branch.SYMMETRIC:
            return self.B * (self.modulus.m - self.modulus.mc)
        return self.B * (1.0 + self.modulus.mc) / self.modulus.m

    @property
    def params(self) -> Params:
        return Params(sigma=self.sigma, beta=self.beta)

    def family(self, sign: int = 1) -> OrbitFamily:
        if self.branch is Branch.SYMMETRIC:
            return OrbitFamily.symmetric(self.modulus, self.B)
        return OrbitFamily.asymmetric(self.modulus, self.B, sign)


class TraceDet(NamedTuple):
    trDM: float
    detDM: float
    trDM_fd: float


class HomoclinicJumps(NamedTuple):
    deltaB2: float
    deltaA2: float
    lambda_hom_limit: float
    sigma_equal: float
    jumps_equal: bool


# ---------------------------------------------------------------------------
# zero conditions
# ---------------------------------------------------------------------------

def rhs_sym(k1: ModulusLike) -> float:
    """K e1 / (3 (K - 2E)(E - (1 - k1**2) K)); decreasing from +inf at k* to 1/3 at 1."""
    mod = as_modulus(k1)
    if mod.is_unit:
        return 1.0 / 3.0
    K, E = ellip_KE(mod)
    gap = K - 2.0 * E
    if gap <= 0.0:
        raise ModulusDomainError(f"rhs_sym needs k1 > k*, got k1={mod.k} (K - 2E = {gap:.3e})")
    e1 = mod.mc * K + (mod.m - mod.mc) * E
    return K * e1 / (3.0 * gap * (E - mod.mc * K))


def _asym_numerator(mod: EllipticModulus) -> float:
    """(2 - m)E - 2(1 - m)K, O(m**2) as m -> 0."""
    return ke_combination(mod, (-2.0, 2.0), (2.0, -1.0))


def _asym_gap(mod: EllipticModulus) -> float:
    """(2 - m)K - 2E, positive on (0, 1) and O(m**2) as m -> 0."""
    return ke_combination(mod, (2.0, -1.0), (-2.0,))


def rhs_asym(k2: ModulusLike) -> float:
    """K((2-m)E - 2(1-m)K) / (3E((2-m)K - 2E)); decreasing from 1 at 0 to 1/3 at 1."""
    mod = as_modulus(k2)
    if mod.m == 0.0:
        return 1.0
    if mod.is_unit:
        return 1.0 / 3.0
    K, E = ellip_KE(mod)
    return K * _asym_numerator(mod) / (3.0 * E * _asym_gap(mod))


def negative_polynomial(k2: ModulusLike) -> float:
    """
    Sign-determining numerator P of d(rhs_asym)/dk2.

    Each of its three summands is negative on (0, 1).
    """
    mod = as_modulus(k2)
    K, E = ellip_KE(mod)
    m, mc = mod.m, mod.mc
    first = E ** 3 * (-_asym_numerator(mod))
    second = -3.0 * K * E * E * mc * _asym_gap(mod)
    third_factor = 3.0 * E * (-2.0 * E + (2.0 - m) * K) + K * ((2.0 - m) * E - 2.0 * K)
    third = 0.5 * K * K * mc * (2.0 - m) * third_factor
    return first + second + third


def _sym_B(mod: EllipticModulus, params: Params) -> float:
    K, E = ellip_KE(mod)
    e1 = mod.mc * K + (mod.m - mod.mc) * E
    e2 = (4.0 * mod.m - 1.0) * K + 4.0 * (mod.mc - mod.m) * E
    return 3.0 * params.beta * params.sigma * (K - 2.0 * E) / (4.0 * e1 + params.beta * e2)


def _asym_B(mod: EllipticModulus, params: Params) -> float:
    K, E = ellip_KE(mod)
    d2 = 4.0 * params.sigma * E + params.beta * _asym_gap(mod)
    return params.beta * params.sigma * K * mod.m / d2


def _relative(terms: Sequence[float]) -> float:
    scale = sum(abs(t) for t in terms)
    return abs(math.fsum(terms)) / scale if scale > 0 else 0.0


def _bisect_log_complement(rhs: Callable[[EllipticModulus], float], target: float, lo: float, hi: float) -> EllipticModulus:
    """Root of rhs = target for a decreasing rhs, in t = ln s."""

    def f(t: float) -> float:
        return rhs(EllipticModulus.from_log_complement(math.exp(t))) - target

    t_root = optimize.bisect(f, lo, hi, xtol=BISECTION_XTOL, maxiter=BISECTION_MAXITER)
    return EllipticModulus.from_log_complement(math.exp(t_root))


def solve_sym_branch(params: Params, stability: bool = True) -> BranchPoint:
    """
    Symmetric branch point: k1 from rhs_sym(k1) = 2 lambda - 1, then
    B = 3 beta sigma (K - 2E)/(4 e1 + beta e2).

    Args:
        params: sigma, beta (rho unused)
        stability: Also compute trace and determinant of DM

    Returns:
        BranchPoint with residuals, trace and determinant
    """
    lam = params.lam
    if lam <= LAMBDA_HOMOCLINIC_LIMIT:
        raise NoBranchError(f"no symmetric branch for lambda = {lam:.6g} <= 2/3")
    target = 2.0 * lam - 1.0

    kstar = find_kstar() + KSTAR_GUARD
    t_lo = math.log(-math.log1p(-kstar * kstar))
    if rhs_sym(EllipticModulus.from_k(kstar)) <= target:
        raise NoBranchError(f"lambda = {lam:.6g} too large to resolve above k*")

    t_hi = SYM_LOG_S_START
    while rhs_sym(EllipticModulus.from_log_complement(math.exp(t_hi))) >= target:
        t_hi += math.log(2.0)
        if t_hi > SYM_LOG_S_MAX:
            raise NoBranchError(f"lambda = {lam:.12g} too close to 2/3 to bracket")

    mod = _bisect_log_complement(rhs_sym, target, t_lo, t_hi)
    B = _sym_B(mod, params)
    point = BranchPoint(
        branch=Branch.SYMMETRIC, lam=lam, modulus=mod, B=B,
        sigma=params.sigma, beta=params.beta, residuals=melnikov_residuals(Branch.SYMMETRIC, mod, B, params),
    )
    return _accept(point, params, stability)


def solve_asym_branch(params: Params, stability: bool = True) -> BranchPoint:
    """
    Asymmetric branch point: k2 from rhs_asym(k2) = 2 lambda - 1, then
    B = beta sigma K k2**2 / (4 sigma E + beta((2 - k2**2)K - 2E)).
    """
    lam = params.lam
    if not LAMBDA_HOMOCLINIC_LIMIT < lam < 1.0:
        raise NoBranchError(f"no asymmetric branch for lambda = {lam:.6g} outside (2/3, 1)")
    target = 2.0 * lam - 1.0

    rhs_lo = rhs_asym(EllipticModulus.from_log_complement(math.exp(ASYM_LOG_S_MIN)))
    rhs_hi = rhs_asym(EllipticModulus.from_log_complement(math.exp(ASYM_LOG_S_MAX)))
    if not rhs_hi < target < rhs_lo:
        raise NoBranchError(f"lambda = {lam:.12g} too close to a branch endpoint to bracket")

    mod = _bisect_log_complement(rhs_asym, target, ASYM_LOG_S_MIN, ASYM_LOG_S_MAX)
    B = _asym_B(mod, params)
    point = BranchPoint(
        branch=Branch.ASYMMETRIC, lam=lam, modulus=mod, B=B,
        sigma=params.sigma, beta=params.beta, residuals=melnikov_residuals(Branch.ASYMMETRIC, mod, B, params),
    )
    return _accept(point, params, stability)


def _accept(point: BranchPoint, params: Params, stability: bool) -> BranchPoint:
    worst = max(point.residuals)
    if worst > RESIDUAL_TOL:
        logger.error(f"{point.branch.value} branch at lambda={point.lam:.6g}: residual {worst:.3e}")
        raise ConvergenceError(f"Melnikov residual {worst:.3e} above {RESIDUAL_TOL}", best_residual=worst)
    if not stability:
        return replace(point, trDM=closed_trace(point))
    try:
        td = trace_det(point, params)
        point = replace(point, trDM=td.trDM, detDM=td.detDM)
    except ConvergenceError as exc:
        logger.warning(f"lambda={point.lam:.6g}: determinant unavailable ({exc})")
        point = replace(point, trDM=closed_trace(point))
    logger.info(
        f"{point.branch.value} branch lambda={point.lam:.6g}: k={point.k:.12f} B={point.B:.10g} "
        f"tr={point.trDM:.6g} det={point.detDM:.6g}"
    )
    return point


def solve_branch(params: Params, branch: Branch, stability: bool = True) -> BranchPoint:
    if branch is Branch.SYMMETRIC:
        return solve_sym_branch(params, stability)
    return solve_asym_branch(params, stability)


def _solve_or_error(params: Params, branch: Branch) -> Union[BranchPoint, LabError]:
    try:
        return solve_branch(params, branch)
    except LabError as exc:
        return exc


def sweep_branches(params_list: Sequence[Params], branch: Branch, jobs: int = 1) -> List[Union[BranchPoint, LabError]]:
    """
    Solve one branch over many parameter sets, in input order.

    Failures are returned in place of the point, so a sweep never aborts on
    one bad row.
    """
    if jobs == 1:
        return [_solve_or_error(p, branch) for p in params_list]
    return Parallel(n_jobs=jobs)(delayed(_solve_or_error)(p, branch) for p in params_list)


# ---------------------------------------------------------------------------
# Melnikov integrals
# ---------------------------------------------------------------------------

def _sym_terms(mod: EllipticModulus, B: float, params: Params) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    K, E = ellip_KE(mod)
    sigma, beta = params.sigma, params.beta
    root_b = math.sqrt(B)
    m1 = (
        4.0 * beta * K * root_b,
        4.0 * beta * sigma * K / root_b,
        -16.0 * sigma * root_b * (E - mod.mc * K),
        8.0 * beta * root_b * (E - K),
    )
    m3 = (
        -4.0 * beta * (B + sigma) * K / root_b,
        -8.0 * (2.0 * (beta - 1.0) * root_b + sigma * beta / root_b) * (E - K),
        -(16.0 * (beta - 1.0) * root_b / 3.0) * ((2.0 + mod.m) * K - 2.0 * (1.0 + mod.m) * E),
    )
    return m1, m3


def _asym_terms(mod: EllipticModulus, B: float, params: Params) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    K, E = ellip_KE(mod)
    sigma, beta = params.sigma, params.beta
    root_b = math.sqrt(B)
    k, m = mod.k, mod.m
    scale = 4.0 * k / root_b
    m1 = (
        scale * beta * sigma * K,
        -scale * 4.0 * sigma * B * E / m,
        -scale * beta * B * _asym_gap(mod) / m,
    )
    k_minus_e = ke_combination(mod, (1.0,), (-1.0,))
    cubic = ke_combination(mod, (2.0, 1.0), (-2.0, -2.0))
    m3 = (
        -4.0 * beta * k * (B + sigma) * K / root_b,
        (8.0 / root_b) * (beta * sigma + 2.0 * (beta - 1.0) * B) * k_minus_e / k,
        -16.0 * (beta - 1.0) * root_b * cubic / (3.0 * k ** 3),
    )
    return m1, m3


def melnikov_closed_sym(k1: ModulusLike, B: float, params: Params) -> Tuple[float, float]:
    """Closed forms of (M1~, M3) along the L1 orbit (k1, B)."""
    m1, m3 = _sym_terms(as_modulus(k1), B, params)
    return math.fsum(m1), math.fsum(m3)


def melnikov_closed_asym(k2: ModulusLike, B: float, params: Params) -> Tuple[float, float]:
    """Closed forms of (M1~, M3) along an L2 orbit over its two-loop period."""
    m1, m3 = _asym_terms(as_modulus(k2), B, params)
    return math.fsum(m1), math.fsum(m3)


def melnikov_residuals(branch: Branch, modulus: ModulusLike, B: float, params: Params) -> Tuple[float, float]:
    """|M1~| and |M3| relative to the sum of the magnitudes of their terms."""
    terms = _sym_terms if branch is Branch.SYMMETRIC else _asym_terms
    m1, m3 = terms(as_modulus(modulus), B, params)
    return _relative(m1), _relative(m3)


def _closed(branch: Branch) -> Callable[[ModulusLike, float, Params], Tuple[float, float]]:
    return melnikov_closed_sym if branch is Branch.SYMMETRIC else melnikov_closed_asym


def _periodic_integral(integrand: Callable[[np.ndarray], np.ndarray], period: float) -> float:
    """Rectangle rule on a periodic integrand, doubled until two estimates agree."""
    n = QUADRATURE_MIN_POINTS
    previous = None
    while n <= QUADRATURE_MAX_POINTS:
        tau = np.linspace(0.0, period, n, endpoint=False)
        estimate = float(np.mean(integrand(tau)) * period)
        if previous is not None and abs(estimate - previous) <= QUADRATURE_RTOL * max(1.0, abs(estimate)):
            return estimate
        previous = estimate
        n *= 2
    raise ConvergenceError(f"periodic quadrature unresolved at {n // 2} points", best_residual=abs(estimate - previous))


def melnikov_quadrature(family: OrbitFamily, params: Params) -> Tuple[float, float]:
    """
    Integrate the Melnikov integrands over one (Melnikov) period of the orbit.

    On a level set of (A, B) the M1~ integrand f1 g2 - f2 g1 + (dA/dB) g3
    reduces to beta zeta + beta sigma - sigma xi**2, and the M3 integrand is
    g3 = -(B + (beta - 1) zeta**2 / B + beta sigma zeta / B).
    """
    if not family.is_periodic:
        raise LabError(f"Melnikov integrals need a periodic orbit, got {family.tag.value}")
    sigma, beta = params.sigma, params.beta
    period = period_action_frequency(family).T
    B = float(family.pair.B)

    def m1_integrand(tau: np.ndarray) -> np.ndarray:
        s = family.evaluate(tau)
        return beta * s.z + beta * sigma - sigma * s.x * s.x

    def m3_integrand(tau: np.ndarray) -> np.ndarray:
        zeta = family.evaluate(tau).z
        return -(B + (beta - 1.0) * zeta * zeta / B + beta * sigma * zeta / B)

    return _periodic_integral(m1_integrand, period), _periodic_integral(m3_integrand, period)


# ---------------------------------------------------------------------------
# stability
# ---------------------------------------------------------------------------

def closed_trace(point: BranchPoint) -> float:
    """tr DM = -(1 + beta + sigma) T over the Melnikov period."""
    K, _ = ellip_KE(point.modulus)
    scale = -4.0 * K * (1.0 + point.beta + point.sigma) / math.sqrt(point.B)
    return scale if point.branch is Branch.SYMMETRIC else scale * point.k


def _richardson(f: Callable[[float], np.ndarray], x: float, h: float) -> np.ndarray:
    if not h > 0:
        raise ConvergenceError(f"finite-difference step collapsed at x={x}")
    coarse = (f(x + h) - f(x - h)) / (2.0 * h)
    fine = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h
    return (4.0 * fine - coarse) / 3.0


def _melnikov_gradients(point: BranchPoint, params: Params) -> Tuple[np.ndarray, np.ndarray]:
    """d(M1~, M3)/ds at fixed B and d(M1~, M3)/dB at fixed s, s = -ln(1 - k**2)."""
    closed = _closed(point.branch)
    s0 = point.modulus.log_complement
    B0 = point.B

    def along_s(s: float) -> np.ndarray:
        return np.array(closed(EllipticModulus.from_log_complement(s), B0, params))

    def along_B(B: float) -> np.ndarray:
        return np.array(closed(point.modulus, B, params))

    return _richardson(along_s, s0, FD_REL_STEP * s0), _richardson(along_B, B0, FD_REL_STEP * B0)


def _action_slope_in_s(point: BranchPoint) -> Tuple[float, float, float, float]:
    """(T, dI/ds|_B, dI/dB|_s, dI/dB|_A)."""
    family = point.family()
    derivatives = action_derivatives(family)
    period = period_action_frequency(family).T
    dk_ds = point.modulus.mc / (2.0 * point.k)
    dI_ds = derivatives.dI_dk * dk_ds
    if dI_ds == 0.0:
        raise ConvergenceError("action is flat in the modulus at double precision (k too close to 1)")
    return period, dI_ds, derivatives.dI_dB_k, derivatives.dI_dB_A


def trace_fd(point: BranchPoint, params: Params) -> float:
    """Trace of DM assembled from finite-difference Melnikov derivatives."""
    return trace_det(point, params).trDM_fd


def trace_det(point: BranchPoint, params: Params) -> TraceDet:
    """
    Trace (closed form) and determinant (finite differences) of DM.

    det DM = T (dI/dk)**-1 [dM1~/dk dM3/dB - dM1~/dB dM3/dk]; any
    reparametrization of k cancels, so the derivatives are taken in s.
    """
    if max(point.residuals) > RESIDUAL_TOL:
        raise ConvergenceError("trace/determinant requested off the branch", best_residual=max(point.residuals))
    period, dI_ds, dI_dB_s, dI_dB_A = _action_slope_in_s(point)
    d_ds, d_dB = _melnikov_gradients(point, params)
    det = period * (d_ds[0] * d_dB[1] - d_dB[0] * d_ds[1]) / dI_ds
    tr_fd = (period * d_ds[0] + dI_dB_A * d_ds[1]) / dI_ds + d_dB[1] - d_ds[1] * dI_dB_s / dI_ds
    return TraceDet(trDM=closed_trace(point), detDM=det, trDM_fd=tr_fd)


def det_identity_asym(point: BranchPoint, params: Params) -> float:
    """Closed form -16(beta+2) d2 F2 / (3 B k2**2 (1-k2**2) K E ((2-k2**2)K - 2E))."""
    if point.branch is not Branch.ASYMMETRIC:
        raise LabError("determinant identity applies to the asymmetric branch")
    mod = point.modulus
    K, E = ellip_KE(mod)
    gap = _asym_gap(mod)
    d2 = 4.0 * params.sigma * E + params.beta * gap
    return -16.0 * (params.beta + 2.0) * d2 * F2(mod) / (3.0 * point.B * mod.m * mod.mc * K * E * gap)


def floquet_prediction(trDM: float, detDM: float, epsilon: float) -> Tuple[complex, complex]:
    """nu+- = 1 + (epsilon/2)(tr +- sqrt(tr**2 - 4 det))."""
    root = cmath.sqrt(trDM * trDM - 4.0 * detDM)
    return 1.0 + 0.5 * epsilon * (trDM + root), 1.0 + 0.5 * epsilon * (trDM - root)


def stability_verdict(multipliers: Sequence[complex]) -> Stability:
    inside = [abs(nu) < 1.0 for nu in multipliers]
    if all(inside):
        return Stability.STABLE
    if any(inside):
        return Stability.SADDLE
    return Stability.UNSTABLE


# ---------------------------------------------------------------------------
# homoclinic diagnostics
# ---------------------------------------------------------------------------

def homoclinic_jumps(params: Params, epsilon: Optional[float] = None) -> HomoclinicJumps:
    """
    Leading-order changes of B**2/2 and A**2/2 along the homoclinic loop B = A = sigma.

    The loop can close only if both agree, which happens iff
    sigma = (1 + 2 beta)/3, i.e. lambda = 2/3.
    """
    eps = params.epsilon if epsilon is None else epsilon
    sigma, beta = params.sigma, params.beta
    scale = sigma ** 1.5 * eps
    delta_b2 = -(4.0 / 3.0) * (beta + 2.0) * scale
    delta_a2 = 4.0 * (beta - 2.0 * sigma) * scale
    return HomoclinicJumps(
        deltaB2=delta_b2,
        deltaA2=delta_a2,
        lambda_hom_limit=LAMBDA_HOMOCLINIC_LIMIT,
        sigma_equal=(1.0 + 2.0 * beta) / 3.0,
        jumps_equal=math.isclose(delta_b2, delta_a2, rel_tol=1e-12, abs_tol=1e-300),
    )


def homoclinic_jump_quadrature(params: Params, epsilon: Optional[float] = None) -> Tuple[float, float]:
    """Adaptive quadrature of B dB/dtau and A dA/dtau over the loop, |u| <= 40."""
    eps = params.epsilon if epsilon is None else epsilon
    sigma, beta = params.sigma, params.beta
    half_width = HOMOCLINIC_CUTOFF / math.sqrt(sigma)

    def b_rate(tau: float) -> float:
        s = eval_L3(sigma, tau, 1)
        return -eps * (s.y ** 2 + beta * s.z ** 2 + beta * sigma * s.z)

    def a_rate(tau: float) -> float:
        s = eval_L3(sigma, tau, 1)
        return sigma * eps * (-sigma * s.x ** 2 + beta * s.z + beta * sigma)

    results = []
    for rate in (b_rate, a_rate):
        value, error = integrate.quad(rate, -half_width, half_width, epsabs=0.0, epsrel=1e-12, limit=400, points=[0.0])
        if error > 1e-8 * max(abs(value), 1e-300):
            raise ConvergenceError(f"homoclinic quadrature error {error:.3e}", best_residual=error)
        results.append(value)
    return results[0], results[1]


def equal_jump_sigma(beta: float, epsilon: float = 1.0) -> float:
    """Root in sigma of deltaB2 = deltaA2 at fixed beta."""

    def difference(sigma: float) -> float:
        jumps = homoclinic_jumps(Params(sigma=sigma, beta=beta), epsilon)
        return (jumps.deltaB2 - jumps.deltaA2) / (sigma ** 1.5 * epsilon)

    return optimize.brentq(difference, 1e-6, 10.0 * (1.0 + beta), xtol=1e-14, rtol=4e-16)



# ---------------------------------------------------------------------------
# Lorenz-Stenflo
# ---------------------------------------------------------------------------

class StenfloMelnikov(NamedTuple):
    M1tilde: float
    M3: float
    M4: float
    detDM: float


def stenflo_melnikov(point: BranchPoint, chi0: float, params: Params) -> StenfloMelnikov:
    """
    Melnikov functions of the rescaled Lorenz-Stenflo system along L1 with chi = chi0.

    The rotation term s chi only enters xi', whose average over L1 vanishes, so
    M1~ and M3 are the three-dimensional ones. The chi equation contributes
    M4 = -sigma chi0 T, zero iff chi0 = 0. DM is block triangular and its
    determinant is -sigma T times the three-dimensional one.
    """
    if point.branch is not Branch.SYMMETRIC:
        raise LabError("Lorenz-Stenflo orbits embed the symmetric family only")
    M1, M3 = melnikov_closed_sym(point.modulus, point.B, params)
    period = period_action_frequency(point.family()).T
    return StenfloMelnikov(
        M1tilde=M1,
        M3=M3,
        M4=-params.sigma * chi0 * period,
        detDM=-params.sigma * period * point.detDM,
    )
