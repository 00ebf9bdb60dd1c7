"""
Numerical checks of the positivity claims for elliptic-integral expressions
and the exact series argument behind F2 > 0.

Grid scans are verification, not proof: every claim is evaluated on 10**4
interior points plus log-concentrated points near both ends of its domain.
The series coefficients c_n, P_2n and tau_n are exact rationals.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import mpmath
import numpy as np
from joblib import Parallel, delayed
from scipy import optimize

from .elliptic import ModulusLike, as_modulus, ellip_K, ellip_KE, find_kstar, ke_combination
from .exceptions import ConfigError

logger = logging.getLogger(__name__)

# Configuration Constants
GRID_POINTS = 10_000
ENDPOINT_POINTS = 1_000
ENDPOINT_DECADES = (-12.0, -1.0)
# below this m, expressions that cancel to high order in k go through mpmath
MP_THRESHOLD = 0.25
MP_BASE_DPS = 20
SERIES_N = 2360
K_ELL = 0.9984
F1_UPPER_GAP = 1e-6
SERIES_SPOT_POINTS = 20
SERIES_ROUNDING = 1e-12
IDENTITY_TOL = 1e-9
KU_BRACKET = (0.99, 1.0 - 1e-9)
ROOT_XTOL = 1e-13
# K/E above this makes 33/20 x**2 - 6x + 5 positive
KE_RATIO_ROOT = (6.0 + math.sqrt(3.0)) / 3.3

C_INITIAL = (Fraction(1), Fraction(-1, 2), Fraction(-1, 16), Fraction(-1, 32))


class EExpressions(NamedTuple):
    e1: float
    e2: float
    d1: float


@dataclass(frozen=True)
class ClaimResult:
    name: str
    passed: bool
    worst_margin: float
    worst_at: Optional[float]
    detail: str = ""

    def as_row(self) -> Tuple:
        return (self.name, "PASS" if self.passed else "FAIL", self.worst_margin,
                self.worst_at if self.worst_at is not None else math.nan, self.detail)


# ---------------------------------------------------------------------------
# closed-form expressions
# ---------------------------------------------------------------------------

def e_expressions(k: ModulusLike, beta: Optional[float] = None) -> EExpressions:
    """
    e1 = (1-k**2)K + (2k**2-1)E, e2 = (4k**2-1)K + 4(1-2k**2)E and d1 = 4e1 + beta e2.

    d1 is nan when beta is not given. At k = 1 e1 = 1 and e2 diverges.
    """
    mod = as_modulus(k)
    if mod.is_unit:
        return EExpressions(1.0, math.inf, math.inf if beta is not None else math.nan)
    e1 = ke_combination(mod, (1.0, -1.0), (-1.0, 2.0))
    e2 = ke_combination(mod, (-1.0, 4.0), (4.0, -8.0))
    d1 = 4.0 * e1 + beta * e2 if beta is not None else math.nan
    return EExpressions(e1, e2, d1)


def f1_third_factor(k: ModulusLike) -> float:
    """(73/20 - 2k**2)(K/E)**2 - 6 K/E + 5."""
    mod = as_modulus(k)
    K, E = ellip_KE(mod)
    x = K / E
    return (73.0 / 20.0 - 2.0 * mod.m) * x * x - 6.0 * x + 5.0


def ke_ratio_threshold() -> float:
    """Modulus where K/E reaches the larger root of 33/20 x**2 - 6x + 5."""

    def gap(k: float) -> float:
        K, E = ellip_KE(k)
        return K / E - KE_RATIO_ROOT

    return optimize.brentq(gap, 0.9, 0.99, xtol=ROOT_XTOL)


def _mp_dps(k: float, order: int) -> int:
    return MP_BASE_DPS + int(math.ceil(order * max(0.0, -math.log10(k))))


def _f2_terms(m, mc, K, E):
    b = 2 - m
    return (
        b * E ** 4,
        -8 * mc * E ** 3 * K,
        6 * mc * b * E ** 2 * K ** 2,
        -2 * b ** 2 * mc * E * K ** 3,
        b * mc ** 2 * K ** 4,
    )


def F2(k: ModulusLike) -> float:
    """
    (2-k**2)E**4 - 8(1-k**2)E**3 K + 6(1-k**2)(2-k**2)E**2 K**2
    - 2(2-k**2)**2 (1-k**2)E K**3 + (2-k**2)(1-k**2)**2 K**4.

    The terms cancel to order k**8, so small moduli are summed in mpmath.
    """
    mod = as_modulus(k)
    if mod.m == 0.0:
        return 0.0
    if mod.m < MP_THRESHOLD:
        with mpmath.workdps(_mp_dps(mod.k, 8)):
            m = mpmath.mpf(mod.m)
            mc = 1 - m
            return float(mpmath.fsum(_f2_terms(m, mc, mpmath.ellipk(m), mpmath.ellipe(m))))
    K, E = ellip_KE(mod)
    return math.fsum(_f2_terms(mod.m, mod.mc, K, E))


def p_roots(k: ModulusLike) -> Tuple[float, float]:
    """p1 = (4(1-k**2)/(2-k**2))**1/4 and p2 = ((1-k**2)(2-k**2)**3/4)**1/4."""
    mod = as_modulus(k)
    b = 2.0 - mod.m
    return (4.0 * mod.mc / b) ** 0.25, (mod.mc * b ** 3 / 4.0) ** 0.25


def r_plus(k: ModulusLike) -> float:
    mod = as_modulus(k)
    return (mod.mc * (1.0 - 0.5 * mod.m) ** 2) ** 0.25


def F2_identity_residual(k: ModulusLike) -> float:
    """
    Relative residual of F2 - (p1 E - p2 K)**4 = k**4/(2-k**2) (E**4 - (1-k**2)(1-k**2/2)**2 K**4).
    """
    mod = as_modulus(k)
    K, E = ellip_KE(mod)
    p1, p2 = p_roots(mod)
    terms = _f2_terms(mod.m, mod.mc, K, E)
    lhs = math.fsum(terms) - (p1 * E - p2 * K) ** 4
    rhs = mod.m ** 2 / (2.0 - mod.m) * (E ** 4 - mod.mc * (1.0 - 0.5 * mod.m) ** 2 * K ** 4)
    scale = math.fsum(abs(t) for t in terms)
    return abs(lhs - rhs) / scale


def sub_claim(k: ModulusLike) -> float:
    """3(2-k**2)K - 4E."""
    return ke_combination(k, (6.0, -3.0), (-4.0,))


def upper_interval_factor(k: ModulusLike) -> float:
    """E**3 - 2(2-k**2)(1-k**2)K**3, positive for k above k_u."""
    mod = as_modulus(k)
    K, E = ellip_KE(mod)
    return E ** 3 - 2.0 * (2.0 - mod.m) * mod.mc * K ** 3


def ku_constant() -> float:
    """Root of (1-k**2) K(k)**3 = 1/4."""

    def excess(k: float) -> float:
        mod = as_modulus(k)
        return mod.mc * ellip_K(mod) ** 3 - 0.25

    ku = optimize.brentq(excess, *KU_BRACKET, xtol=ROOT_XTOL)
    logger.debug(f"k_u = {ku:.12f}, residual {excess(ku):.2e}")
    return ku


def e_minus_rplus_K(k: float) -> float:
    """E - r+ K, of order k**8 near 0 and evaluated in mpmath."""
    with mpmath.workdps(_mp_dps(k, 8)):
        m = mpmath.mpf(k) ** 2
        r = ((1 - m) * (1 - m / 2) ** 2) ** mpmath.mpf(0.25)
        return float(mpmath.ellipe(m) - r * mpmath.ellipk(m))


# ---------------------------------------------------------------------------
# exact series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesCoefficients:
    """c_n of r+ = sum c_n k**2n, P_2n and tau_n of h_N = E - r_N K, all exact."""

    c: Tuple[Fraction, ...]
    tau: Tuple[Fraction, ...]
    P2: Tuple[Fraction, ...]
    N: int

    def sandwich_violation(self) -> Optional[int]:
        """First n >= 2 breaking 2c_{n+1} <= c_n <= c_{n+1} < 0, or None."""
        for n in range(2, self.N):
            lo, mid, hi = 2 * self.c[n + 1], self.c[n], self.c[n + 1]
            if not (lo <= mid <= hi < 0):
                return n
        return None

    def first_nonpositive_tau(self, start: int = 5, stop: Optional[int] = None) -> Optional[int]:
        stop = self.N if stop is None else stop
        for n in range(start, stop):
            if self.tau[n] <= 0:
                return n
        return None

    def lower_bound(self, k: float) -> float:
        """3 pi/4096 k**8 + pi/2 sum_{5<=n<N} tau_n k**2n - k**2N K(k), a lower bound on h_N."""
        m = k * k
        tail = math.fsum(float(self.tau[n]) * m ** n for n in range(5, self.N))
        return 3.0 * math.pi / 4096.0 * m ** 4 + 0.5 * math.pi * tail - m ** self.N * ellip_K(k)


def _c_coefficients(N: int) -> List[Fraction]:
    c = list(C_INITIAL[:2])
    for n in range(N - 1):
        c.append(((8 + 12 * n) * c[n + 1] - (-3 + 4 * n) * c[n]) / (16 + 8 * n))
    return c


@lru_cache(maxsize=8)
def series_coefficients(N: int) -> SeriesCoefficients:
    """
    Exact c_n (n <= N), P_2n and tau_n (n <= N) for truncation order N.

    tau_n = 2n/(1-2n) P_2n**2 - sum_{m=1}^{min(n,N)} c_m P_2(n-m)**2. The
    convolution is carried on integers over a common denominator.

    Args:
        N: Truncation order, at least 5

    Returns:
        SeriesCoefficients
    """
    if N < 5:
        raise ConfigError(f"series truncation N must be at least 5, got {N}")
    c = _c_coefficients(N)
    central = [math.comb(2 * n, n) for n in range(N + 1)]
    P2 = tuple(Fraction(b, 4 ** n) for n, b in enumerate(central))

    # c_m = A_m / L and P_2j**2 = B_j / 16**j
    L = math.lcm(*(f.denominator for f in c))
    A_shifted = np.array([(f.numerator * (L // f.denominator)) << (4 * m) for m, f in enumerate(c)], dtype=object)
    B = np.array([b * b for b in central], dtype=object)

    tau = []
    for n in range(N + 1):
        first = Fraction(2 * n * B[n], (1 - 2 * n) << (4 * n))
        conv = np.dot(A_shifted[1 : n + 1], B[n - 1 :: -1]) if n > 0 else 0
        tau.append(first - Fraction(int(conv), L << (4 * n)))
        if n and n % 500 == 0:
            logger.debug(f"tau_{n} done")
    logger.info(f"series coefficients to N={N}: c_N ~ {float(c[N]):.3e}, tau_(N-1) ~ {float(tau[N - 1]):.3e}")
    return SeriesCoefficients(c=tuple(c), tau=tuple(tau), P2=P2, N=N)


class PositivityInterval(NamedTuple):
    bound: float
    k_ell: float
    covers: bool
    first_nonpositive: Optional[int]


def interval_of_positivity(N: int, k_ell: float, check_tau: bool = True) -> PositivityInterval:
    """
    (3 pi/(4096 K(k_ell)))**(1/(2N-8)), below which the leading part of h_N is positive.

    With check_tau the exact tau_n are also checked positive for 5 <= n <= N-1.
    """
    if N < 5:
        raise ConfigError(f"N must be at least 5, got {N}")
    if not 0.0 < k_ell < 1.0:
        raise ConfigError(f"k_ell must lie in (0, 1), got {k_ell}")
    bound = (3.0 * math.pi / (4096.0 * ellip_K(k_ell))) ** (1.0 / (2 * N - 8))
    first_bad = series_coefficients(N).first_nonpositive_tau() if check_tau else None
    if first_bad is not None:
        logger.warning(f"tau_{first_bad} is not positive for N={N}")
    return PositivityInterval(bound, k_ell, bound >= k_ell, first_bad)


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------

def claim_grid(lo: float, hi: float, points: int = GRID_POINTS, endpoint_points: int = ENDPOINT_POINTS) -> np.ndarray:
    """Open-interval grid: uniform midpoints plus log-spaced points hugging both ends."""
    width = hi - lo
    uniform = lo + width * (np.arange(points) + 0.5) / points
    offsets = width * np.logspace(*ENDPOINT_DECADES, endpoint_points)
    return np.unique(np.concatenate([uniform, lo + offsets, hi - offsets]))


def scan(name: str, claim: Callable[[float], float], grid: Sequence[float]) -> ClaimResult:
    """Evaluate claim(k) > 0 over the grid and keep the smallest margin."""
    values = np.array([claim(float(k)) for k in grid])
    worst = int(np.nanargmin(values)) if np.any(np.isfinite(values)) else 0
    passed = bool(np.all(values > 0))
    result = ClaimResult(name, passed, float(values[worst]), float(grid[worst]), f"{len(grid)} points")
    log = logger.info if passed else logger.error
    log(f"{name}: {'pass' if passed else 'FAIL'}, worst margin {result.worst_margin:.3e} at k={result.worst_at:.9g}")
    return result


def _check_series(N: int) -> List[ClaimResult]:
    coeffs = series_coefficients(N)
    results = []

    bad = coeffs.sandwich_violation()
    results.append(ClaimResult("c_sandwich", bad is None, math.nan, bad, f"2 <= n < {N}"))

    tau4_ok = coeffs.tau[4] == Fraction(3, 2048) and all(t == 0 for t in coeffs.tau[1:4])
    results.append(ClaimResult("tau4_leading", tau4_ok, float(coeffs.tau[4]), 4, "tau_1..3 = 0, tau_4 = 3/2048"))

    interval = interval_of_positivity(N, K_ELL)
    tau_ok = interval.first_nonpositive is None
    worst_tau = min(range(5, N), key=lambda n: coeffs.tau[n])
    results.append(ClaimResult("tau_positive", tau_ok, float(coeffs.tau[worst_tau]), worst_tau, f"5 <= n <= {N - 1}"))
    results.append(
        ClaimResult("interval_of_positivity", interval.covers, interval.bound - K_ELL, interval.bound, f"N={N}, k_ell={K_ELL}")
    )

    spots = np.linspace(0.05, K_ELL, SERIES_SPOT_POINTS)
    exact = [e_minus_rplus_K(k) for k in spots]
    gaps = [value - coeffs.lower_bound(k) for k, value in zip(spots, exact)]
    worst = int(np.argmin(gaps))
    # far below k_ell both sides agree to rounding
    slack = [SERIES_ROUNDING * abs(value) for value in exact]
    results.append(
        ClaimResult("series_lower_bound", all(g >= -s for g, s in zip(gaps, slack)), float(gaps[worst]), float(spots[worst]),
                    f"{SERIES_SPOT_POINTS} spot checks")
    )
    return results


def _run_claim(name: str, grid_points: int, N: int) -> List[ClaimResult]:
    kstar = find_kstar()
    if name == "series":
        return _check_series(N)
    if name == "ku":
        ku = ku_constant()
        return [scan("F2_upper_interval", upper_interval_factor, claim_grid(ku, 1.0, grid_points))]
    claims = {
        "e1_positive": (lambda k: e_expressions(k).e1, 0.0, 1.0),
        "e2_positive": (lambda k: e_expressions(k).e2, 0.0, 1.0),
        "f1_third_factor_positive": (f1_third_factor, kstar, 1.0 - F1_UPPER_GAP),
        "F2_positive": (F2, 0.0, 1.0),
        "F2_sub_claim": (sub_claim, 0.0, 1.0),
        "F2_identity": (lambda k: IDENTITY_TOL - F2_identity_residual(k), 0.0, 1.0),
    }
    claim, lo, hi = claims[name]
    grid = claim_grid(lo, hi, grid_points)
    if name == "e1_positive":
        grid = np.append(grid, 1.0)
    if name == "f1_third_factor_positive":
        grid = np.append(grid, kstar)
    return [scan(name, claim, grid)]


CLAIM_GROUPS = ("e1_positive", "e2_positive", "f1_third_factor_positive", "F2_positive", "F2_sub_claim", "F2_identity", "ku", "series")


def run_all(grid_points: int = GRID_POINTS, N: int = SERIES_N, jobs: int = 1) -> List[ClaimResult]:
    """
    Every positivity claim and the series construction, one ClaimResult each.

    Args:
        grid_points: Uniform points per claim (endpoint refinement comes on top)
        N: Series truncation order
        jobs: joblib workers

    Returns:
        List of ClaimResult in a fixed order
    """
    logger.info(f"verifying positivity claims: {grid_points} grid points, N={N}, jobs={jobs}")
    groups = Parallel(n_jobs=jobs)(delayed(_run_claim)(name, grid_points, N) for name in CLAIM_GROUPS)
    results = [r for group in groups for r in group]
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error(f"claims failing: {', '.join(failed)}")
    return results
