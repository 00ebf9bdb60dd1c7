"""
Complete elliptic integrals K, E and Jacobi elliptic functions sn, cn, dn.

Everything is driven by one arithmetic-geometric mean iteration. A modulus
carries m = k**2 together with its complement m' = 1 - k**2 (and -ln m'), so
callers that know the complement exactly never pay for the cancellation in
1 - k**2 near k = 1.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import optimize

from .exceptions import DivergenceError, ModulusDomainError

logger = logging.getLogger(__name__)

# Configuration Constants
AGM_RTOL = 1e-15
AGM_MAX_ITERATIONS = 64
# below this complement K and E come from their logarithmic expansions
ASYMPTOTIC_COMPLEMENT = 1e-30
# m below this: p(m)K + q(m)E summed as a power series
SERIES_THRESHOLD = 0.25
SERIES_TERMS = 64
KSTAR_BRACKET = (0.5, 0.99)
KSTAR_XTOL = 1e-14
LN4 = math.log(4.0)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class EllipticModulus:
    """Modulus k stored as m = k**2, m' = 1 - m and s = -ln m'."""

    m: float
    mc: float
    log_complement: float

    @property
    def k(self) -> float:
        return math.sqrt(self.m)

    @property
    def kc(self) -> float:
        return math.sqrt(self.mc)

    @property
    def is_unit(self) -> bool:
        """True for k = 1 exactly (not merely a complement that underflowed)."""
        return math.isinf(self.log_complement)

    @classmethod
    def from_k(cls, k: float) -> "EllipticModulus":
        if not 0.0 <= k <= 1.0 or math.isnan(k):
            raise ModulusDomainError(f"elliptic modulus k={k} outside [0, 1]")
        mc = (1.0 - k) * (1.0 + k)
        return cls(m=k * k, mc=mc, log_complement=-math.log(mc) if mc > 0 else math.inf)

    @classmethod
    def from_complement(cls, mc: float) -> "EllipticModulus":
        if not 0.0 <= mc <= 1.0 or math.isnan(mc):
            raise ModulusDomainError(f"complementary parameter m'={mc} outside [0, 1]")
        return cls(m=1.0 - mc, mc=mc, log_complement=-math.log(mc) if mc > 0 else math.inf)

    @classmethod
    def from_log_complement(cls, s: float) -> "EllipticModulus":
        """Modulus with m' = exp(-s); s may exceed the float range of m'."""
        if s < 0.0 or math.isnan(s):
            raise ModulusDomainError(f"log-complement s={s} must be non-negative")
        return cls(m=-math.expm1(-s), mc=math.exp(-s), log_complement=s)


ModulusLike = Union[float, EllipticModulus]


def as_modulus(k: ModulusLike) -> EllipticModulus:
    if isinstance(k, EllipticModulus):
        return k
    return EllipticModulus.from_k(float(k))


class JacobiTriple(NamedTuple):
    sn: ArrayLike
    cn: ArrayLike
    dn: ArrayLike


def _agm(mc: float) -> Tuple[float, float]:
    """AGM of (1, sqrt(m')) and the weighted sum of 2**(n-1) c_n**2 used for E."""
    a, b = 1.0, math.sqrt(mc)
    weight = 0.5
    csum = 0.5 * (1.0 - mc)
    for _ in range(AGM_MAX_ITERATIONS):
        if abs(a - b) <= AGM_RTOL * a:
            break
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        weight *= 2.0
        csum += weight * c * c
    return a, csum


def _asymptotic_KE(mod: EllipticModulus) -> Tuple[float, float]:
    log_term = 0.5 * mod.log_complement + LN4
    mc = mod.mc
    K = log_term + 0.25 * mc * (log_term - 1.0)
    E = 1.0 + 0.5 * mc * (log_term - 0.5)
    return K, E


def ellip_KE(k: ModulusLike) -> Tuple[float, float]:
    """Both complete integrals from a single AGM pass.

    Args:
        k: Modulus in [0, 1) as a float or an EllipticModulus

    Returns:
        Tuple (K, E)
    """
    mod = as_modulus(k)
    if mod.is_unit:
        raise DivergenceError("K(k) diverges at k = 1")
    if mod.mc < ASYMPTOTIC_COMPLEMENT:
        return _asymptotic_KE(mod)
    a, csum = _agm(mod.mc)
    K = math.pi / (2.0 * a)
    return K, K * (1.0 - csum)


def ellip_K(k: ModulusLike) -> float:
    return ellip_KE(k)[0]


def ellip_E(k: ModulusLike) -> float:
    mod = as_modulus(k)
    if mod.is_unit:
        return 1.0
    return ellip_KE(mod)[1]


def sech(u: ArrayLike) -> ArrayLike:
    """Overflow-free hyperbolic secant."""
    decay = np.exp(-np.abs(u))
    return 2.0 * decay / (1.0 + decay * decay)


def _scalar_or_array(value: np.ndarray, scalar: bool) -> ArrayLike:
    return float(value) if scalar else value


def jacobi(u: ArrayLike, k: ModulusLike) -> JacobiTriple:
    """
    Jacobi elliptic functions by descending Landen (AGM) transformation.

    The argument is first reduced modulo 4K. The amplitude is recovered by the
    back-recursion phi_{n-1} = (phi_n + asin(c_n/a_n sin phi_n))/2, and dn is
    formed as sqrt(cn**2 + m' sn**2), which has no cancellation anywhere.

    Args:
        u: Argument, scalar or array
        k: Modulus in [0, 1]

    Returns:
        JacobiTriple of the same shape as u
    """
    mod = as_modulus(k)
    scalar = np.ndim(u) == 0
    u = np.asarray(u, dtype=float)

    if mod.is_unit:
        sech_u = sech(u)
        return JacobiTriple(
            _scalar_or_array(np.tanh(u), scalar),
            _scalar_or_array(sech_u, scalar),
            _scalar_or_array(sech_u, scalar),
        )
    if mod.m == 0.0:
        return JacobiTriple(
            _scalar_or_array(np.sin(u), scalar),
            _scalar_or_array(np.cos(u), scalar),
            _scalar_or_array(np.ones_like(u), scalar),
        )

    period = 4.0 * ellip_K(mod)
    u = u - period * np.round(u / period)

    a_seq = [1.0]
    c_seq = [mod.k]
    b = mod.kc
    for _ in range(AGM_MAX_ITERATIONS):
        if c_seq[-1] <= AGM_RTOL * a_seq[-1]:
            break
        a_prev = a_seq[-1]
        a_next = 0.5 * (a_prev + b)
        c_seq.append(c_seq[-1] ** 2 / (4.0 * a_next))
        b = math.sqrt(a_prev * b)
        a_seq.append(a_next)

    n_last = len(a_seq) - 1
    phi = (2.0 ** n_last) * a_seq[n_last] * u
    for n in range(n_last, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c_seq[n] / a_seq[n] * np.sin(phi)))

    sn = np.sin(phi)
    cn = np.cos(phi)
    dn = np.sqrt(cn * cn + mod.mc * sn * sn)
    return JacobiTriple(
        _scalar_or_array(sn, scalar),
        _scalar_or_array(cn, scalar),
        _scalar_or_array(dn, scalar),
    )


def _series_tables(terms: int) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """Taylor coefficients in m of (2/pi)K and (2/pi)E."""
    p = Fraction(1)
    k_coeffs, e_coeffs = [], []
    for n in range(terms):
        if n > 0:
            p *= Fraction(2 * n - 1, 2 * n)
        k_coeffs.append(p * p)
        e_coeffs.append(p * p / (1 - 2 * n))
    return tuple(float(c) for c in k_coeffs), tuple(float(c) for c in e_coeffs)


_K_SERIES, _E_SERIES = _series_tables(SERIES_TERMS)


def ke_combination(k: ModulusLike, poly_K: Sequence[float], poly_E: Sequence[float]) -> float:
    """
    Evaluate p(m)K(k) + q(m)E(k) for polynomials p, q in m = k**2.

    For small m the power series of the whole combination is summed, so exact
    cancellation of the leading orders does not cost any digits.

    Args:
        k: Modulus
        poly_K: Ascending coefficients of p
        poly_E: Ascending coefficients of q

    Returns:
        Value of the combination
    """
    mod = as_modulus(k)
    if mod.m >= SERIES_THRESHOLD:
        K, E = ellip_KE(mod)
        return float(npoly.polyval(mod.m, poly_K) * K + npoly.polyval(mod.m, poly_E) * E)

    total = 0.0
    power = 1.0
    for n in range(SERIES_TERMS):
        coeff = 0.0
        for j, pk in enumerate(poly_K):
            if j <= n:
                coeff += pk * _K_SERIES[n - j]
        for j, qe in enumerate(poly_E):
            if j <= n:
                coeff += qe * _E_SERIES[n - j]
        total += coeff * power
        power *= mod.m
    return 0.5 * math.pi * total


@lru_cache(maxsize=None)
def find_kstar() -> float:
    """Unique modulus in (0, 1) with K(k) = 2E(k)."""

    def gap(k: float) -> float:
        K, E = ellip_KE(k)
        return K - 2.0 * E

    kstar = optimize.bisect(gap, *KSTAR_BRACKET, xtol=KSTAR_XTOL, maxiter=200)
    logger.debug(f"k* = {kstar:.15f}, residual {gap(kstar):.3e}")
    return kstar
