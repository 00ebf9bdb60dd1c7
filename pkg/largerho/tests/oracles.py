"""Independent reference values built from adaptive quadrature and root finding."""
import math

import numpy as np
from scipy import integrate, optimize

from largerho.melnikov import melnikov_closed_asym, melnikov_closed_sym


def quad_KE(k: float):
    """K and E by quadrature over theta with t = sin(theta)."""
    m = k * k
    K = integrate.quad(lambda th: 1.0 / math.sqrt(1.0 - m * math.sin(th) ** 2), 0.0, 0.5 * math.pi, epsabs=0.0, epsrel=1e-14, limit=200)[0]
    E = integrate.quad(lambda th: math.sqrt(1.0 - m * math.sin(th) ** 2), 0.0, 0.5 * math.pi, epsabs=0.0, epsrel=1e-14, limit=200)[0]
    return K, E


def amplitude(u: float, k: float) -> float:
    """phi with F(phi, k) = u, for 0 <= u <= K(k)."""
    m = k * k

    def F(phi: float) -> float:
        return integrate.quad(lambda th: 1.0 / math.sqrt(1.0 - m * math.sin(th) ** 2), 0.0, phi, epsabs=0.0, epsrel=1e-14)[0] - u

    return optimize.brentq(F, 0.0, 0.5 * math.pi, xtol=1e-15)


def jacobi_by_inversion(u: float, k: float):
    phi = amplitude(u, k)
    sn, cn = math.sin(phi), math.cos(phi)
    return sn, cn, math.sqrt(1.0 - k * k * sn * sn)


def newton_branch(symmetric: bool, k0: float, B0: float, params):
    """Zero of the closed Melnikov pair in (k, B) by scipy's hybrid Newton solver."""
    closed = melnikov_closed_sym if symmetric else melnikov_closed_asym

    def residual(v):
        return np.array(closed(float(v[0]), float(v[1]), params))

    sol = optimize.root(residual, [k0, B0], method="hybr", options={"xtol": 1e-14})
    return float(sol.x[0]), float(sol.x[1]), sol.success
