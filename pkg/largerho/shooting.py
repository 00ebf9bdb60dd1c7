"""
Periodic orbits of the full (epsilon > 0) system by Poincare shooting.

The anchor of the orbit is pinned to a hyperplane section and Newton's method
is applied to the return-map displacement P(y) - y. Floquet multipliers come
from the variational equations over one period and are compared with the
first-order Melnikov prediction.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize

from .exceptions import ConvergenceError, DivergenceError, LabError
from .melnikov import Branch, BranchPoint, Stability, floquet_prediction, stability_verdict
from .odesim import System, Trajectory, VectorField, integrate as integrate_trajectory, vector_field
from .orbits import period_action_frequency
from .params import Params
from .states import Frame, State3, State4, reflect, state_from_array

logger = logging.getLogger(__name__)

# Configuration Constants
NEWTON_TOL = 1e-10
NEWTON_MAX_ITERATIONS = 25
FD_STEP = 1e-7
SHOOTING_RTOL = 1e-12
SHOOTING_ATOL = 1e-12
SHOOTING_METHOD = "DOP853"
CROSSING_XTOL = 1e-12
SYMMETRY_TOL = 1e-6
CONDITION_WARNING = 1e12
# second-order remainder of the first-order multipliers, in units of (max |nu_pred - 1|)**2
FLOQUET_TOLERANCE_FACTOR = 4.0


class Direction(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    BOTH = "both"

    @property
    def sign(self) -> int:
        return {Direction.POSITIVE: 1, Direction.NEGATIVE: -1, Direction.BOTH: 0}[self]


class OrbitSymmetry(str, Enum):
    SYMMETRIC = "symmetric"
    ASYMMETRIC_PLUS = "asymmetric-plus"
    ASYMMETRIC_MINUS = "asymmetric-minus"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Section:
    """Hyperplane normal . y = offset crossed in the given direction."""

    normal: Tuple[float, ...]
    offset: float = 0.0
    direction: Direction = Direction.NEGATIVE

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=float)
        length = np.linalg.norm(normal)
        if length == 0.0:
            raise LabError("section normal must be non-zero")
        object.__setattr__(self, "normal", tuple(normal / length))
        object.__setattr__(self, "direction", Direction(self.direction))

    @classmethod
    def coordinate(cls, index: int, value: float = 0.0, direction: Direction = Direction.NEGATIVE, dimension: int = 3) -> "Section":
        normal = [0.0] * dimension
        normal[index] = 1.0
        return cls(tuple(normal), value, direction)

    @property
    def normal_array(self) -> np.ndarray:
        return np.array(self.normal)

    def value(self, y: np.ndarray) -> float:
        return float(np.dot(self.normal, y[: len(self.normal)]) - self.offset)

    def project(self, y: np.ndarray) -> np.ndarray:
        n = self.normal_array
        return y - n * (np.dot(n, y) - self.offset)

    def event(self) -> Callable[[float, np.ndarray], float]:
        def crossing(t: float, y: np.ndarray) -> float:
            return self.value(y)

        crossing.terminal = True
        crossing.direction = self.direction.sign
        return crossing


def default_section(dimension: int = 3) -> Section:
    """eta = 0 crossed with eta decreasing, which happens where xi > 0."""
    return Section.coordinate(1, 0.0, Direction.NEGATIVE, dimension)


@dataclass(frozen=True)
class PeriodicOrbit:
    anchor: State3
    period: float
    multipliers: Tuple[complex, ...]
    symmetry: OrbitSymmetry
    converged_residual: float
    iterations: int
    trivial_multiplier: complex = 1.0
    section: Optional[Section] = None
    vf: Optional[VectorField] = field(default=None, repr=False, compare=False)

    @property
    def stability(self) -> Stability:
        return stability_verdict(self.multipliers)


def section_crossings(traj: Trajectory, sec: Section) -> List[Tuple[float, State3]]:
    """
    Crossings of the section along a trajectory, refined on its dense output.

    Args:
        traj: Trajectory integrated with dense_output=True
        sec: Section

    Returns:
        List of (t, state) in time order
    """
    if traj.dense is None:
        raise LabError("section_crossings needs a trajectory with dense output")
    values = np.array([sec.value(y) for y in traj.states])
    crossings = []
    for i in range(len(values) - 1):
        a, b = values[i], values[i + 1]
        if a == 0.0 or a * b > 0.0:
            continue
        going_up = b > a
        if sec.direction is Direction.POSITIVE and not going_up:
            continue
        if sec.direction is Direction.NEGATIVE and going_up:
            continue
        if b == 0.0:
            t_cross = float(traj.times[i + 1])
        else:
            t_cross = optimize.brentq(
                lambda t: sec.value(traj.dense(t)), traj.times[i], traj.times[i + 1], xtol=CROSSING_XTOL
            )
        crossings.append((t_cross, state_from_array(traj.dense(t_cross), traj.frame)))
    return crossings


def return_map(
    y0: np.ndarray,
    vf: VectorField,
    section: Section,
    period_guess: float,
    rtol: float = SHOOTING_RTOL,
    atol: float = SHOOTING_ATOL,
) -> Tuple[np.ndarray, float]:
    """
    First return of y0 to the section after half the expected period.

    Returns:
        (state on the section, return time)
    """
    y0 = np.asarray(y0, dtype=float)
    half = 0.5 * period_guess
    first = integrate.solve_ivp(vf.fun, (0.0, half), y0, method=SHOOTING_METHOD, rtol=rtol, atol=atol)
    if first.status != 0:
        raise DivergenceError(f"return map failed before the section: {first.message}", last_state=first.y[:, -1])
    rest = integrate.solve_ivp(
        vf.fun, (half, half + 2.0 * period_guess), first.y[:, -1], method=SHOOTING_METHOD,
        rtol=rtol, atol=atol, events=section.event(),
    )
    if rest.status == -1 or not rest.t_events[0].size:
        raise ConvergenceError(f"no return to the section within {2.5 * period_guess:.4g}")
    return rest.y_events[0][0], float(rest.t_events[0][0])


def _residual(F: np.ndarray, y: np.ndarray) -> float:
    return float(np.max(np.abs(F)) / max(1.0, float(np.max(np.abs(y)))))


def _return_jacobian(y: np.ndarray, Py: np.ndarray, vf: VectorField, section: Section, period: float) -> np.ndarray:
    n = y.size
    h = FD_STEP * max(1.0, float(np.linalg.norm(y)))
    jac = np.empty((n, n))
    for j in range(n):
        shifted = y.copy()
        shifted[j] += h
        jac[:, j] = (return_map(shifted, vf, section, period)[0] - Py) / h
    return jac


def refine_orbit(
    guess: State3,
    period_guess: float,
    params: Params,
    epsilon: Optional[float] = None,
    section: Optional[Section] = None,
    s_rot: float = 0.0,
    max_iterations: int = NEWTON_MAX_ITERATIONS,
    tol: float = NEWTON_TOL,
) -> PeriodicOrbit:
    """
    Newton iteration on P(y) - y with the anchor constrained to the section.

    Each step solves the least-squares system [DP - I; n^T] dy = [-(P(y) - y); 0]
    with a forward-difference DP. A step that increases the residual is halved
    once.

    Args:
        guess: Rescaled-frame State3 (or State4 for Lorenz-Stenflo)
        period_guess: Expected return time
        params: sigma, beta; rho supplies epsilon when epsilon is None
        epsilon: Perturbation size
        section: Defaults to eta = 0, eta decreasing
        s_rot: Rotation parameter (four-dimensional guesses only)
        max_iterations: Newton iterations before giving up
        tol: Residual |P(y) - y|_inf / max(1, |y|_inf) to accept

    Returns:
        PeriodicOrbit with multipliers filled in

    Raises:
        ConvergenceError: Carrying the best residual reached
    """
    guess.require(Frame.RESCALED)
    dimension = 4 if isinstance(guess, State4) else 3
    system = System.STENFLO_RESCALED if dimension == 4 else System.RESCALED
    vf = vector_field(system, params, epsilon=epsilon, s_rot=s_rot)
    section = section or default_section(dimension)
    n = section.normal_array

    y = section.project(guess.as_array())
    period = period_guess
    best = math.inf
    for iteration in range(1, max_iterations + 1):
        try:
            Py, period = return_map(y, vf, section, period)
        except (ConvergenceError, DivergenceError) as exc:
            raise ConvergenceError(f"return map lost at iteration {iteration}: {exc}", best_residual=best, iterations=iteration)
        F = Py - y
        residual = _residual(F, y)
        best = min(best, residual)
        logger.debug(f"shooting iteration {iteration}: residual {residual:.3e}, period {period:.12g}")
        if residual <= tol:
            orbit = PeriodicOrbit(
                anchor=state_from_array(y, Frame.RESCALED), period=period, multipliers=(),
                symmetry=OrbitSymmetry.UNKNOWN, converged_residual=residual, iterations=iteration,
                section=section, vf=vf,
            )
            orbit = monodromy(orbit)
            logger.info(
                f"periodic orbit converged in {iteration} iterations: period {period:.10g}, "
                f"{orbit.symmetry.value}, |nu| = {[round(abs(m), 8) for m in orbit.multipliers]}"
            )
            return orbit
        if iteration == max_iterations:
            break

        jac = _return_jacobian(y, Py, vf, section, period) - np.eye(y.size)
        system_matrix = np.vstack([jac, n])
        rhs = np.concatenate([-F, [0.0]])
        dy = np.linalg.lstsq(system_matrix, rhs, rcond=None)[0]
        candidate = section.project(y + dy)
        try:
            trial = _residual(return_map(candidate, vf, section, period)[0] - candidate, candidate)
        except (ConvergenceError, DivergenceError):
            trial = math.inf
        if trial > residual:
            candidate = section.project(y + 0.5 * dy)
        y = candidate

    logger.error(f"shooting did not converge in {max_iterations} iterations (best residual {best:.3e})")
    raise ConvergenceError(
        f"Newton shooting did not converge in {max_iterations} iterations", best_residual=best, iterations=max_iterations
    )


def _variational(vf: VectorField, n: int) -> Callable[[float, np.ndarray], np.ndarray]:
    def rhs(t: float, z: np.ndarray) -> np.ndarray:
        y = z[:n]
        phi = z[n:].reshape(n, n)
        return np.concatenate([vf.fun(t, y), (vf.jac(t, y) @ phi).ravel()])

    return rhs


def _classify_symmetry(vf: VectorField, anchor: np.ndarray, period: float) -> OrbitSymmetry:
    sol = integrate.solve_ivp(
        vf.fun, (0.0, period), anchor, method=SHOOTING_METHOD, rtol=SHOOTING_RTOL, atol=SHOOTING_ATOL, dense_output=True
    )
    half = sol.sol(0.5 * period)
    mirrored = reflect(state_from_array(anchor, Frame.RESCALED)).as_array()
    scale = max(1.0, float(np.max(np.abs(anchor))))
    if np.max(np.abs(half - mirrored)) <= SYMMETRY_TOL * scale:
        return OrbitSymmetry.SYMMETRIC
    tau = np.linspace(0.0, period, 257)
    mean_xi = float(np.mean(sol.sol(tau)[0]))
    if abs(mean_xi) > SYMMETRY_TOL * scale:
        return OrbitSymmetry.ASYMMETRIC_PLUS if mean_xi > 0 else OrbitSymmetry.ASYMMETRIC_MINUS
    return OrbitSymmetry.UNKNOWN


def monodromy(orbit: PeriodicOrbit) -> PeriodicOrbit:
    """
    Integrate the variational equations over one period and take eigenvalues.

    The multiplier closest to 1 belongs to the flow direction and is stored
    separately; the rest are sorted by decreasing modulus.
    """
    vf = orbit.vf
    y0 = orbit.anchor.as_array()
    n = y0.size
    z0 = np.concatenate([y0, np.eye(n).ravel()])
    sol = integrate.solve_ivp(
        _variational(vf, n), (0.0, orbit.period), z0, method=SHOOTING_METHOD, rtol=SHOOTING_RTOL, atol=SHOOTING_ATOL
    )
    if sol.status != 0:
        raise ConvergenceError(f"variational integration failed: {sol.message}")
    phi = sol.y[n:, -1].reshape(n, n)
    condition = np.linalg.cond(phi)
    if condition > CONDITION_WARNING:
        logger.warning(f"monodromy matrix ill-conditioned (cond {condition:.2e})")
    eigenvalues = [complex(v) for v in np.linalg.eigvals(phi)]
    trivial_index = int(np.argmin([abs(v - 1.0) for v in eigenvalues]))
    trivial = eigenvalues.pop(trivial_index)
    eigenvalues.sort(key=lambda v: (-abs(v), v.imag))
    return PeriodicOrbit(
        anchor=orbit.anchor, period=orbit.period, multipliers=tuple(eigenvalues),
        symmetry=_classify_symmetry(vf, y0, orbit.period), converged_residual=orbit.converged_residual,
        iterations=orbit.iterations, trivial_multiplier=trivial, section=orbit.section, vf=vf,
    )


def orbit_trajectory(orbit: PeriodicOrbit, periods: int = 1) -> Trajectory:
    return integrate_trajectory(
        orbit.vf, orbit.anchor.as_array(), (0.0, periods * orbit.period),
        rtol=SHOOTING_RTOL, atol=SHOOTING_ATOL, dense_output=True,
    )


class OrbitTransport(NamedTuple):
    h_beta_z: float
    h_xy: float
    chi_mean: Optional[float]


def orbit_transport(orbit: PeriodicOrbit, params: Params) -> OrbitTransport:
    """
    Transport of the orbit scaled by rho: beta(1 + <zeta>/sigma) and <xi eta>/(eps sigma).

    Both equal H/rho for an exactly periodic solution.
    """
    traj = orbit_trajectory(orbit)
    t = traj.times
    states = traj.states
    period = t[-1] - t[0]
    eps = orbit.vf.epsilon

    def mean(values: np.ndarray) -> float:
        return float(integrate.trapezoid(values, t) / period)

    h_z = params.beta * (1.0 + mean(states[:, 2]) / params.sigma)
    h_xy = mean(states[:, 0] * states[:, 1]) / (eps * params.sigma)
    chi = mean(states[:, 3]) if states.shape[1] == 4 else None
    return OrbitTransport(h_beta_z=h_z, h_xy=h_xy, chi_mean=chi)


def seed_from_branch(point: BranchPoint, sign: int = 1, dimension: int = 3) -> Tuple[State3, float]:
    """
    Closed-form orbit at tau = 0 as a shooting seed, with its one-loop period.

    The seed sits on eta = 0 with xi > 0 and eta decreasing. The asymmetric
    one-loop period is half of the two-loop Melnikov period.
    """
    family = point.family(sign)
    s = family.evaluate(0.0)
    T = period_action_frequency(family).T
    period = T if point.branch is Branch.SYMMETRIC else 0.5 * T
    if dimension == 4:
        return State4(float(s.x), 0.0, float(s.z), Frame.RESCALED, 0.0), period
    return State3(float(s.x), 0.0, float(s.z), Frame.RESCALED), period


@dataclass(frozen=True)
class MelnikovComparison:
    shooting: Tuple[complex, ...]
    predicted: Tuple[complex, ...]
    max_abs_error: float
    tolerance: float
    deviation: float
    shooting_stability: Stability
    predicted_stability: Stability

    @property
    def informative(self) -> bool:
        """The second-order tolerance is below the first-order correction it tests."""
        return self.tolerance < self.deviation

    @property
    def agrees(self) -> bool:
        return (
            self.informative
            and self.max_abs_error <= self.tolerance
            and self.shooting_stability is self.predicted_stability
        )


def _best_matching(a: Sequence[complex], b: Sequence[complex]) -> float:
    return min(max(abs(x - y) for x, y in zip(a, perm)) for perm in itertools.permutations(b))


def compare_with_melnikov(orbit: PeriodicOrbit, point: BranchPoint, epsilon: float) -> MelnikovComparison:
    """
    Shooting multipliers against 1 + (eps/2)(tr +- sqrt(tr**2 - 4 det)).

    Asymmetric orbits are compared over two loops (the Melnikov period), so
    their one-loop multipliers are squared. Four-dimensional orbits carry the
    extra multiplier 1 - eps sigma T of the chi direction.

    The first-order prediction misses the true multipliers by a second-order
    remainder, so the tolerance is FLOQUET_TOLERANCE_FACTOR times the squared
    largest predicted deviation from 1. The check is only informative while
    that tolerance stays below the deviation itself.
    """
    predicted = list(floquet_prediction(point.trDM, point.detDM, epsilon))
    period = period_action_frequency(point.family()).T
    if len(orbit.multipliers) == 3:
        predicted.append(complex(1.0 - epsilon * point.sigma * period))
    shooting = list(orbit.multipliers)
    if point.branch is Branch.ASYMMETRIC:
        shooting = [v * v for v in shooting]
    error = _best_matching(shooting, predicted)
    deviation = max(abs(v - 1.0) for v in predicted)
    tolerance = FLOQUET_TOLERANCE_FACTOR * deviation ** 2
    comparison = MelnikovComparison(
        shooting=tuple(shooting), predicted=tuple(predicted), max_abs_error=error, tolerance=tolerance, deviation=deviation,
        shooting_stability=stability_verdict(shooting), predicted_stability=stability_verdict(predicted),
    )
    if not comparison.informative:
        logger.warning(f"epsilon={epsilon:.3g} too large for a first-order Floquet check (deviation {deviation:.3e})")
    elif not comparison.agrees:
        logger.warning(f"Floquet mismatch {error:.3e} (tolerance {tolerance:.3e}) at lambda={point.lam:.6g}")
    return comparison
