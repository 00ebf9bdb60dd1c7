"""
Direct simulation of the Lorenz, rescaled Lorenz and Lorenz-Stenflo systems.

Vector fields are plain numpy functions of (t, y) so that scipy's solve_ivp
can drive them; the State3/State4 wrappers exist for callers that want the
frame checked. Everything downstream (transport windows, (A, B) projections,
hysteresis events) works on the accepted integrator steps.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp, trapezoid

from .exceptions import ConfigError, DivergenceError
from .orbits import ConservedPair, conserved
from .params import Params
from .states import Frame, State3, State4, state_from_array

logger = logging.getLogger(__name__)

# Configuration Constants
DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-9
DIVERGENCE_LIMIT = 1e8
TRANSIENT_FRACTION = 0.1
WINDOW_WIDTH = 5.0
REGIME_SPREAD = 0.05
JUMP_THRESHOLD = 0.2
# RK45 costs six evaluations per attempted step plus two to pick the first step
RK45_STAGE_EVALS = 6
RK45_STARTUP_EVALS = 2

ArrayFunction = Callable[[float, np.ndarray], np.ndarray]


class System(str, Enum):
    LORENZ = "lorenz"
    RESCALED = "rescaled"
    STENFLO = "stenflo"
    STENFLO_RESCALED = "stenflo_rescaled"

    @property
    def frame(self) -> Frame:
        return Frame.RESCALED if self in (System.RESCALED, System.STENFLO_RESCALED) else Frame.ORIGINAL

    @property
    def dimension(self) -> int:
        return 4 if self in (System.STENFLO, System.STENFLO_RESCALED) else 3


class Regime(str, Enum):
    EQUILIBRIUM = "equilibrium"
    OSCILLATORY = "oscillatory"


# ---------------------------------------------------------------------------
# vector fields and Jacobians on arrays
# ---------------------------------------------------------------------------

def lorenz_array(y: np.ndarray, sigma: float, beta: float, rho: float) -> np.ndarray:
    X, Y, Z = y[0], y[1], y[2]
    return np.array([sigma * (Y - X), rho * X - Y - X * Z, X * Y - beta * Z])


def rescaled_array(y: np.ndarray, epsilon: float, sigma: float, beta: float) -> np.ndarray:
    xi, eta, zeta = y[0], y[1], y[2]
    return np.array([
        eta - epsilon * sigma * xi,
        -xi * zeta - epsilon * eta,
        xi * eta - epsilon * beta * (zeta + sigma),
    ])


def stenflo_array(y: np.ndarray, sigma: float, beta: float, rho: float, s_rot: float) -> np.ndarray:
    X, Y, Z, V = y[0], y[1], y[2], y[3]
    return np.array([sigma * (Y - X) + s_rot * V, rho * X - Y - X * Z, X * Y - beta * Z, -X - sigma * V])


def stenflo_rescaled_array(y: np.ndarray, epsilon: float, sigma: float, beta: float, s_rot: float) -> np.ndarray:
    xi, eta, zeta, chi = y[0], y[1], y[2], y[3]
    return np.array([
        eta - epsilon * (sigma * xi - s_rot * chi),
        -xi * zeta - epsilon * eta,
        xi * eta - epsilon * beta * (zeta + sigma),
        -epsilon * (xi + sigma * chi),
    ])


def jacobian_lorenz(y: np.ndarray, sigma: float, beta: float, rho: float) -> np.ndarray:
    X, Y, Z = y[0], y[1], y[2]
    return np.array([[-sigma, sigma, 0.0], [rho - Z, -1.0, -X], [Y, X, -beta]])


def jacobian_rescaled(y: np.ndarray, epsilon: float, sigma: float, beta: float) -> np.ndarray:
    xi, eta, zeta = y[0], y[1], y[2]
    return np.array([[-epsilon * sigma, 1.0, 0.0], [-zeta, -epsilon, -xi], [eta, xi, -epsilon * beta]])


def jacobian_stenflo(y: np.ndarray, sigma: float, beta: float, rho: float, s_rot: float) -> np.ndarray:
    X, Y, Z = y[0], y[1], y[2]
    return np.array([
        [-sigma, sigma, 0.0, s_rot],
        [rho - Z, -1.0, -X, 0.0],
        [Y, X, -beta, 0.0],
        [-1.0, 0.0, 0.0, -sigma],
    ])


def jacobian_stenflo_rescaled(y: np.ndarray, epsilon: float, sigma: float, beta: float, s_rot: float) -> np.ndarray:
    xi, eta, zeta = y[0], y[1], y[2]
    return np.array([
        [-epsilon * sigma, 1.0, 0.0, epsilon * s_rot],
        [-zeta, -epsilon, -xi, 0.0],
        [eta, xi, -epsilon * beta, 0.0],
        [-epsilon, 0.0, 0.0, -epsilon * sigma],
    ])


@dataclass(frozen=True)
class VectorField:
    """A right-hand side f(t, y) with its Jacobian, ready for solve_ivp."""

    system: System
    params: Params
    fun: ArrayFunction
    jac: ArrayFunction
    epsilon: Optional[float] = None
    s_rot: float = 0.0

    @property
    def frame(self) -> Frame:
        return self.system.frame

    @property
    def dimension(self) -> int:
        return self.system.dimension


def vector_field(
    system: System,
    params: Params,
    epsilon: Optional[float] = None,
    s_rot: float = 0.0,
    sigma_of_t: Optional[Callable[[float], float]] = None,
) -> VectorField:
    """
    Build the right-hand side of one of the four systems.

    Args:
        system: Which equations
        params: sigma, beta and (original frame) rho
        epsilon: Rescaled frames only; defaults to rho**-1/2
        s_rot: Rotation parameter of the Lorenz-Stenflo system
        sigma_of_t: Time-dependent sigma overriding params.sigma (original frame only)

    Returns:
        VectorField
    """
    beta = params.beta
    if system.frame is Frame.RESCALED:
        eps = params.epsilon if epsilon is None else epsilon
        sigma = params.sigma
        if system is System.RESCALED:
            return VectorField(
                system, params,
                lambda t, y: rescaled_array(y, eps, sigma, beta),
                lambda t, y: jacobian_rescaled(y, eps, sigma, beta),
                eps,
            )
        return VectorField(
            system, params,
            lambda t, y: stenflo_rescaled_array(y, eps, sigma, beta, s_rot),
            lambda t, y: jacobian_stenflo_rescaled(y, eps, sigma, beta, s_rot),
            eps, s_rot,
        )

    if params.rho is None:
        raise ConfigError("original-frame systems need rho")
    rho = params.rho
    sigma_fn = sigma_of_t if sigma_of_t is not None else (lambda t: params.sigma)
    if system is System.LORENZ:
        return VectorField(
            system, params,
            lambda t, y: lorenz_array(y, sigma_fn(t), beta, rho),
            lambda t, y: jacobian_lorenz(y, sigma_fn(t), beta, rho),
        )
    return VectorField(
        system, params,
        lambda t, y: stenflo_array(y, sigma_fn(t), beta, rho, s_rot),
        lambda t, y: jacobian_stenflo(y, sigma_fn(t), beta, rho, s_rot),
        None, s_rot,
    )


# ---------------------------------------------------------------------------
# state-level right-hand sides
# ---------------------------------------------------------------------------

def rhs_lorenz(s: State3, params: Params) -> State3:
    s.require(Frame.ORIGINAL)
    if params.rho is None:
        raise ConfigError("rhs_lorenz needs rho")
    return State3.from_array(lorenz_array(s.as_array(), params.sigma, params.beta, params.rho), Frame.ORIGINAL)


def rhs_rescaled(s: State3, epsilon: float, params: Params) -> State3:
    s.require(Frame.RESCALED)
    return State3.from_array(rescaled_array(s.as_array(), epsilon, params.sigma, params.beta), Frame.RESCALED)


def rhs_stenflo(s: State4, params: Params, s_rot: float, epsilon: Optional[float] = None) -> State4:
    """Lorenz-Stenflo derivative in the frame of s."""
    if s.frame is Frame.RESCALED:
        eps = params.epsilon if epsilon is None else epsilon
        return rhs_stenflo_rescaled(s, eps, params, s_rot)
    if params.rho is None:
        raise ConfigError("rhs_stenflo needs rho in the original frame")
    values = stenflo_array(s.as_array(), params.sigma, params.beta, params.rho, s_rot)
    return State4.from_array(values, Frame.ORIGINAL)


def rhs_stenflo_rescaled(s: State4, epsilon: float, params: Params, s_rot: float) -> State4:
    s.require(Frame.RESCALED)
    values = stenflo_rescaled_array(s.as_array(), epsilon, params.sigma, params.beta, s_rot)
    return State4.from_array(values, Frame.RESCALED)


def rescale_map(s: State3, rho: float, sigma: float) -> State3:
    """(X, Y, Z[, V]) -> (eps X, eps**2 sigma Y, sigma(eps**2 Z - 1)[, eps V]) with eps = rho**-1/2."""
    s.require(Frame.ORIGINAL)
    eps = 1.0 / math.sqrt(rho)
    xi, eta, zeta = eps * s.x, eps * eps * sigma * s.y, sigma * (eps * eps * s.z - 1.0)
    if isinstance(s, State4):
        return State4(xi, eta, zeta, Frame.RESCALED, eps * s.v)
    return State3(xi, eta, zeta, Frame.RESCALED)


def inverse_rescale_map(s: State3, rho: float, sigma: float) -> State3:
    s.require(Frame.RESCALED)
    eps = 1.0 / math.sqrt(rho)
    X, Y, Z = s.x / eps, s.y / (eps * eps * sigma), (s.z / sigma + 1.0) / (eps * eps)
    if isinstance(s, State4):
        return State4(X, Y, Z, Frame.ORIGINAL, s.v / eps)
    return State3(X, Y, Z, Frame.ORIGINAL)


def equilibrium_plus(params: Params) -> State3:
    """X+ = (sqrt(beta(rho-1)), sqrt(beta(rho-1)), rho-1)."""
    c = math.sqrt(params.beta * (params.rho - 1.0))
    return State3(c, c, params.rho - 1.0, Frame.ORIGINAL)


def random_initial_condition(params: Params, seed: Optional[int] = None, dimension: int = 3) -> State3:
    """Uniform draw from the box |X|, |Y| <= sqrt(beta rho), 0 <= Z <= 2 rho (and |V| <= 1)."""
    rng = np.random.default_rng(seed)
    half = math.sqrt(params.beta * max(params.rho, 1.0))
    X, Y = rng.uniform(-half, half, size=2)
    Z = rng.uniform(0.0, 2.0 * max(params.rho, 1.0))
    if dimension == 4:
        return State4(X, Y, Z, Frame.ORIGINAL, rng.uniform(-1.0, 1.0))
    return State3(X, Y, Z, Frame.ORIGINAL)


# ---------------------------------------------------------------------------
# lambda schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LambdaSchedule:
    """
    lambda(t) on [0, t_end], realized through sigma(t) = lambda(t)(beta + 2) - 1.

    Either piecewise linear through breakpoints or a parabola
    lam_max - (lam_max - lam_min)(1 - 2t/t_end)**2.
    """

    breakpoints: Tuple[Tuple[float, float], ...] = ()
    parabola: Optional[Tuple[float, float, float]] = None

    @property
    def t_end(self) -> float:
        if self.parabola is not None:
            return self.parabola[2]
        return self.breakpoints[-1][0]

    def lam(self, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        if self.parabola is not None:
            lam_min, lam_max, t_end = self.parabola
            u = 1.0 - 2.0 * np.asarray(t, dtype=float) / t_end
            value = lam_max - (lam_max - lam_min) * u * u
        else:
            times, lams = zip(*self.breakpoints)
            value = np.interp(t, times, lams)
        return float(value) if np.ndim(value) == 0 else value

    def sigma(self, t: Union[float, np.ndarray], beta: float) -> Union[float, np.ndarray]:
        return self.lam(t) * (beta + 2.0) - 1.0

    @property
    def is_constant(self) -> bool:
        grid = self.lam(np.linspace(0.0, self.t_end, 64))
        return bool(np.ptp(grid) == 0.0)

    def validate(self, beta: float) -> "LambdaSchedule":
        grid = self.sigma(np.linspace(0.0, self.t_end, 1001), beta)
        if np.any(grid <= 0.0):
            raise ConfigError(f"schedule drives sigma to {grid.min():.4g} <= 0 at beta={beta}")
        return self

    @classmethod
    def parabolic(cls, lam_min: float, lam_max: float, t_end: float) -> "LambdaSchedule":
        if not (0.0 < lam_min < lam_max and t_end > 0.0):
            raise ConfigError(f"parabolic schedule needs 0 < lam_min < lam_max, t_end > 0; got {lam_min}, {lam_max}, {t_end}")
        return cls(parabola=(lam_min, lam_max, t_end))

    @classmethod
    def constant(cls, lam: float, t_end: float) -> "LambdaSchedule":
        return cls.from_breakpoints([(0.0, lam), (t_end, lam)])

    @classmethod
    def from_breakpoints(cls, points: Sequence[Tuple[float, float]]) -> "LambdaSchedule":
        points = tuple((float(t), float(lam)) for t, lam in points)
        if len(points) < 2:
            raise ConfigError("a schedule needs at least two breakpoints")
        times = [t for t, _ in points]
        if any(b <= a for a, b in zip(times, times[1:])) or times[0] != 0.0:
            raise ConfigError(f"schedule times must start at 0 and increase strictly, got {times}")
        if any(lam <= 0.0 for _, lam in points):
            raise ConfigError("schedule lambda values must be positive")
        return cls(breakpoints=points)

    def describe(self) -> str:
        if self.parabola is not None:
            return "parabolic({:g}, {:g}, {:g})".format(*self.parabola)
        return ", ".join(f"{t:g}:{lam:g}" for t, lam in self.breakpoints)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

class IntegratorStats(NamedTuple):
    steps: int
    rejected_steps: int
    nfev: int
    min_step: float
    # accepted steps have scaled error norm <= 1, so no local error estimate exceeds this
    max_error_estimate: float


@dataclass(frozen=True)
class Trajectory:
    """Accepted integrator steps; states has shape (len(times), dimension)."""

    times: np.ndarray
    states: np.ndarray
    frame: Frame
    params: Params
    stats: IntegratorStats
    schedule: Optional[LambdaSchedule] = None
    dense: Optional[object] = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    def state(self, i: int) -> State3:
        return state_from_array(self.states[i], self.frame)

    @property
    def final_state(self) -> State3:
        return self.state(-1)

    def component_state(self) -> State3:
        """The whole run as one State3/State4 with array components."""
        return state_from_array(self.states.T, self.frame)

    def after(self, t_start: float) -> "Trajectory":
        keep = self.times >= t_start
        return Trajectory(self.times[keep], self.states[keep], self.frame, self.params, self.stats, self.schedule, self.dense)


def _stats(sol, rtol: float, atol: float) -> IntegratorStats:
    steps = max(len(sol.t) - 1, 0)
    rejected = max(0, (sol.nfev - RK45_STARTUP_EVALS - RK45_STAGE_EVALS * steps) // RK45_STAGE_EVALS)
    min_step = float(np.min(np.diff(sol.t))) if steps else 0.0
    max_error = atol + rtol * float(np.max(np.abs(sol.y))) if sol.y.size else atol
    return IntegratorStats(
        steps=steps, rejected_steps=int(rejected), nfev=int(sol.nfev), min_step=min_step, max_error_estimate=max_error,
    )


def _divergence_event(t: float, y: np.ndarray) -> float:
    return DIVERGENCE_LIMIT - np.max(np.abs(y))


_divergence_event.terminal = True


def integrate(
    vf: VectorField,
    y0: Union[State3, np.ndarray],
    t_span: Tuple[float, float],
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    max_step: float = np.inf,
    dense_output: bool = False,
    schedule: Optional[LambdaSchedule] = None,
) -> Trajectory:
    """
    Adaptive Dormand-Prince 5(4) integration with a divergence guard.

    Args:
        vf: Vector field
        y0: Initial state (checked against the field's frame) or array
        t_span: (t0, t1), finite
        rtol, atol: Error tolerances, positive
        max_step: Upper bound on the step size
        dense_output: Keep the continuous extension for event refinement
        schedule: Recorded on the trajectory when sigma varies in time

    Returns:
        Trajectory of accepted steps

    Raises:
        DivergenceError: |component| above 1e8, non-finite state, or step underflow
    """
    if not (rtol > 0 and atol > 0):
        raise ConfigError(f"tolerances must be positive, got rtol={rtol}, atol={atol}")
    if not all(math.isfinite(t) for t in t_span):
        raise ConfigError(f"t_span must be finite, got {t_span}")
    if isinstance(y0, State3):
        y0.require(vf.frame)
        y0 = y0.as_array()
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (vf.dimension,):
        raise ConfigError(f"{vf.system.value} needs a {vf.dimension}-component state, got shape {y0.shape}")

    sol = solve_ivp(
        vf.fun, t_span, y0, method="RK45", rtol=rtol, atol=atol, max_step=max_step,
        dense_output=dense_output, events=_divergence_event,
    )
    last_state = sol.y[:, -1] if sol.y.size else y0
    last_time = float(sol.t[-1]) if sol.t.size else t_span[0]
    if sol.status == -1:
        logger.error(f"{vf.system.value} integration failed at t={last_time:.6g}: {sol.message}")
        raise DivergenceError(f"integration failed: {sol.message}", last_state=last_state, last_time=last_time)
    if sol.status == 1 or not np.all(np.isfinite(sol.y)):
        logger.error(f"{vf.system.value} trajectory diverged at t={last_time:.6g}")
        raise DivergenceError(f"trajectory left |y| <= {DIVERGENCE_LIMIT:g}", last_state=last_state, last_time=last_time)

    stats = _stats(sol, rtol, atol)
    logger.debug(f"{vf.system.value}: {stats.steps} steps, {stats.rejected_steps} rejected, t={t_span}")
    return Trajectory(
        times=sol.t, states=sol.y.T.copy(), frame=vf.frame, params=vf.params,
        stats=stats, schedule=schedule, dense=sol.sol,
    )


# ---------------------------------------------------------------------------
# transport and projections
# ---------------------------------------------------------------------------

class TransportMeasurement(NamedTuple):
    H: float
    beta_avg_z: float
    stderr_proxy: float
    window: float


def _window_mean(times: np.ndarray, values: np.ndarray) -> float:
    return float(trapezoid(values, times) / (times[-1] - times[0]))


def measure_transport(
    params: Params,
    x0: State3,
    t_end: float,
    t_transient: Optional[float] = None,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    frame: Frame = Frame.ORIGINAL,
    blocks: int = 10,
    s_rot: float = 0.0,
) -> Tuple[TransportMeasurement, Trajectory]:
    """
    H = <XY> over [t_transient, t_end] by the trapezoidal rule on accepted steps.

    With frame=RESCALED the rescaled system is integrated over tau = t/eps and
    mapped back, which is better conditioned for rho >> 1. The error proxy is
    the spread of block means divided by sqrt(blocks).
    A State4 x0 selects the Lorenz-Stenflo system with rotation s_rot.

    Returns:
        (TransportMeasurement, original-frame Trajectory)
    """
    t_transient = TRANSIENT_FRACTION * t_end if t_transient is None else t_transient
    if not t_end > t_transient >= 0.0:
        raise ConfigError(f"need t_end > t_transient >= 0, got {t_end}, {t_transient}")
    x0.require(Frame.ORIGINAL)

    if frame is Frame.RESCALED:
        eps = params.epsilon
        system = System.STENFLO_RESCALED if isinstance(x0, State4) else System.RESCALED
        vf = vector_field(system, params, s_rot=s_rot)
        start = rescale_map(x0, params.rho, params.sigma)
        scaled = integrate(vf, start, (0.0, t_end / eps), rtol, atol)
        back = inverse_rescale_map(scaled.component_state(), params.rho, params.sigma)
        traj = Trajectory(scaled.times * eps, back.as_array().T, Frame.ORIGINAL, params, scaled.stats)
    else:
        system = System.STENFLO if isinstance(x0, State4) else System.LORENZ
        traj = integrate(vector_field(system, params, s_rot=s_rot), x0, (0.0, t_end), rtol, atol)

    window = traj.after(t_transient)
    t, X, Y, Z = window.times, window.states[:, 0], window.states[:, 1], window.states[:, 2]
    H = _window_mean(t, X * Y)
    beta_z = params.beta * _window_mean(t, Z)
    edges = np.linspace(t[0], t[-1], blocks + 1)
    means = []
    for lo, hi in zip(edges, edges[1:]):
        mask = (t >= lo) & (t <= hi)
        if np.count_nonzero(mask) >= 2:
            means.append(_window_mean(t[mask], (X * Y)[mask]))
    stderr = float(np.std(means) / math.sqrt(len(means))) if len(means) > 1 else math.inf
    logger.info(f"transport rho={params.rho:g} lambda={params.lam:.6g}: H={H:.8g}, beta<Z>={beta_z:.8g}")
    return TransportMeasurement(H=H, beta_avg_z=beta_z, stderr_proxy=stderr, window=float(t[-1] - t[0])), traj


@dataclass(frozen=True)
class ABProjection:
    times: np.ndarray
    A: np.ndarray
    B: np.ndarray
    crossing_times: Tuple[float, ...]

    @property
    def has_crossings(self) -> bool:
        return bool(self.crossing_times)

    def pairs(self) -> List[ConservedPair]:
        return [ConservedPair(a, b) for a, b in zip(self.A, self.B)]


def ab_projection(traj: Trajectory) -> ABProjection:
    """(A, B) along a rescaled trajectory and the times where it crosses A = B."""
    s = traj.component_state().require(Frame.RESCALED)
    pair = conserved(State3(s.x, s.y, s.z, Frame.RESCALED))
    A, B = np.asarray(pair.A), np.asarray(pair.B)
    diff = A - B
    idx = np.nonzero(np.sign(diff[:-1]) * np.sign(diff[1:]) < 0)[0]
    crossings = tuple(
        float(traj.times[i] - diff[i] * (traj.times[i + 1] - traj.times[i]) / (diff[i + 1] - diff[i])) for i in idx
    )
    return ABProjection(traj.times, A, B, crossings)


# ---------------------------------------------------------------------------
# hysteresis
# ---------------------------------------------------------------------------

class WindowSummary(NamedTuple):
    t_start: float
    t_end: float
    lam: float
    H_local: float
    spread: float
    regime: Regime


class HysteresisEvent(NamedTuple):
    t: float
    lam: float
    from_regime: Regime
    to_regime: Regime
    relative_jump: float
    trigger: str
    t_detected: float


@dataclass(frozen=True)
class HysteresisResult:
    trajectory: Trajectory
    windows: Tuple[WindowSummary, ...]
    events: Tuple[HysteresisEvent, ...]
    H_equilibrium: float

    def local_transport_series(self) -> np.ndarray:
        """Rows (t_mid, lambda, H_local)."""
        return np.array([[0.5 * (w.t_start + w.t_end), w.lam, w.H_local] for w in self.windows])


def _summarize_windows(traj: Trajectory, schedule: LambdaSchedule, width: float, spread_threshold: float) -> List[WindowSummary]:
    t = traj.times
    xy = traj.states[:, 0] * traj.states[:, 1]
    summaries = []
    edges = np.arange(t[0], t[-1] + 0.5 * width, width)
    for lo, hi in zip(edges, edges[1:]):
        mask = (t >= lo) & (t <= hi)
        if np.count_nonzero(mask) < 2:
            continue
        values = xy[mask]
        mean = _window_mean(t[mask], values)
        spread = float(np.ptp(values) / abs(mean)) if mean != 0.0 else math.inf
        regime = Regime.EQUILIBRIUM if spread < spread_threshold else Regime.OSCILLATORY
        summaries.append(WindowSummary(float(lo), float(hi), schedule.lam(0.5 * (lo + hi)), mean, spread, regime))
    return summaries


def _detect_events(windows: Sequence[WindowSummary], schedule: LambdaSchedule, H_eq: float, jump_threshold: float) -> List[HysteresisEvent]:
    """
    Regime changes between consecutive windows, plus transport jumps above
    jump_threshold inside one regime.

    A switch onto the equilibrium is dated back to the first window of the
    ring-down whose transport is already within jump_threshold of H_eq.
    """
    events = []
    for i in range(1, len(windows)):
        prev, cur = windows[i - 1], windows[i]
        scale = max(abs(prev.H_local), 1e-300)
        jump = (cur.H_local - prev.H_local) / scale
        if cur.regime is not prev.regime:
            onset = i
            if cur.regime is Regime.EQUILIBRIUM and H_eq > 0:
                while onset > 1 and abs(windows[onset - 1].H_local - H_eq) / H_eq < jump_threshold \
                        and windows[onset - 1].regime is Regime.OSCILLATORY:
                    onset -= 1
            t_onset = windows[onset].t_start
            events.append(HysteresisEvent(t_onset, schedule.lam(t_onset), prev.regime, cur.regime, jump, "regime", cur.t_start))
        elif abs(jump) > jump_threshold:
            events.append(HysteresisEvent(cur.t_start, schedule.lam(cur.t_start), prev.regime, cur.regime, jump, "jump", cur.t_start))
    return events


def hysteresis_run(
    rho: float,
    beta: float,
    schedule: LambdaSchedule,
    x0: Optional[State3] = None,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    window: float = WINDOW_WIDTH,
    spread_threshold: float = REGIME_SPREAD,
    jump_threshold: float = JUMP_THRESHOLD,
    seed: Optional[int] = None,
) -> HysteresisResult:
    """
    Integrate the Lorenz system while lambda(t) follows the schedule.

    beta stays fixed and sigma(t) = lambda(t)(beta + 2) - 1. Each window of
    the run is classified as EQUILIBRIUM (relative spread of XY below
    spread_threshold) or OSCILLATORY; events are the regime changes.

    Args:
        rho, beta: Fixed parameters
        schedule: lambda(t)
        x0: Initial state; defaults to X+ at lambda(0) perturbed by 1e-3 (seeded)
        window: Window width in time units
        spread_threshold: Relative XY spread separating the regimes
        jump_threshold: Relative transport jump reported as an event inside one regime

    Returns:
        HysteresisResult
    """
    schedule.validate(beta)
    params0 = Params(sigma=schedule.sigma(0.0, beta), beta=beta, rho=rho)
    if x0 is None:
        rng = np.random.default_rng(seed)
        base = equilibrium_plus(params0).as_array()
        x0 = State3.from_array(base * (1.0 + 1e-3 * rng.uniform(-1.0, 1.0, size=3)), Frame.ORIGINAL)

    vf = vector_field(System.LORENZ, params0, sigma_of_t=lambda t: schedule.sigma(t, beta))
    traj = integrate(vf, x0, (0.0, schedule.t_end), rtol, atol, schedule=schedule)
    H_eq = beta * (rho - 1.0) if rho > 1.0 else 0.0

    windows = _summarize_windows(traj, schedule, window, spread_threshold)
    events = _detect_events(windows, schedule, H_eq, jump_threshold)
    for event in events:
        logger.info(
            f"hysteresis event t={event.t:.4g} lambda={event.lam:.4f}: "
            f"{event.from_regime.value} -> {event.to_regime.value} ({event.trigger}, jump {event.relative_jump:+.3f})"
        )
    return HysteresisResult(traj, tuple(windows), tuple(events), H_eq)
