"""
Langevin Diagnostics - Stochastic Analysis of the Quantized Search

This module handles:
- The discrete search equation and its Gaussian search noise
- Euler-Maruyama simulation of dX = -grad f(X) dt + sqrt(2 / Q_p(t)) dW
- Stationary moments against the Gibbs density exp(-Q_p f)
- The Witten-Laplacian potential V = -(m/2)(|grad f|^2 - h lap f)
- Escape rates out of a registered local minimum
- The norm bound on the search noise under a virtual quadratic objective

Paths may be batched: x0 of shape (n, d) simulates n independent chains
with one Generator.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from src.errors import DivergenceError, InvalidArgumentError
from src.objectives import LocalMinimum, Objective, make_quadratic

logger = logging.getLogger(__name__)

MAX_DT = 0.1
DEFAULT_BURN_IN = 0.2
DEFAULT_ESCAPE_DT = 1.0e-4

QSchedule = Union[float, Callable[[float], float]]


def _check_positive(name: str, value: float, allow_inf: bool = False) -> None:
    ok = value > 0 and (math.isfinite(value) or (allow_inf and value == math.inf))
    if not ok:
        raise InvalidArgumentError(f"{name} must be positive, got {value!r}")


def semiclassical_parameter(q_param: float) -> float:
    """h = 2 / Q_p (0 when the noise is off)"""
    _check_positive("q_param", q_param, allow_inf=True)
    return 0.0 if math.isinf(q_param) else 2.0 / q_param


@dataclass(frozen=True)
class SearchStepParams:
    """
    Parameters of one step of the discrete search equation

    eta_step defaults to 1 / lambda0. Any other value must lie in (0, 1].
    """
    lambda0: float
    q_param: float
    eta_step: Optional[float] = None

    def __post_init__(self):
        _check_positive("lambda0", self.lambda0)
        _check_positive("q_param", self.q_param)
        if self.eta_step is None:
            object.__setattr__(self, "eta_step", 1.0 / self.lambda0)
        elif not (0 < self.eta_step <= 1 or math.isclose(self.eta_step, 1.0 / self.lambda0)):
            raise InvalidArgumentError(
                f"eta_step must lie in (0, 1] or equal 1/lambda0, got {self.eta_step!r}"
            )

    @property
    def noise_bound(self) -> float:
        """sqrt(2 lambda0 / Q_p)"""
        return math.sqrt(2.0 * self.lambda0 / self.q_param)


def discrete_search_step(x, grad, r, eta_step: float) -> np.ndarray:
    """
    x_{t+1} = x - eta * grad + eta * r

    Args:
        x: Current point (or batch of points)
        grad: Gradient at x, same shape
        r: Search noise, same shape
        eta_step: Step size

    Returns:
        Next point
    """
    x = np.asarray(x, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    if not (x.shape == grad.shape == r.shape):
        raise InvalidArgumentError(
            f"Dimension mismatch: x {x.shape}, grad {grad.shape}, r {r.shape}"
        )
    _check_positive("eta_step", eta_step)
    return x - eta_step * grad + eta_step * r


def search_step_from_params(params: SearchStepParams, x, grad, r) -> np.ndarray:
    return discrete_search_step(x, grad, r, params.eta_step)


def sample_search_noise(
    rng: np.random.Generator,
    dim: int,
    lambda0: float,
    q_param: float,
    size: Optional[int] = None
) -> np.ndarray:
    """
    Gaussian search noise with covariance (2 lambda0 / Q_p) I

    Q_p = inf returns zeros. size=None gives one vector of shape (dim,),
    otherwise shape (size, dim).
    """
    _check_positive("lambda0", lambda0)
    _check_positive("q_param", q_param, allow_inf=True)
    if int(dim) != dim or dim < 1:
        raise InvalidArgumentError(f"dim must be a positive integer, got {dim!r}")

    shape = (int(dim),) if size is None else (int(size), int(dim))
    if math.isinf(q_param):
        return np.zeros(shape)
    return math.sqrt(2.0 * lambda0 / q_param) * rng.standard_normal(shape)


@dataclass
class LangevinPath:
    """
    A simulated path (or ensemble of paths)

    states has shape (steps + 1, d) for one chain and (steps + 1, n, d) for a
    batch; states[0] is x0.
    """
    dt: float
    q_of_t: QSchedule
    states: np.ndarray
    seed: Optional[int]

    @property
    def steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def duration(self) -> float:
        return self.steps * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.states.shape[0])

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def q_at(self, t: float) -> float:
        return _q_value(self.q_of_t, t)


def _q_value(q_of_t: QSchedule, t: float) -> float:
    q = float(q_of_t(t)) if callable(q_of_t) else float(q_of_t)
    if not (q > 0):
        raise InvalidArgumentError(f"Q_p must be positive along the path, got {q} at t={t}")
    return q


def _integrate(
    objective: Objective,
    q_of_t: QSchedule,
    dt: float,
    steps: int,
    x0,
    seed: Optional[int],
    keep_path: bool
) -> np.ndarray:
    """Core Euler-Maruyama loop; returns every state or only the final one"""
    _check_positive("dt", dt)
    if dt > MAX_DT:
        raise InvalidArgumentError(f"dt must be <= {MAX_DT}, got {dt}")
    if int(steps) != steps or steps < 1:
        raise InvalidArgumentError(f"steps must be a positive integer, got {steps!r}")

    x = np.array(x0, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[-1] != objective.dim:
        raise InvalidArgumentError(
            f"x0 must have shape ({objective.dim},) or (n, {objective.dim}), got {x.shape}"
        )
    rng = np.random.default_rng(seed)
    steps = int(steps)
    constant_q = None if callable(q_of_t) else _q_value(q_of_t, 0.0)

    states = np.empty((steps + 1,) + x.shape) if keep_path else None
    if keep_path:
        states[0] = x

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps):
            q = constant_q if constant_q is not None else _q_value(q_of_t, k * dt)
            # noise is drawn even when Q_p is infinite so paired seeds share realizations
            xi = rng.standard_normal(x.shape)
            drift = objective.gradient(x) * dt
            if math.isinf(q):
                x = x - drift
            else:
                x = x - drift + math.sqrt(2.0 * dt / q) * xi
            if not np.all(np.isfinite(x)):
                logger.error(f"Langevin path diverged at step {k + 1}")
                raise DivergenceError(k + 1)
            if keep_path:
                states[k + 1] = x

    return states if keep_path else x


def euler_maruyama(
    objective: Objective,
    q_of_t: QSchedule,
    dt: float,
    steps: int,
    x0,
    seed: Optional[int] = None
) -> LangevinPath:
    """
    Simulate X_{k+1} = X_k - grad f(X_k) dt + sqrt(2 / Q_p(t_k)) sqrt(dt) xi_k

    Args:
        objective: Differentiable objective (shifted gradient = raw gradient)
        q_of_t: Constant Q_p or a function of time t_k = k * dt; inf turns
            the noise off and gives plain gradient descent
        dt: Step size, at most 0.1
        steps: Number of steps
        x0: Start point (d,) or batch of start points (n, d)
        seed: Generator seed

    Returns:
        LangevinPath with steps + 1 states

    Raises:
        DivergenceError: if the state leaves the finite floats
        NonDifferentiablePointError: if the path hits a non-smooth locus
    """
    states = _integrate(objective, q_of_t, dt, steps, x0, seed, keep_path=True)
    logger.debug(f"Simulated {steps} Langevin steps on {objective.name} (dt={dt})")
    return LangevinPath(dt=dt, q_of_t=q_of_t, states=states, seed=seed)


@dataclass(frozen=True)
class StationaryMoments:
    mean: np.ndarray
    covariance: np.ndarray
    n_samples: int

    @property
    def variances(self) -> np.ndarray:
        return np.diag(self.covariance)


def stationary_moments(path: LangevinPath, burn_in: float = DEFAULT_BURN_IN) -> StationaryMoments:
    """Mean and covariance of the states after discarding the first burn_in fraction"""
    if not 0 <= burn_in < 1:
        raise InvalidArgumentError(f"burn_in must lie in [0, 1), got {burn_in}")
    start = int(math.ceil(burn_in * path.states.shape[0]))
    samples = path.states[start:].reshape(-1, path.states.shape[-1])
    if samples.shape[0] < 2:
        raise InvalidArgumentError("Not enough post-burn-in samples for moments")
    cov = np.atleast_2d(np.cov(samples, rowvar=False))
    return StationaryMoments(mean=samples.mean(axis=0), covariance=cov, n_samples=samples.shape[0])


def gibbs_log_density(objective: Objective, q_param: float, x):
    """Unnormalized log Gibbs density -Q_p f(x)"""
    _check_positive("q_param", q_param)
    return -q_param * objective.evaluate(x)


def witten_potential(objective: Objective, h: float, mass: float, x):
    """
    Real Witten-Laplacian potential V = -(mass/2) (|grad f|^2 - h lap f)

    Args:
        objective: Objective twice differentiable at x
        h: Semiclassical parameter (2 / Q_p); 0 is allowed
        mass: Positive mass
        x: Point or batch of points

    Raises:
        NonDifferentiablePointError: at a registered non-smooth point
    """
    if not (math.isfinite(h) and h >= 0):
        raise InvalidArgumentError(f"h must be finite and >= 0, got {h!r}")
    _check_positive("mass", mass)
    grad = objective.gradient(x)
    lap = objective.laplacian(x)
    grad_sq = np.sum(grad * grad, axis=-1)
    value = -0.5 * mass * (grad_sq - h * lap)
    return float(value) if np.ndim(value) == 0 else value


def _resolve_local_min(objective: Objective, start: Optional[Union[LocalMinimum, np.ndarray]]) -> LocalMinimum:
    if not objective.local_minima:
        raise InvalidArgumentError(f"{objective.name} has no registered non-global local minimum")
    if start is None:
        return objective.local_minima[0]
    if isinstance(start, LocalMinimum):
        point = start.point
    else:
        point = np.asarray(start, dtype=np.float64)
    for local in objective.local_minima:
        if point.shape == local.point.shape and np.allclose(point, local.point, atol=1e-9):
            return local
    raise InvalidArgumentError(f"{point} is not a registered local minimum of {objective.name}")


def escape_rate(
    objective: Objective,
    start_local_min: Optional[Union[LocalMinimum, np.ndarray]] = None,
    q_param: float = 5.0,
    horizon_steps: int = 100_000,
    trials: int = 500,
    seed: Optional[int] = 0,
    dt: float = DEFAULT_ESCAPE_DT
) -> float:
    """
    Fraction of Langevin paths started at a local minimum that end in a deeper basin

    A path has escaped when its terminal shifted value is below the local
    minimum's value minus half the barrier height. All trials run as one
    batch from a single seed, so equal seeds at different Q_p share their
    noise realizations.
    """
    local = _resolve_local_min(objective, start_local_min)
    if int(trials) != trials or trials < 1:
        raise InvalidArgumentError(f"trials must be >= 1, got {trials!r}")
    _check_positive("q_param", q_param, allow_inf=True)

    threshold = local.value - 0.5 * local.barrier_height
    x0 = np.tile(local.point, (int(trials), 1))
    final = _integrate(objective, q_param, dt, horizon_steps, x0, seed, keep_path=False)
    escaped = int(np.count_nonzero(objective.evaluate(final) < threshold))
    rate = escaped / int(trials)
    logger.info(f"Escape rate on {objective.name} at Q_p={q_param}: {escaped}/{trials} = {rate:.3f}")
    return rate


@dataclass(frozen=True)
class NoiseBoundResult:
    """Outcome of the noise-norm bound check"""
    bound: float
    violation_fraction: float
    trials: int
    within_bound: int = field(default=0)


def lemma1_bound_check(
    lambda0: float,
    q_param: float,
    trials: int = 100_000,
    seed: Optional[int] = 0,
    dim: int = 2
) -> NoiseBoundResult:
    """
    Check that noise inside sqrt(2 lambda0 / Q_p) never increases the virtual objective

    Uses the virtual quadratic (lambda0 / 2)|x|^2 with eta = 1 / lambda0 and
    places x_t where the gradient norm equals the bound. For those trials
    whose noise norm is within the bound, f(x_{t+1}) - f(x_t) must be <= 0.
    """
    params = SearchStepParams(lambda0=lambda0, q_param=q_param)
    if int(trials) != trials or trials < 1:
        raise InvalidArgumentError(f"trials must be >= 1, got {trials!r}")
    bound = params.noise_bound
    virtual = make_quadratic(np.full(dim, 0.5 * lambda0))
    rng = np.random.default_rng(seed)

    directions = rng.standard_normal((int(trials), dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    x = directions * (bound / lambda0)
    grad = virtual.gradient(x)
    r = sample_search_noise(rng, dim, lambda0, q_param, size=int(trials))

    x_next = search_step_from_params(params, x, grad, r)
    delta = virtual.evaluate(x_next) - virtual.evaluate(x)

    inside = np.linalg.norm(r, axis=1) <= bound
    tolerance = 1e-12 * max(1.0, bound * bound / lambda0)
    violations = int(np.count_nonzero(inside & (delta > tolerance)))
    n_inside = int(np.count_nonzero(inside))
    fraction = violations / n_inside if n_inside else 0.0
    logger.debug(f"Noise bound check lambda0={lambda0} Q_p={q_param}: {violations}/{n_inside} violations")
    return NoiseBoundResult(bound=bound, violation_fraction=fraction, trials=int(trials), within_bound=n_inside)
