"""
Benchmark Objectives - Registry of Test Functions with Analytic Calculus

Every registered objective is shifted so that its global minimum value is 0
(minimize f: R^d -> R^+). Each one carries its raw formula, analytic
gradient and Laplacian, a default search box and its known optimum.

All callables work on batches: x has shape (..., dim) and values have
shape (...).
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import InvalidArgumentError, NonDifferentiablePointError, NotFoundError

logger = logging.getLogger(__name__)

ArrayFn = Callable[[np.ndarray], np.ndarray]
BoxSpec = Union[Tuple[float, float], Tuple[Sequence[float], Sequence[float]]]

BENCHMARK_OBJECTIVES = ("xin_she_yang_n4", "salomon", "drop_wave", "schaffer_n2")
VALIDATION_OBJECTIVES = ("sphere",)

DEFAULT_BOXES: Dict[str, Tuple[float, float]] = {
    "xin_she_yang_n4": (-10.0, 10.0),
    "salomon": (-100.0, 100.0),
    "drop_wave": (-5.12, 5.12),
    "schaffer_n2": (-100.0, 100.0),
    "sphere": (-10.0, 10.0),
}

DEFAULT_DIM = 2


def _readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LocalMinimum:
    """A non-global local minimum with the barrier separating it from a deeper basin"""
    point: np.ndarray
    value: float
    barrier_height: float


@dataclass(frozen=True, eq=False)
class Objective:
    """
    A named objective on a search box

    Attributes:
        name: Canonical identifier
        dim: Input dimension
        box_lo / box_hi: Per-coordinate search bounds
        opt_point: Known global minimizer
        opt_value_raw: Raw (unshifted) minimum value; evaluate() subtracts it
        raw_fn / grad_fn / lap_fn: Batched raw value, gradient and Laplacian
        nonsmooth_fn: Batched predicate marking registered non-smooth points
        local_minima: Registered non-global local minima (validation objectives)
    """
    name: str
    dim: int
    box_lo: np.ndarray
    box_hi: np.ndarray
    opt_point: np.ndarray
    opt_value_raw: float
    raw_fn: ArrayFn
    grad_fn: ArrayFn
    lap_fn: ArrayFn
    nonsmooth_fn: Optional[ArrayFn] = None
    local_minima: Tuple[LocalMinimum, ...] = field(default_factory=tuple)
    validation_only: bool = False

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise InvalidArgumentError(f"dim must be a positive integer, got {self.dim!r}")
        for attr in ("box_lo", "box_hi", "opt_point"):
            arr = np.broadcast_to(np.asarray(getattr(self, attr), dtype=np.float64), (self.dim,))
            object.__setattr__(self, attr, _readonly(arr))
        if not np.all(self.box_lo < self.box_hi):
            raise InvalidArgumentError(f"{self.name}: box_lo must be < box_hi componentwise")

    @property
    def raw_offset(self) -> float:
        """Constant added to the raw formula so the minimum is 0"""
        return -self.opt_value_raw

    @property
    def opt_value_shifted(self) -> float:
        return 0.0

    @property
    def box_width(self) -> np.ndarray:
        return self.box_hi - self.box_lo

    def _points(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=np.float64)
        if arr.ndim == 0 or arr.shape[-1] != self.dim:
            raise InvalidArgumentError(
                f"{self.name} expects points with last dimension {self.dim}, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError(f"{self.name}: non-finite coordinates")
        return arr

    def _check_smooth(self, arr: np.ndarray) -> None:
        if self.nonsmooth_fn is not None and np.any(self.nonsmooth_fn(arr)):
            raise NonDifferentiablePointError(
                f"{self.name} is not differentiable at a requested point"
            )

    @staticmethod
    def _scalar_or_array(values: np.ndarray):
        return float(values) if np.ndim(values) == 0 else values

    def evaluate(self, x):
        """Shifted objective value f(x) - min f (float for one point, array for a batch)"""
        arr = self._points(x)
        return self._scalar_or_array(self.raw_fn(arr) + self.raw_offset)

    def evaluate_raw(self, x):
        """Unshifted value of the published formula"""
        arr = self._points(x)
        return self._scalar_or_array(self.raw_fn(arr))

    def gradient(self, x) -> np.ndarray:
        """Analytic gradient with the same shape as x"""
        arr = self._points(x)
        self._check_smooth(arr)
        return self.grad_fn(arr)

    def laplacian(self, x):
        """Analytic Laplacian sum_i d^2 f / dx_i^2"""
        arr = self._points(x)
        self._check_smooth(arr)
        return self._scalar_or_array(self.lap_fn(arr))

    def is_smooth_at(self, x) -> bool:
        arr = self._points(x)
        return self.nonsmooth_fn is None or not bool(np.any(self.nonsmooth_fn(arr)))

    def contains(self, x) -> bool:
        """True when every point of x lies inside the box"""
        arr = self._points(x)
        return bool(np.all((arr >= self.box_lo) & (arr <= self.box_hi)))

    def sample_uniform(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
        """Uniform draw(s) from the box"""
        shape = (self.dim,) if size is None else (size, self.dim)
        return rng.uniform(self.box_lo, self.box_hi, size=shape)


# -- raw formulas ---------------------------------------------------------

def _radius(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(x * x, axis=-1))


def _at_origin(x: np.ndarray) -> np.ndarray:
    return np.all(x == 0.0, axis=-1)


def _sphere_value(x):
    return 0.5 * np.sum(x * x, axis=-1)


def _sphere_grad(x):
    return np.array(x, dtype=np.float64, copy=True)


def _sphere_lap(x):
    return np.full(x.shape[:-1], float(x.shape[-1]))


def _salomon_value(x):
    r = _radius(x)
    return 1.0 - np.cos(2.0 * np.pi * r) + 0.1 * r


def _salomon_radial(r):
    d1 = 2.0 * np.pi * np.sin(2.0 * np.pi * r) + 0.1
    d2 = 4.0 * np.pi ** 2 * np.cos(2.0 * np.pi * r)
    return d1, d2


def _salomon_grad(x):
    r = _radius(x)
    d1, _ = _salomon_radial(r)
    return (d1 / r)[..., None] * x


def _salomon_lap(x):
    r = _radius(x)
    d1, d2 = _salomon_radial(r)
    return d2 + (x.shape[-1] - 1) * d1 / r


def _drop_wave_value(x):
    s = np.sum(x * x, axis=-1)
    return -(1.0 + np.cos(12.0 * np.sqrt(s))) / (0.5 * s + 2.0)


def _drop_wave_radial(r):
    numer = 1.0 + np.cos(12.0 * r)
    denom = 0.5 * r * r + 2.0
    u = 12.0 * np.sin(12.0 * r) * denom + numer * r
    du = 144.0 * np.cos(12.0 * r) * denom + numer
    d1 = u / denom ** 2
    d2 = du / denom ** 2 - 2.0 * u * r / denom ** 3
    return d1, d2


def _drop_wave_grad(x):
    r = _radius(x)
    d1, _ = _drop_wave_radial(r)
    return (d1 / r)[..., None] * x


def _drop_wave_lap(x):
    r = _radius(x)
    d1, d2 = _drop_wave_radial(r)
    return d2 + d1 / r


_SCHAFFER_C = 0.001


def _schaffer_parts(x):
    x1, x2 = x[..., 0], x[..., 1]
    u = x1 * x1 - x2 * x2
    s = x1 * x1 + x2 * x2
    e = 1.0 + _SCHAFFER_C * s
    a = np.sin(u) ** 2 - 0.5
    return x1, x2, u, s, e, a


def _schaffer_n2_value(x):
    _, _, _, _, e, a = _schaffer_parts(x)
    return 0.5 + a / e ** 2


def _schaffer_n2_grad(x):
    x1, x2, u, _, e, a = _schaffer_parts(x)
    sin2u = np.sin(2.0 * u)
    common = 4.0 * _SCHAFFER_C * a / e ** 3
    gx = 2.0 * x1 * sin2u / e ** 2 - common * x1
    gy = -2.0 * x2 * sin2u / e ** 2 - common * x2
    return np.stack([gx, gy], axis=-1)


def _schaffer_n2_lap(x):
    _, _, u, s, e, a = _schaffer_parts(x)
    c = _SCHAFFER_C
    return (8.0 * s * np.cos(2.0 * u) / e ** 2
            - 16.0 * c * u * np.sin(2.0 * u) / e ** 3
            - 8.0 * c * a / e ** 3
            + 24.0 * c * c * s * a / e ** 4)


def _xsy_parts(x):
    q = np.sum(x * x, axis=-1)
    eq = np.exp(-q)
    p = np.sum(np.sin(x) ** 2, axis=-1) - eq
    v = np.sqrt(np.abs(x))
    w = np.exp(-np.sum(np.sin(v) ** 2, axis=-1))
    return q, eq, p, v, w


def _xin_she_yang_n4_value(x):
    _, _, p, _, w = _xsy_parts(x)
    return 2.0 + p * w


def _xsy_derivatives(x):
    _, eq, p, v, w = _xsy_parts(x)
    dp = np.sin(2.0 * x) + 2.0 * x * eq[..., None]
    dt = np.sin(2.0 * v) * np.sign(x) / (2.0 * v)
    return eq, p, v, w, dp, dt


def _xin_she_yang_n4_grad(x):
    _, p, _, w, dp, dt = _xsy_derivatives(x)
    return w[..., None] * (dp - p[..., None] * dt)


def _xin_she_yang_n4_lap(x):
    eq, p, v, w, dp, dt = _xsy_derivatives(x)
    d2p = 2.0 * np.cos(2.0 * x) + (2.0 - 4.0 * x * x) * eq[..., None]
    d2t = (2.0 * v * np.cos(2.0 * v) - np.sin(2.0 * v)) / (4.0 * v ** 3)
    pp = p[..., None]
    return w * np.sum(d2p - 2.0 * dp * dt + pp * dt * dt - pp * d2t, axis=-1)


def _on_coordinate_axis(x):
    return np.any(x == 0.0, axis=-1)


# -- registry -------------------------------------------------------------

def _resolve_box(name: str, dim: int, box: Optional[BoxSpec]) -> Tuple[np.ndarray, np.ndarray]:
    lo, hi = box if box is not None else DEFAULT_BOXES[name]
    lo = np.broadcast_to(np.asarray(lo, dtype=np.float64), (dim,))
    hi = np.broadcast_to(np.asarray(hi, dtype=np.float64), (dim,))
    return lo, hi


def _build_sphere(dim, lo, hi):
    return Objective("sphere", dim, lo, hi, np.zeros(dim), 0.0,
                     _sphere_value, _sphere_grad, _sphere_lap, validation_only=True)


def _build_salomon(dim, lo, hi):
    return Objective("salomon", dim, lo, hi, np.zeros(dim), 0.0,
                     _salomon_value, _salomon_grad, _salomon_lap, nonsmooth_fn=_at_origin)


def _build_drop_wave(dim, lo, hi):
    # the radial formulas divide by r, so the origin is registered as non-smooth
    return Objective("drop_wave", dim, lo, hi, np.zeros(dim), -1.0,
                     _drop_wave_value, _drop_wave_grad, _drop_wave_lap, nonsmooth_fn=_at_origin)


def _build_schaffer_n2(dim, lo, hi):
    return Objective("schaffer_n2", dim, lo, hi, np.zeros(dim), 0.0,
                     _schaffer_n2_value, _schaffer_n2_grad, _schaffer_n2_lap)


def _build_xin_she_yang_n4(dim, lo, hi):
    return Objective("xin_she_yang_n4", dim, lo, hi, np.zeros(dim), 1.0,
                     _xin_she_yang_n4_value, _xin_she_yang_n4_grad, _xin_she_yang_n4_lap,
                     nonsmooth_fn=_on_coordinate_axis)


# name -> (builder, fixed dimension or None)
_REGISTRY: Dict[str, Tuple[Callable[..., Objective], Optional[int]]] = {
    "xin_she_yang_n4": (_build_xin_she_yang_n4, None),
    "salomon": (_build_salomon, None),
    "drop_wave": (_build_drop_wave, 2),
    "schaffer_n2": (_build_schaffer_n2, 2),
    "sphere": (_build_sphere, None),
}


def list_objectives(include_validation: bool = True) -> Tuple[str, ...]:
    """Canonical names of the registered objectives"""
    if include_validation:
        return BENCHMARK_OBJECTIVES + VALIDATION_OBJECTIVES
    return BENCHMARK_OBJECTIVES


def fixed_dimension(name: str) -> Optional[int]:
    """Dimension an objective is restricted to, or None if any d works"""
    if name not in _REGISTRY:
        raise NotFoundError(f"Unknown objective '{name}'. Known: {', '.join(list_objectives())}")
    return _REGISTRY[name][1]


def get_objective(name: str, dim: Optional[int] = None, box: Optional[BoxSpec] = None) -> Objective:
    """
    Build a registered objective

    Args:
        name: Canonical objective name
        dim: Input dimension (default 2; fixed-dimension objectives only accept 2)
        box: Optional (lo, hi) override, scalars or per-coordinate sequences

    Returns:
        Objective instance

    Raises:
        NotFoundError: unknown name
        InvalidArgumentError: unsupported dimension or malformed box
    """
    fixed = fixed_dimension(name)
    builder = _REGISTRY[name][0]

    if dim is None:
        dim = fixed or DEFAULT_DIM
    if int(dim) != dim or dim < 1:
        raise InvalidArgumentError(f"dim must be a positive integer, got {dim!r}")
    if fixed is not None and dim != fixed:
        raise InvalidArgumentError(f"{name} is defined only for d={fixed}, got d={dim}")

    try:
        lo, hi = _resolve_box(name, int(dim), box)
    except (TypeError, ValueError) as e:
        raise InvalidArgumentError(f"Malformed box for {name}: {box!r} ({e})") from e

    return builder(int(dim), lo, hi)


def make_quadratic(
    coeffs: Sequence[float],
    center: Optional[Sequence[float]] = None,
    half_width: float = 10.0
) -> Objective:
    """
    Separable quadratic f(x) = sum_i a_i (x_i - c_i)^2 with known minimum 0 at c

    Used as the virtual quadratic objective (max Hessian eigenvalue 2 max a_i)
    and for critical-point constructions.
    """
    a = np.asarray(coeffs, dtype=np.float64).ravel()
    if a.size == 0 or not np.all(a > 0):
        raise InvalidArgumentError(f"Quadratic coefficients must be positive, got {coeffs!r}")
    c = np.zeros_like(a) if center is None else np.asarray(center, dtype=np.float64).ravel()
    if c.shape != a.shape:
        raise InvalidArgumentError("center must match the number of coefficients")

    def value(x):
        return np.sum(a * (x - c) ** 2, axis=-1)

    def grad(x):
        return 2.0 * a * (x - c)

    def lap(x):
        return np.full(x.shape[:-1], 2.0 * float(np.sum(a)))

    return Objective("quadratic", a.size, c - half_width, c + half_width, c, 0.0,
                     value, grad, lap, validation_only=True)


def make_double_well(tilt: float = 0.3) -> Objective:
    """
    Tilted 1-D double well f(x) = (x^2 - 1)^2 + tilt * x + tilt

    For tilt in (0, 0.7) the right well is a non-global local minimum,
    registered together with the height of the barrier to its left.
    """
    if not 0 < tilt < 0.7:
        raise InvalidArgumentError(f"tilt must lie in (0, 0.7) to keep two wells, got {tilt}")

    def value(x):
        x1 = x[..., 0]
        return (x1 * x1 - 1.0) ** 2 + tilt * x1 + tilt

    def grad(x):
        x1 = x[..., 0]
        return (4.0 * x1 * (x1 * x1 - 1.0) + tilt)[..., None]

    def lap(x):
        x1 = x[..., 0]
        return 12.0 * x1 * x1 - 4.0

    # critical points solve 4x^3 - 4x + tilt = 0
    roots = np.sort(np.real(np.roots([4.0, 0.0, -4.0, tilt])))
    x_global, x_barrier, x_local = (float(r) for r in roots)

    def raw(point):
        return float(value(np.array([[point]]))[0])

    f_global = raw(x_global)
    local = LocalMinimum(
        point=_readonly([x_local]),
        value=raw(x_local) - f_global,
        barrier_height=raw(x_barrier) - raw(x_local),
    )
    logger.debug(f"Double well tilt={tilt}: global {x_global:.4f}, local {x_local:.4f}, "
                 f"barrier {local.barrier_height:.4f}")

    return Objective("double_well", 1, [-2.0], [2.0], [x_global], f_global,
                     value, grad, lap, local_minima=(local,), validation_only=True)


def central_difference_gradient(objective: Objective, x, step: float = 2.0 ** -14) -> np.ndarray:
    """
    Fourth-order central finite-difference gradient of the shifted objective at one point

    A power-of-two step keeps x +- step exact for coordinates of moderate size.
    """
    point = np.asarray(x, dtype=np.float64)
    grad = np.empty(objective.dim)
    for i in range(objective.dim):
        e = np.zeros(objective.dim)
        e[i] = step
        grad[i] = (
            -objective.evaluate(point + 2.0 * e) + 8.0 * objective.evaluate(point + e)
            - 8.0 * objective.evaluate(point - e) + objective.evaluate(point - 2.0 * e)
        ) / (12.0 * step)
    return grad


def central_difference_laplacian(objective: Objective, x, step: float = 1e-4) -> float:
    """Second-order central-difference Laplacian at one point"""
    point = np.asarray(x, dtype=np.float64)
    center = objective.evaluate(point)
    total = 0.0
    for i in range(objective.dim):
        e = np.zeros(objective.dim)
        e[i] = step
        total += (objective.evaluate(point + e) - 2.0 * center + objective.evaluate(point - e)) / step ** 2
    return total
