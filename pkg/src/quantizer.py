"""
Objective Quantizer - Scalar Quantization and the Q_p Schedule

This module handles:
- Quantization of a scalar onto the lattice Z / Q_p (round half up)
- The monotone quantization-parameter schedule Q_p = eta * base^power
- Algorithm initialization of eta from the first objective value
- Empirical checks of the white-noise model of the quantization error
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Sequence, Tuple, Union

import numpy as np
from scipy import stats

from src.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

DEFAULT_BASE = 2
# 2^-40 ~ 9.1e-13: floor(Q_p * x) stays exact for |x| up to ~1e3 in doubles
DEFAULT_POWER_CAP = 40


@dataclass(frozen=True)
class QuantizedValue:
    """A scalar together with its quantized image"""
    raw: float
    quantized: float
    fraction: float
    q_param: float

    @property
    def lattice_index(self) -> int:
        """Integer k with quantized == k / q_param"""
        return int(round(self.q_param * self.quantized))


def _check_q_param(q_param: float) -> None:
    if not (isinstance(q_param, (int, float, np.floating, np.integer))
            and math.isfinite(q_param) and q_param > 0):
        raise InvalidArgumentError(f"q_param must be a positive finite number, got {q_param!r}")


def quantize(x: float, q_param: float) -> QuantizedValue:
    """
    Quantize a scalar with quantization parameter Q_p

    x^Q = floor(Q_p * (x + 0.5 / Q_p)) / Q_p, i.e. rounding to the nearest
    multiple of the step 1/Q_p with ties going up. The fraction is
    recovered afterwards as Q_p * (x^Q - x).

    Args:
        x: Finite value to quantize
        q_param: Quantization parameter Q_p > 0 (reciprocal of the step)

    Returns:
        QuantizedValue with raw, quantized, fraction and q_param

    Raises:
        InvalidArgumentError: if x is not finite or q_param <= 0
    """
    _check_q_param(q_param)
    if not math.isfinite(x):
        raise InvalidArgumentError(f"Cannot quantize non-finite value {x!r}")

    x = float(x)
    q_param = float(q_param)
    quantized = math.floor(q_param * (x + 0.5 / q_param)) / q_param
    fraction = q_param * (quantized - x)
    return QuantizedValue(raw=x, quantized=quantized, fraction=fraction, q_param=q_param)


def quantize_array(values: Union[Sequence[float], np.ndarray], q_param: float) -> np.ndarray:
    """
    Vectorized form of quantize(), returning only the quantized images

    Args:
        values: Array-like of finite values
        q_param: Quantization parameter Q_p > 0

    Returns:
        Array of quantized values with the input's shape
    """
    _check_q_param(q_param)
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("Cannot quantize non-finite values")
    q_param = float(q_param)
    return np.floor(q_param * (arr + 0.5 / q_param)) / q_param


@dataclass(frozen=True)
class QuantizationSchedule:
    """
    Monotone quantization-parameter schedule Q_p = eta * base^power

    Schedules are immutable values; advance() returns a new schedule so a
    run can keep a history without aliasing.
    """
    eta: float
    base: int = DEFAULT_BASE
    power: int = 0
    power_cap: int = DEFAULT_POWER_CAP

    def __post_init__(self):
        if not (math.isfinite(self.eta) and self.eta > 0):
            raise InvalidArgumentError(f"eta must be positive and finite, got {self.eta!r}")
        if int(self.base) != self.base or self.base < 2:
            raise InvalidArgumentError(f"base must be an integer >= 2, got {self.base!r}")
        if int(self.power_cap) != self.power_cap or self.power_cap < 0:
            raise InvalidArgumentError(f"power_cap must be a nonnegative integer, got {self.power_cap!r}")
        if int(self.power) != self.power or not 0 <= self.power <= self.power_cap:
            raise InvalidArgumentError(
                f"power must be an integer in [0, {self.power_cap}], got {self.power!r}"
            )

    @classmethod
    def from_initial_value(
        cls,
        f0: float,
        base: int = DEFAULT_BASE,
        power_cap: int = DEFAULT_POWER_CAP
    ) -> "QuantizationSchedule":
        """Schedule at power 0 with eta chosen from the first objective value"""
        return cls(eta=initial_eta(f0, base), base=base, power=0, power_cap=power_cap)

    @property
    def q_param(self) -> float:
        """Current Q_p = eta * base^power"""
        return self.eta * float(self.base ** self.power)

    @property
    def step(self) -> float:
        """Current quantization step 1 / Q_p"""
        return 1.0 / self.q_param

    @property
    def saturated(self) -> bool:
        return self.power >= self.power_cap

    def advance(self) -> Tuple["QuantizationSchedule", bool]:
        """
        Increase the power by one

        Returns:
            (new schedule, saturated flag). At the cap the schedule is
            returned unchanged and the flag is True.
        """
        if self.power >= self.power_cap:
            logger.debug(f"Schedule saturated at power {self.power}")
            return self, True
        return replace(self, power=self.power + 1), False


def schedule_q(schedule: QuantizationSchedule) -> float:
    """Q_p of a schedule"""
    return schedule.q_param


def advance(schedule: QuantizationSchedule) -> Tuple[QuantizationSchedule, bool]:
    """Functional form of QuantizationSchedule.advance"""
    return schedule.advance()


def initial_eta(f0: float, base: int = DEFAULT_BASE) -> float:
    """
    Initial schedule constant eta = base^(-floor(log_base(f0 + 1)))

    Args:
        f0: Objective value at the initial candidate (must be >= 0)
        base: Integer schedule base >= 2

    Returns:
        eta as a float (exact for base 2)
    """
    if int(base) != base or base < 2:
        raise InvalidArgumentError(f"base must be an integer >= 2, got {base!r}")
    if not math.isfinite(f0) or f0 < 0:
        raise InvalidArgumentError(f"f0 must be finite and nonnegative, got {f0!r}")

    base = int(base)
    value = f0 + 1.0
    exponent = int(math.floor(math.log(value, base)))
    # math.log is off by one ulp at exact powers (log(1000, 10) < 3)
    while base ** (exponent + 1) <= value:
        exponent += 1
    while exponent > 0 and base ** exponent > value:
        exponent -= 1
    return 1.0 / float(base ** exponent)


@dataclass(frozen=True)
class ErrorStatistics:
    """Empirical summary of quantization errors e_i = x^Q_i - x_i"""
    n: int
    mean: float
    variance: float
    ks_uniform: float
    ks_pvalue: float
    lag1_autocorr: float
    target_variance: float

    @property
    def mean_standard_error(self) -> float:
        return math.sqrt(self.variance / self.n)


def error_statistics(samples: Union[Sequence[float], np.ndarray], q_param: float) -> ErrorStatistics:
    """
    Check the white-noise model of the quantization error on a sample

    Args:
        samples: At least two finite values
        q_param: Quantization parameter Q_p > 0

    Returns:
        ErrorStatistics with mean/variance of the errors, the KS statistic of
        Q_p * e against Uniform[-1/2, 1/2) and the lag-1 autocorrelation
    """
    values = np.asarray(samples, dtype=np.float64).ravel()
    if values.size < 2:
        raise InvalidArgumentError(f"error_statistics needs at least 2 samples, got {values.size}")

    errors = quantize_array(values, q_param) - values
    mean = float(np.mean(errors))
    variance = float(np.var(errors, ddof=1))

    ks = stats.kstest(q_param * errors, stats.uniform(loc=-0.5, scale=1.0).cdf)

    centered = errors - mean
    denom = float(np.dot(centered, centered))
    lag1 = float(np.dot(centered[:-1], centered[1:]) / denom) if denom > 0 else 0.0

    result = ErrorStatistics(
        n=int(values.size),
        mean=mean,
        variance=variance,
        ks_uniform=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        lag1_autocorr=lag1,
        target_variance=1.0 / (12.0 * q_param ** 2),
    )
    logger.debug(f"Error statistics at Q_p={q_param}: {result}")
    return result


def ks_critical_value(n: int, alpha: float = 0.01) -> float:
    """Asymptotic one-sample KS critical value at level alpha"""
    if n < 1 or not 0 < alpha < 1:
        raise InvalidArgumentError(f"Invalid KS parameters n={n}, alpha={alpha}")
    return float(stats.kstwobign.ppf(1.0 - alpha)) / math.sqrt(n)
