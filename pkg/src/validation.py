"""
Statistical validation suite behind the `validate` subcommand

Each check is a small Monte Carlo experiment with a fixed seed that returns
PASS/FAIL plus a one-line detail. quick=True shortens the escape-rate
experiment; every other check runs at full size.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np

from src.objectives import BENCHMARK_OBJECTIVES, get_objective, make_double_well, make_quadratic
from src.langevin import (
    escape_rate,
    euler_maruyama,
    lemma1_bound_check,
    stationary_moments,
    witten_potential,
)
from src.quantizer import error_statistics, ks_critical_value

logger = logging.getLogger(__name__)

WNH_Q_LEVELS = (1.0, 4.0, 16.0)
WNH_SAMPLES = 1_000_000
WNH_VARIANCE_TOLERANCE = 0.02
WNH_KS_ALPHA = 0.01
WNH_MAX_LAG1 = 0.01
STATIONARY_Q_LEVELS = (5.0, 10.0)
STATIONARY_CHAINS = 256
STATIONARY_STEPS = 20_000
MOMENT_TOLERANCE = 0.05
ESCAPE_Q_LEVELS = (10.0, 5.0, 2.0)
NOISE_BOUND_CASES = ((1.0, 2.0), (2.0, 8.0), (4.0, 1.0))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def __str__(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def check_quantization_noise(seed: int = 0) -> CheckResult:
    """Quantization errors of uniform samples: zero mean, variance 1/(12 Q^2), uniform and uncorrelated"""
    rng = np.random.default_rng(seed)
    samples = rng.uniform(-100.0, 100.0, WNH_SAMPLES)
    failures = []
    for q in WNH_Q_LEVELS:
        st = error_statistics(samples, q)
        if abs(st.mean) >= 3.0 * st.mean_standard_error:
            failures.append(f"Q={q:g} mean {st.mean:.3g}")
        if abs(st.variance / st.target_variance - 1.0) > WNH_VARIANCE_TOLERANCE:
            failures.append(f"Q={q:g} variance {st.variance:.4g} vs {st.target_variance:.4g}")
        if st.ks_uniform >= ks_critical_value(st.n, alpha=WNH_KS_ALPHA):
            failures.append(f"Q={q:g} KS {st.ks_uniform:.4g}")
        if abs(st.lag1_autocorr) >= WNH_MAX_LAG1:
            failures.append(f"Q={q:g} lag-1 autocorrelation {st.lag1_autocorr:.3g}")
    detail = "; ".join(failures) or f"Q in {WNH_Q_LEVELS}, n={WNH_SAMPLES}"
    return CheckResult("quantization-noise", not failures, detail)


def check_gibbs_stationarity(seed: int = 0) -> CheckResult:
    """Stationary variance of Langevin on the sphere equals 1/Q_p, also at half the step"""
    sphere = get_objective("sphere", dim=1)
    failures = []
    parts = []
    for q in STATIONARY_Q_LEVELS:
        estimates = []
        for dt, steps in ((0.01, STATIONARY_STEPS), (0.005, 2 * STATIONARY_STEPS)):
            path = euler_maruyama(sphere, q, dt, steps, np.zeros((STATIONARY_CHAINS, 1)), seed)
            variance = float(stationary_moments(path).variances[0])
            estimates.append(variance)
            if abs(variance * q - 1.0) > MOMENT_TOLERANCE:
                failures.append(f"Q={q:g} dt={dt} variance {variance:.4g}")
        if abs(estimates[1] / estimates[0] - 1.0) > MOMENT_TOLERANCE:
            failures.append(f"Q={q:g} dt-halving moved variance {estimates[0]:.4g} -> {estimates[1]:.4g}")
        parts.append(f"Q={q:g}: {estimates[0]:.4g}")
    return CheckResult("gibbs-stationarity", not failures, "; ".join(failures) or ", ".join(parts))


def check_witten_potential(seed: int = 0) -> CheckResult:
    """V = (m h / 2) lap f at critical points; V <= 0 everywhere when h = 0"""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(100):
        dim = int(rng.integers(1, 4))
        quadratic = make_quadratic(rng.uniform(0.1, 5.0, dim), rng.uniform(-3.0, 3.0, dim))
        h = float(rng.uniform(0.01, 2.0))
        mass = float(rng.uniform(0.5, 2.0))
        expected = 0.5 * mass * h * float(quadratic.laplacian(quadratic.opt_point))
        value = witten_potential(quadratic, h, mass, quadratic.opt_point)
        if abs(value - expected) > 1e-12 * max(1.0, abs(expected)):
            failures += 1

    positive = 0
    for name in BENCHMARK_OBJECTIVES:
        objective = get_objective(name)
        points = objective.sample_uniform(rng, size=10_000)
        positive += int(np.count_nonzero(witten_potential(objective, 0.0, 1.0, points) > 0))

    passed = failures == 0 and positive == 0
    return CheckResult(
        "witten-potential", passed,
        f"{failures} critical-point mismatches, {positive} positive values at h=0"
    )


def check_escape(seed: int = 0, quick: bool = False) -> CheckResult:
    """No escape without noise; positive escape that grows as Q_p decreases"""
    well = make_double_well()
    trials, horizon = (200, 50_000) if quick else (500, 100_000)
    frozen = escape_rate(well, None, math.inf, horizon, trials, seed)
    rates = [escape_rate(well, None, q, horizon, trials, seed) for q in ESCAPE_Q_LEVELS]

    monotone = all(a <= b for a, b in zip(rates, rates[1:]))
    passed = frozen == 0.0 and rates[1] > 0 and rates[2] > rates[1] and monotone
    detail = f"Q=inf: {frozen:.3f}, " + ", ".join(
        f"Q={q:g}: {r:.3f}" for q, r in zip(ESCAPE_Q_LEVELS, rates)
    )
    return CheckResult("escape-rate", passed, detail)


def check_noise_bound(seed: int = 0) -> CheckResult:
    """Noise inside sqrt(2 lambda0 / Q_p) never increases the virtual quadratic"""
    results = [lemma1_bound_check(l0, q, 100_000, seed) for l0, q in NOISE_BOUND_CASES]
    passed = all(r.violation_fraction == 0.0 for r in results)
    detail = ", ".join(
        f"(lambda0={l0:g}, Q={q:g}) bound {r.bound:.4g} violations {r.violation_fraction:g}"
        for (l0, q), r in zip(NOISE_BOUND_CASES, results)
    )
    return CheckResult("noise-bound", passed, detail)


CHECKS: Sequence[Callable[..., CheckResult]] = (
    check_quantization_noise,
    check_gibbs_stationarity,
    check_witten_potential,
    check_escape,
    check_noise_bound,
)


def run_validation_suite(seed: int = 0, quick: bool = False) -> List[CheckResult]:
    """Run every check and log its outcome"""
    results = []
    for check in CHECKS:
        if check is check_escape:
            result = check(seed, quick=quick)
        else:
            result = check(seed)
        log = logger.info if result.passed else logger.error
        log(str(result))
        results.append(result)
    return results
