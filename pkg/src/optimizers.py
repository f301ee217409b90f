"""
Optimizers - Quantization-Based Random Search and Annealing Baselines

This module handles:
- Blind random search driven by a quantized objective (qbo)
- Simulated annealing with Metropolis acceptance and geometric cooling (sa)
- Simulated quantum annealing with Trotter replicas on continuous variables (qa)
- A shared per-iteration trace format and the improvement-ratio metric

Every run owns its numpy Generator seeded from the run config, so identical
configs give identical traces.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Union

import numpy as np

from src.errors import DegenerateScheduleError, InvalidArgumentError, NotFoundError
from src.objectives import BoxSpec, Objective, get_objective
from src.quantizer import DEFAULT_BASE, DEFAULT_POWER_CAP, QuantizationSchedule, quantize

logger = logging.getLogger(__name__)

# J grows without bound as the transverse field decays; beyond this the
# replicas are frozen anyway
MAX_REPLICA_COUPLING = 1.0e6

STOP_BUDGET = "budget"
STOP_SATURATED = "saturated"
STOP_SUCCESS = "success"


@dataclass(frozen=True)
class QBOParams:
    """Quantization schedule settings for the quantized random search"""
    base: int = DEFAULT_BASE
    power_cap: int = DEFAULT_POWER_CAP


@dataclass(frozen=True)
class SAParams:
    """
    Simulated annealing settings

    t0=None means T0 = f(x0) + 1. alpha is applied once per evaluation and
    the proposal standard deviation is sigma_scale * box width.
    """
    t0: Optional[float] = None
    alpha: float = 0.995
    sigma_scale: float = 0.1


@dataclass(frozen=True)
class QAParams:
    """Simulated quantum annealing settings (P replicas at slice temperature T)"""
    replicas: int = 20
    gamma0: float = 1.0
    gamma_decay: float = 0.9995
    temperature: float = 0.05
    sigma_scale: float = 0.1


@dataclass(frozen=True)
class RunConfig:
    """
    One seeded optimizer run

    objective may be a registered name or an Objective instance.
    """
    objective: Union[str, Objective]
    dim: Optional[int] = None
    seed: int = 0
    max_evaluations: int = 100_000
    success_tolerance: float = 1e-3
    box: Optional[BoxSpec] = None
    qbo: QBOParams = field(default_factory=QBOParams)
    sa: SAParams = field(default_factory=SAParams)
    qa: QAParams = field(default_factory=QAParams)
    keep_records: bool = True

    def __post_init__(self):
        if int(self.max_evaluations) != self.max_evaluations or self.max_evaluations < 1:
            raise InvalidArgumentError(f"max_evaluations must be >= 1, got {self.max_evaluations!r}")
        if not (math.isfinite(self.success_tolerance) and self.success_tolerance >= 0):
            raise InvalidArgumentError(f"success_tolerance must be >= 0, got {self.success_tolerance!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise InvalidArgumentError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    @property
    def objective_name(self) -> str:
        return self.objective if isinstance(self.objective, str) else self.objective.name

    def resolve_objective(self) -> Objective:
        if isinstance(self.objective, Objective):
            return self.objective
        return get_objective(self.objective, dim=self.dim, box=self.box)


@dataclass(frozen=True)
class TraceRecord:
    """One iteration: candidate, raw and quantized value, Q_p in force, acceptance"""
    t: int
    x: np.ndarray
    f: float
    fq: float
    qp: float
    accepted: bool

    def to_dict(self) -> Dict:
        return {
            "t": self.t,
            "x": [float(v) for v in self.x],
            "f": self.f,
            "fq": self.fq,
            "qp": self.qp,
            "accepted": self.accepted,
        }


@dataclass
class RunTrace:
    """Complete record of one run plus its summary"""
    config: RunConfig
    algorithm: str
    records: List[TraceRecord]
    initial_x: np.ndarray
    initial_f: float
    best_x: np.ndarray
    best_f_raw: float
    evaluations_used: int
    iterations: int
    iterations_to_success: Optional[int]
    stop_reason: str

    @property
    def success(self) -> bool:
        return self.iterations_to_success is not None

    @property
    def improvement_ratio(self) -> float:
        return improvement_ratio(self.initial_f, self.best_f_raw, 0.0)

    def replay_quantization(self) -> bool:
        """True when every recorded fq equals quantize(f, qp) (quantized search traces)"""
        return all(quantize(r.f, r.qp).quantized == r.fq for r in self.records)


class _RunState:
    """Bookkeeping shared by the three algorithms"""

    def __init__(self, config: RunConfig, algorithm: str):
        self.config = config
        self.algorithm = algorithm
        self.objective = config.resolve_objective()
        self.rng = np.random.default_rng(config.seed)
        self.records: List[TraceRecord] = []
        self.evaluations = 0
        self.best_x: Optional[np.ndarray] = None
        self.best_f = math.inf
        self.iterations_to_success: Optional[int] = None
        self.initial_x: Optional[np.ndarray] = None
        self.initial_f = math.nan

    def evaluate(self, x: np.ndarray) -> float:
        self.evaluations += 1
        return self.objective.evaluate(x)

    def start(self):
        x0 = self.objective.sample_uniform(self.rng)
        f0 = self.evaluate(x0)
        self.initial_x, self.initial_f = x0, f0
        return x0, f0

    @property
    def budget_left(self) -> bool:
        return self.evaluations < self.config.max_evaluations

    def record(self, t: int, x: np.ndarray, f: float, fq: float, qp: float, accepted: bool):
        if self.config.keep_records:
            self.records.append(TraceRecord(t, np.array(x, copy=True), f, fq, qp, accepted))

    def offer_best(self, t: int, x: np.ndarray, f: float) -> bool:
        """Update the incumbent best; returns True once the success tolerance is met"""
        if f < self.best_f or self.best_x is None:
            self.best_f = f
            self.best_x = np.array(x, copy=True)
        if self.iterations_to_success is None and self.best_f <= self.config.success_tolerance:
            self.iterations_to_success = t
        return self.iterations_to_success is not None

    def finish(self, iterations: int, stop_reason: str) -> RunTrace:
        trace = RunTrace(
            config=self.config,
            algorithm=self.algorithm,
            records=self.records,
            initial_x=self.initial_x,
            initial_f=self.initial_f,
            best_x=self.best_x,
            best_f_raw=self.best_f,
            evaluations_used=self.evaluations,
            iterations=iterations,
            iterations_to_success=self.iterations_to_success,
            stop_reason=stop_reason,
        )
        logger.info(
            f"{self.algorithm} on {self.objective.name} seed={self.config.seed}: "
            f"best_f={self.best_f:.6g} evaluations={self.evaluations} stop={stop_reason}"
        )
        return trace


def reflect_into_box(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Fold a point back into [lo, hi] by mirror reflection at the faces"""
    width = hi - lo
    y = np.mod(x - lo, 2.0 * width)
    y = np.where(y > width, 2.0 * width - y, y)
    return np.clip(lo + y, lo, hi)


def run_qbo(config: RunConfig) -> RunTrace:
    """
    Blind random search on the quantized objective

    Candidates are drawn uniformly from the box. A candidate replaces the
    incumbent when its quantized value is <= the incumbent's; every
    acceptance raises the schedule power by one and re-quantizes the
    incumbent's raw value at the new Q_p.

    Stops at the first of: budget exhausted, schedule saturation, or
    incumbent value <= success_tolerance.
    """
    state = _RunState(config, "qbo")
    params = config.qbo

    x_opt, f_opt = state.start()
    schedule = QuantizationSchedule.from_initial_value(f_opt, params.base, params.power_cap)
    qp = schedule.q_param
    fq_opt = quantize(f_opt, qp).quantized
    state.record(0, x_opt, f_opt, fq_opt, qp, True)
    logger.debug(f"qbo start: f0={f_opt:.6g} eta={schedule.eta} Q_p={qp}")

    t = 0
    if state.offer_best(0, x_opt, f_opt):
        return state.finish(t, STOP_SUCCESS)

    while state.budget_left:
        t += 1
        x = state.objective.sample_uniform(state.rng)
        f = state.evaluate(x)
        fq = quantize(f, qp).quantized
        accepted = fq <= fq_opt
        state.record(t, x, f, fq, qp, accepted)

        if not accepted:
            continue

        x_opt, f_opt = x, f
        schedule, saturated = schedule.advance()
        qp = schedule.q_param
        fq_opt = quantize(f_opt, qp).quantized
        logger.debug(f"qbo t={t}: accepted f={f:.6g}, power={schedule.power}")

        if state.offer_best(t, x_opt, f_opt):
            return state.finish(t, STOP_SUCCESS)
        if saturated:
            logger.warning(f"qbo schedule saturated at power {schedule.power} (t={t})")
            return state.finish(t, STOP_SATURATED)

    return state.finish(t, STOP_BUDGET)


def run_sa(config: RunConfig) -> RunTrace:
    """
    Simulated annealing with a reflected Gaussian proposal

    Uphill moves are accepted with probability exp(-delta / T_t) where
    T_t = T0 * alpha^t; T0 = 0 gives greedy descent. The trace's fq column
    repeats f and its qp column holds 1 / T_t.
    """
    state = _RunState(config, "sa")
    params = config.sa
    if not 0 < params.alpha <= 1:
        raise InvalidArgumentError(f"sa.alpha must lie in (0, 1], got {params.alpha}")
    if params.sigma_scale <= 0:
        raise InvalidArgumentError(f"sa.sigma_scale must be positive, got {params.sigma_scale}")

    obj = state.objective
    x, f = state.start()
    t0 = f + 1.0 if params.t0 is None else float(params.t0)
    if not (math.isfinite(t0) and t0 >= 0):
        raise InvalidArgumentError(f"sa.t0 must be >= 0, got {params.t0}")
    sigma = params.sigma_scale * obj.box_width

    state.record(0, x, f, f, _inverse(t0), True)
    t = 0
    if state.offer_best(0, x, f):
        return state.finish(t, STOP_SUCCESS)

    while state.budget_left:
        t += 1
        temperature = t0 * params.alpha ** t
        candidate = reflect_into_box(x + sigma * state.rng.standard_normal(obj.dim), obj.box_lo, obj.box_hi)
        fc = state.evaluate(candidate)
        delta = fc - f

        if delta <= 0:
            accepted = True
        elif temperature > 0:
            accepted = state.rng.random() < math.exp(-delta / temperature)
        else:
            accepted = False

        state.record(t, candidate, fc, fc, _inverse(temperature), accepted)
        if accepted:
            x, f = candidate, fc
            if state.offer_best(t, x, f):
                return state.finish(t, STOP_SUCCESS)

    return state.finish(t, STOP_BUDGET)


def replica_coupling(gamma: float, replicas: int, temperature: float) -> float:
    """
    Harmonic coupling between neighbouring Trotter slices

    J = -(T/2) log tanh(Gamma / (P T)), clamped to MAX_REPLICA_COUPLING.
    """
    if gamma <= 0:
        raise DegenerateScheduleError(
            f"Transverse field must stay positive (got {gamma}); zero field locks all replicas"
        )
    tanh_arg = math.tanh(gamma / (replicas * temperature))
    if tanh_arg <= 0:
        return MAX_REPLICA_COUPLING
    return min(-0.5 * temperature * math.log(tanh_arg), MAX_REPLICA_COUPLING)


def run_qa(config: RunConfig) -> RunTrace:
    """
    Simulated quantum annealing on continuous variables

    P replicas on a ring, each moved once per sweep with a reflected Gaussian
    proposal. The replica energy is f / P plus J(Gamma) times the squared
    distances to both neighbours; moves are accepted by Metropolis at slice
    temperature T. Gamma decays geometrically per sweep. One trace record per
    sweep holds the best replica; its qp column is 1 / Gamma.
    """
    params = config.qa
    if int(params.replicas) != params.replicas or params.replicas < 2:
        raise InvalidArgumentError(f"qa.replicas must be an integer >= 2, got {params.replicas!r}")
    if params.gamma0 <= 0:
        raise DegenerateScheduleError(
            f"qa.gamma0 must be positive, got {params.gamma0}; a zero field locks the replicas"
        )
    if not 0 < params.gamma_decay <= 1:
        raise InvalidArgumentError(f"qa.gamma_decay must lie in (0, 1], got {params.gamma_decay}")
    if params.temperature <= 0:
        raise InvalidArgumentError(f"qa.temperature must be positive, got {params.temperature}")
    if params.sigma_scale <= 0:
        raise InvalidArgumentError(f"qa.sigma_scale must be positive, got {params.sigma_scale}")

    state = _RunState(config, "qa")
    obj = state.objective
    n_rep = int(params.replicas)
    temperature = params.temperature
    sigma = params.sigma_scale * obj.box_width

    x0, f0 = state.start()
    positions = np.tile(x0, (n_rep, 1))
    values = np.full(n_rep, f0)

    state.record(0, x0, f0, f0, 1.0 / params.gamma0, True)
    sweep = 0
    if state.offer_best(0, x0, f0):
        return state.finish(sweep, STOP_SUCCESS)

    clamped = False
    while state.budget_left:
        sweep += 1
        gamma = params.gamma0 * params.gamma_decay ** (sweep - 1)
        if gamma > 0:
            coupling = replica_coupling(gamma, n_rep, temperature)
        else:
            coupling = MAX_REPLICA_COUPLING
        if coupling >= MAX_REPLICA_COUPLING and not clamped:
            logger.warning(f"qa replica coupling clamped at sweep {sweep} (Gamma={gamma:.3g})")
            clamped = True

        moves = 0
        for k in range(n_rep):
            if not state.budget_left:
                break
            proposal = reflect_into_box(
                positions[k] + sigma * state.rng.standard_normal(obj.dim), obj.box_lo, obj.box_hi
            )
            fp = state.evaluate(proposal)
            left = positions[(k - 1) % n_rep]
            right = positions[(k + 1) % n_rep]
            spring_old = np.sum((positions[k] - left) ** 2) + np.sum((positions[k] - right) ** 2)
            spring_new = np.sum((proposal - left) ** 2) + np.sum((proposal - right) ** 2)
            delta = (fp - values[k]) / n_rep + coupling * (spring_new - spring_old)

            if delta <= 0 or state.rng.random() < math.exp(-delta / temperature):
                positions[k] = proposal
                values[k] = fp
                moves += 1

        best_k = int(np.argmin(values))
        best_f = float(values[best_k])
        state.record(sweep, positions[best_k], best_f, best_f, _inverse(gamma), moves > 0)
        if state.offer_best(sweep, positions[best_k], best_f):
            return state.finish(sweep, STOP_SUCCESS)

    return state.finish(sweep, STOP_BUDGET)


def _inverse(value: float) -> float:
    return math.inf if value <= 0 else 1.0 / value


ALGORITHMS: Dict[str, Callable[[RunConfig], RunTrace]] = {
    "qbo": run_qbo,
    "sa": run_sa,
    "qa": run_qa,
}


def run(algorithm: str, config: RunConfig) -> RunTrace:
    """Dispatch a run by algorithm name"""
    if algorithm not in ALGORITHMS:
        raise NotFoundError(f"Unknown algorithm '{algorithm}'. Known: {', '.join(ALGORITHMS)}")
    return ALGORITHMS[algorithm](config)


def improvement_ratio(f_initial: float, f_best: float, f_opt: float = 0.0) -> float:
    """
    Percentage of the initial optimality gap closed by the best point

    100 * (f_initial - f_best) / (f_initial - f_opt), clamped to [0, 100];
    100 when the start is already optimal.
    """
    if not all(math.isfinite(v) for v in (f_initial, f_best, f_opt)):
        raise InvalidArgumentError("improvement_ratio needs finite values")
    if f_initial < f_opt:
        raise InvalidArgumentError(f"f_initial ({f_initial}) is below f_opt ({f_opt})")
    gap = f_initial - f_opt
    if gap == 0:
        return 100.0
    ratio = 100.0 * (f_initial - f_best) / gap
    return min(100.0, max(0.0, ratio))
