"""
Benchmark Harness - Multi-Seed Experiments and Result Files

This module handles:
- Loading experiment configuration from YAML with dotted-key overrides
- Running every (function x algorithm x seed) cell on a thread pool
- Per-cell summary rows (success rate and medians)
- Writing results.csv, summary.csv, JSONL traces and manifest.txt atomically
- Grid samples of an objective for plotting
"""

import concurrent.futures
import csv
import io
import itertools
import json
import logging
import math
import os
import re
import statistics
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from src.errors import InvalidArgumentError, NotFoundError, OutputError
from src.objectives import Objective, get_objective, list_objectives
from src.optimizers import ALGORITHMS, QAParams, QBOParams, RunConfig, RunTrace, SAParams, run
from src.quantizer import quantize

logger = logging.getLogger(__name__)

RESULTS_FILE = "results.csv"
SUMMARY_FILE = "summary.csv"
MANIFEST_FILE = "manifest.txt"

RESULT_COLUMNS = (
    "function", "algorithm", "seed", "iterations_to_success",
    "evaluations", "best_f", "improvement_ratio", "wall_ms",
)
SUMMARY_COLUMNS = (
    "function", "algorithm", "n_seeds", "successes", "success_rate",
    "median_iterations_to_success", "median_evaluations", "median_best_f",
    "median_improvement_ratio",
)

_SCALAR_KEYS = {
    "objectives", "algorithms", "dim", "seeds", "seed_base", "n_seeds",
    "max_evaluations", "success_tolerance", "output_dir", "trace", "timing", "jobs",
}
_PARAM_GROUPS = {"qbo": QBOParams, "sa": SAParams, "qa": QAParams}
_PREFIX_KEYS = ("dim.", "box.")

CellKey = Tuple[str, str, int]


def _fmt(value: Optional[float]) -> str:
    """6 significant digits; blank for missing values"""
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".6g")


def flatten_mapping(data: Mapping, prefix: str = "") -> Dict[str, Any]:
    """Flatten nested mappings to dotted keys"""
    flat: Dict[str, Any] = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(flatten_mapping(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def parse_override(item: str) -> Tuple[str, Any]:
    """Parse a KEY=VALUE override; the value is read as YAML"""
    if "=" not in item:
        raise InvalidArgumentError(f"Override must look like KEY=VALUE, got '{item}'")
    key, raw = item.split("=", 1)
    key = key.strip()
    if not key:
        raise InvalidArgumentError(f"Override has an empty key: '{item}'")
    try:
        return key, yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise InvalidArgumentError(f"Cannot parse value of override '{item}': {e}") from e


def _check_key(key: str) -> None:
    if key in _SCALAR_KEYS or key.startswith(_PREFIX_KEYS):
        return
    group, _, param = key.partition(".")
    if group in _PARAM_GROUPS and param in {f.name for f in fields(_PARAM_GROUPS[group])}:
        return
    raise InvalidArgumentError(f"Unknown configuration key '{key}'")


def _as_tuple(value: Any, key: str) -> Tuple:
    if value is None:
        return ()
    if isinstance(value, str):
        return tuple(v.strip() for v in value.split(",") if v.strip())
    if isinstance(value, Iterable):
        return tuple(value)
    raise InvalidArgumentError(f"'{key}' must be a list, got {value!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """
    A complete experiment: objectives x algorithms x seeds plus run settings

    dims and boxes hold per-objective overrides of dim and of the search box.
    """
    objectives: Tuple[str, ...]
    algorithms: Tuple[str, ...]
    seeds: Tuple[int, ...]
    dim: Optional[int] = None
    dims: Dict[str, int] = field(default_factory=dict)
    boxes: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    max_evaluations: int = 100_000
    success_tolerance: float = 1e-3
    output_dir: str = "results"
    trace: bool = False
    timing: bool = False
    jobs: int = 1
    qbo: QBOParams = field(default_factory=QBOParams)
    sa: SAParams = field(default_factory=SAParams)
    qa: QAParams = field(default_factory=QAParams)

    def __post_init__(self):
        if not self.objectives:
            raise InvalidArgumentError("Experiment needs at least one objective")
        if not self.algorithms:
            raise InvalidArgumentError("Experiment needs at least one algorithm")
        if not self.seeds:
            raise InvalidArgumentError("Experiment needs at least one seed")
        if not (math.isfinite(self.success_tolerance) and self.success_tolerance >= 0):
            raise InvalidArgumentError(f"success_tolerance must be >= 0, got {self.success_tolerance}")
        if int(self.max_evaluations) != self.max_evaluations or self.max_evaluations < 1:
            raise InvalidArgumentError(f"max_evaluations must be >= 1, got {self.max_evaluations}")
        if int(self.jobs) != self.jobs or self.jobs < 1:
            raise InvalidArgumentError(f"jobs must be >= 1, got {self.jobs}")

    @classmethod
    def from_mapping(cls, data: Mapping, overrides: Sequence[str] = ()) -> "ExperimentConfig":
        """
        Build a config from a (possibly nested) mapping and KEY=VALUE overrides

        Raises:
            InvalidArgumentError: unknown keys or malformed values
        """
        flat = flatten_mapping(data or {})
        for item in overrides:
            key, value = parse_override(item)
            flat[key] = value
        for key in flat:
            _check_key(key)

        try:
            if flat.get("seeds") is not None:
                seeds = tuple(int(s) for s in _as_tuple(flat["seeds"], "seeds"))
            elif flat.get("n_seeds") is not None:
                base = int(flat.get("seed_base", 0))
                seeds = tuple(range(base, base + int(flat["n_seeds"])))
            else:
                seeds = ()

            dims = {k[len("dim."):]: int(v) for k, v in flat.items() if k.startswith("dim.")}
            boxes = {}
            for key, value in flat.items():
                if key.startswith("box."):
                    lo, hi = value
                    boxes[key[len("box."):]] = (float(lo), float(hi))

            params = {}
            for group, param_cls in _PARAM_GROUPS.items():
                values = {k.split(".", 1)[1]: v for k, v in flat.items() if k.startswith(f"{group}.")}
                if group == "sa" and str(values.get("t0", "")).lower() == "auto":
                    values["t0"] = None
                params[group] = param_cls(**values)

            return cls(
                objectives=tuple(str(o) for o in _as_tuple(flat.get("objectives"), "objectives")),
                algorithms=tuple(str(a).lower() for a in _as_tuple(flat.get("algorithms"), "algorithms")),
                seeds=seeds,
                dim=None if flat.get("dim") is None else int(flat["dim"]),
                dims=dims,
                boxes=boxes,
                max_evaluations=int(flat.get("max_evaluations", 100_000)),
                success_tolerance=float(flat.get("success_tolerance", 1e-3)),
                output_dir=str(flat.get("output_dir", "results")),
                trace=bool(flat.get("trace", False)),
                timing=bool(flat.get("timing", False)),
                jobs=int(flat.get("jobs", 1)),
                **params,
            )
        except (TypeError, ValueError) as e:
            if isinstance(e, InvalidArgumentError):
                raise
            raise InvalidArgumentError(f"Malformed configuration value: {e}") from e

    @classmethod
    def from_file(cls, path: Union[str, Path], overrides: Sequence[str] = ()) -> "ExperimentConfig":
        """Load a YAML config file"""
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except FileNotFoundError as e:
            raise InvalidArgumentError(f"Config file not found: {path}") from e
        except yaml.YAMLError as e:
            raise InvalidArgumentError(f"Config file {path} is not valid YAML: {e}") from e
        if not isinstance(data, Mapping):
            raise InvalidArgumentError(f"Config file {path} must contain a mapping")
        logger.info(f"Loaded experiment config from {path}")
        return cls.from_mapping(data, overrides)

    def validate_names(self) -> None:
        """Raise NotFoundError for any unknown objective or algorithm"""
        known = list_objectives(include_validation=True)
        for name in self.objectives:
            if name not in known:
                raise NotFoundError(f"Unknown objective '{name}'. Known: {', '.join(known)}")
        for name in self.algorithms:
            if name not in ALGORITHMS:
                raise NotFoundError(f"Unknown algorithm '{name}'. Known: {', '.join(ALGORITHMS)}")

    def dim_for(self, objective: str) -> Optional[int]:
        return self.dims.get(objective, self.dim)

    def run_config(self, objective: Objective, seed: int) -> RunConfig:
        return RunConfig(
            objective=objective,
            seed=seed,
            max_evaluations=self.max_evaluations,
            success_tolerance=self.success_tolerance,
            qbo=self.qbo,
            sa=self.sa,
            qa=self.qa,
            keep_records=self.trace,
        )


@dataclass(frozen=True)
class ResultRow:
    """Outcome of one (function, algorithm, seed) cell"""
    function: str
    algorithm: str
    seed: int
    iterations_to_success: Optional[int]
    evaluations: int
    best_f: float
    improvement_ratio: float
    wall_ms: Optional[float] = None

    @property
    def sort_key(self) -> CellKey:
        return (self.function, self.algorithm, self.seed)

    def to_fields(self, timing: bool = False) -> List[str]:
        return [
            self.function,
            self.algorithm,
            str(self.seed),
            _fmt(self.iterations_to_success),
            _fmt(self.evaluations),
            _fmt(self.best_f),
            _fmt(self.improvement_ratio),
            _fmt(self.wall_ms) if timing else "",
        ]


@dataclass(frozen=True)
class SummaryRow:
    """Per-cell aggregate over seeds"""
    function: str
    algorithm: str
    n_seeds: int
    successes: int
    success_rate: float
    median_iterations_to_success: Optional[float]
    median_evaluations: float
    median_best_f: float
    median_improvement_ratio: float

    def to_fields(self) -> List[str]:
        return [
            self.function,
            self.algorithm,
            str(self.n_seeds),
            str(self.successes),
            _fmt(self.success_rate),
            _fmt(self.median_iterations_to_success),
            _fmt(self.median_evaluations),
            _fmt(self.median_best_f),
            _fmt(self.median_improvement_ratio),
        ]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: List[ResultRow]
    summary: List[SummaryRow]
    traces: Dict[CellKey, RunTrace] = field(default_factory=dict)


def row_from_trace(function: str, trace: RunTrace, wall_ms: Optional[float] = None) -> ResultRow:
    return ResultRow(
        function=function,
        algorithm=trace.algorithm,
        seed=trace.config.seed,
        iterations_to_success=trace.iterations_to_success,
        evaluations=trace.evaluations_used,
        best_f=trace.best_f_raw,
        improvement_ratio=trace.improvement_ratio,
        wall_ms=wall_ms,
    )


def summarize(rows: Sequence[ResultRow]) -> List[SummaryRow]:
    """
    One summary row per (function, algorithm), in sorted order

    The iteration median counts failures as +inf and is None when infinite.
    """
    ordered = sorted(rows, key=lambda r: r.sort_key)
    summary = []
    for (function, algorithm), group in itertools.groupby(ordered, key=lambda r: (r.function, r.algorithm)):
        cell = list(group)
        successes = sum(1 for r in cell if r.iterations_to_success is not None)
        iterations = [math.inf if r.iterations_to_success is None else r.iterations_to_success for r in cell]
        median_iterations = statistics.median(iterations)
        summary.append(SummaryRow(
            function=function,
            algorithm=algorithm,
            n_seeds=len(cell),
            successes=successes,
            success_rate=successes / len(cell),
            median_iterations_to_success=None if math.isinf(median_iterations) else median_iterations,
            median_evaluations=statistics.median(r.evaluations for r in cell),
            median_best_f=statistics.median(r.best_f for r in cell),
            median_improvement_ratio=statistics.median(r.improvement_ratio for r in cell),
        ))
    return summary


def _run_cell(config: ExperimentConfig, objective: Objective, algorithm: str, seed: int) -> Tuple[ResultRow, RunTrace]:
    start = time.perf_counter()
    trace = run(algorithm, config.run_config(objective, seed))
    wall_ms = (time.perf_counter() - start) * 1000.0
    return row_from_trace(objective.name, trace, wall_ms), trace


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """
    Execute every (function x algorithm x seed) cell

    Cells run on up to config.jobs threads; rows are sorted by
    (function, algorithm, seed) afterwards so completion order never shows.

    Raises:
        NotFoundError: unknown objective or algorithm, before any run starts
    """
    config.validate_names()
    objectives = {
        name: get_objective(name, dim=config.dim_for(name), box=config.boxes.get(name))
        for name in config.objectives
    }
    cells = sorted(set(itertools.product(config.objectives, config.algorithms, config.seeds)))
    logger.info(
        f"Running {len(cells)} cells ({len(config.objectives)} functions x "
        f"{len(config.algorithms)} algorithms x {len(config.seeds)} seeds) on {config.jobs} thread(s)"
    )

    rows: Dict[CellKey, ResultRow] = {}
    traces: Dict[CellKey, RunTrace] = {}
    with concurrent.futures.ThreadPoolExecutor(max_workers=config.jobs) as executor:
        futures = {
            executor.submit(_run_cell, config, objectives[function], algorithm, seed): (function, algorithm, seed)
            for function, algorithm, seed in cells
        }
        try:
            for future in concurrent.futures.as_completed(futures):
                key = futures[future]
                row, trace = future.result()
                rows[key] = row
                if config.trace:
                    traces[key] = trace
        except BaseException:
            for pending in futures:
                pending.cancel()
            raise

    detail = [rows[key] for key in cells]
    logger.info(f"Experiment finished: {len(detail)} result rows")
    return ExperimentResult(config=config, rows=detail, summary=summarize(detail), traces=traces)


# -- output ---------------------------------------------------------------

def trace_filename(function: str, algorithm: str, seed: int) -> str:
    return f"trace_{function}_{algorithm}_{seed}.jsonl"


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, list):
        return [_json_safe(v) for v in value]
    return value


def render_trace(trace: RunTrace) -> str:
    """One JSON object per record with keys t, x, f, fq, qp, accepted"""
    lines = []
    for record in trace.records:
        payload = {k: _json_safe(v) for k, v in record.to_dict().items()}
        lines.append(json.dumps(payload, allow_nan=False))
    return "".join(line + "\n" for line in lines)


def _render_csv(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def render_results_csv(rows: Sequence[ResultRow], timing: bool = False) -> str:
    return _render_csv(RESULT_COLUMNS, (r.to_fields(timing) for r in sorted(rows, key=lambda r: r.sort_key)))


def render_summary_csv(summary: Sequence[SummaryRow]) -> str:
    return _render_csv(SUMMARY_COLUMNS, (s.to_fields() for s in summary))


def _render_manifest(entries: List[Tuple[str, int]]) -> str:
    """Manifest listing every file including itself; its own size is found by iteration"""
    size = 0
    while True:
        listed = sorted(entries + [(MANIFEST_FILE, size)])
        text = "".join(f"{name} {nbytes}\n" for name, nbytes in listed)
        new_size = len(text.encode("utf-8"))
        if new_size == size:
            return text
        size = new_size


class _OutputTransaction:
    """
    Stages files under temp names, then swaps them in together

    Existing targets are moved to a backup name before being replaced. On
    failure rollback() removes what was installed and restores the backups,
    so the directory keeps either the previous outputs or the new ones.
    """

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.staged: List[Tuple[Path, Path]] = []
        self.backups: List[Tuple[Path, Path]] = []
        self.installed: List[Path] = []
        self.pending: Optional[Path] = None

    def stage(self, name: str, text: str) -> int:
        target = self.out_dir / name
        tmp = self.out_dir / f".{name}.tmp"
        data = text.encode("utf-8")
        self.staged.append((tmp, target))
        with open(tmp, "wb") as f:
            f.write(data)
        return len(data)

    def commit(self) -> None:
        for tmp, target in self.staged:
            self.pending = target
            if target.exists():
                backup = self.out_dir / f".{target.name}.bak"
                os.replace(target, backup)
                self.backups.append((backup, target))
            os.replace(tmp, target)
            self.installed.append(target)
        self.pending = None
        for backup, _ in self.backups:
            try:
                backup.unlink()
            except OSError as e:
                logger.warning(f"Could not remove backup {backup}: {e}")
        self.backups.clear()

    def rollback(self) -> None:
        for path in self.installed:
            try:
                path.unlink()
            except OSError as e:
                logger.warning(f"Could not remove partial output {path}: {e}")
        for backup, target in reversed(self.backups):
            try:
                os.replace(backup, target)
            except OSError as e:
                logger.warning(f"Could not restore {target} from {backup}: {e}")
        for tmp, _ in self.staged:
            if tmp.exists():
                tmp.unlink()
        self.installed.clear()
        self.backups.clear()


def _remove_stale_traces(out_dir: Path, keep: Iterable[str]) -> None:
    """Delete trace files from earlier runs that the new manifest does not list"""
    keep_names = set(keep)
    for path in sorted(out_dir.glob("trace_*.jsonl")):
        if path.name in keep_names:
            continue
        try:
            path.unlink()
            logger.debug(f"Removed stale trace {path}")
        except OSError as e:
            logger.warning(f"Could not remove stale trace {path}: {e}")


def write_outputs(
    rows: Sequence[ResultRow],
    traces: Optional[Mapping[CellKey, RunTrace]],
    out_dir: Union[str, Path],
    summary: Optional[Sequence[SummaryRow]] = None,
    timing: bool = False
) -> List[Tuple[str, int]]:
    """
    Write results.csv, summary.csv, one trace file per cell and manifest.txt

    All files are staged first and swapped in only once every one of them
    was written; trace files left over from an earlier run are then removed.

    Args:
        rows: Detail rows
        traces: Traces keyed by (function, algorithm, seed); None or empty to skip
        out_dir: Output directory, created if missing
        summary: Summary rows (computed from rows when omitted)
        timing: Render wall_ms instead of leaving it blank

    Returns:
        Manifest entries (file name, size in bytes), manifest included

    Raises:
        OutputError: if anything cannot be written; earlier outputs in out_dir are left intact
    """
    out_dir = Path(out_dir)
    if summary is None:
        summary = summarize(rows)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        logger.error(f"Cannot create output directory {out_dir}: {e}")
        raise OutputError(out_dir, str(e)) from e

    transaction = _OutputTransaction(out_dir)
    entries: List[Tuple[str, int]] = []
    current = out_dir
    try:
        current = out_dir / RESULTS_FILE
        entries.append((RESULTS_FILE, transaction.stage(RESULTS_FILE, render_results_csv(rows, timing))))
        current = out_dir / SUMMARY_FILE
        entries.append((SUMMARY_FILE, transaction.stage(SUMMARY_FILE, render_summary_csv(summary))))
        for (function, algorithm, seed) in sorted(traces or {}):
            name = trace_filename(function, algorithm, seed)
            current = out_dir / name
            entries.append((name, transaction.stage(name, render_trace(traces[(function, algorithm, seed)]))))
        current = out_dir / MANIFEST_FILE
        manifest = _render_manifest(entries)
        transaction.stage(MANIFEST_FILE, manifest)
        transaction.commit()
    except OSError as e:
        failed = transaction.pending or current
        logger.error(f"Writing outputs failed at {failed}: {e}")
        transaction.rollback()
        raise OutputError(failed, str(e)) from e

    entries.append((MANIFEST_FILE, len(manifest.encode("utf-8"))))
    _remove_stale_traces(out_dir, (name for name, _ in entries))
    logger.info(f"Wrote {len(entries)} files to {out_dir}")
    return sorted(entries)


def write_experiment(result: ExperimentResult, out_dir: Optional[Union[str, Path]] = None) -> List[Tuple[str, int]]:
    return write_outputs(
        result.rows,
        result.traces,
        out_dir if out_dir is not None else result.config.output_dir,
        summary=result.summary,
        timing=result.config.timing,
    )


def read_results_csv(path: Union[str, Path]) -> List[ResultRow]:
    """Parse a results.csv written by write_outputs"""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
            raise InvalidArgumentError(f"{path} does not have the results.csv header")
        for record in reader:
            rows.append(ResultRow(
                function=record["function"],
                algorithm=record["algorithm"],
                seed=int(record["seed"]),
                iterations_to_success=int(record["iterations_to_success"]) if record["iterations_to_success"] else None,
                evaluations=int(record["evaluations"]),
                best_f=float(record["best_f"]),
                improvement_ratio=float(record["improvement_ratio"]),
                wall_ms=float(record["wall_ms"]) if record["wall_ms"] else None,
            ))
    return rows


def replay_trace_file(path: Union[str, Path]) -> List[int]:
    """
    Re-quantize every record of a quantized-search trace from its f and qp

    Returns:
        Iteration indices whose recorded fq differs (empty when the trace replays)
    """
    mismatches = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            record = json.loads(line)
            if record["qp"] is None or record["f"] is None:
                mismatches.append(record["t"])
                continue
            if quantize(record["f"], record["qp"]).quantized != record["fq"]:
                mismatches.append(record["t"])
    return mismatches


# -- grid sampling --------------------------------------------------------

_PLANE_TERM = re.compile(r"^\s*(x|y|x(\d+))\s*=\s*(\S+)\s*$")


def parse_plane(plane: str, dim: int) -> Dict[int, float]:
    """
    Parse an axis-fixing string such as "y=0" or "x0=1.5,x2=0"

    x and y name coordinates 0 and 1; xN names coordinate N (0-based).
    """
    fixed: Dict[int, float] = {}
    for term in plane.split(","):
        match = _PLANE_TERM.match(term)
        if not match:
            raise InvalidArgumentError(f"Cannot parse slice term '{term}'")
        name, index, value = match.groups()
        axis = int(index) if index is not None else {"x": 0, "y": 1}[name]
        if axis >= dim:
            raise InvalidArgumentError(f"Slice fixes coordinate {axis} but the objective has d={dim}")
        try:
            fixed[axis] = float(value)
        except ValueError as e:
            raise InvalidArgumentError(f"Slice value '{value}' is not a number") from e
    return fixed


def _axis_name(axis: int) -> str:
    return {0: "x", 1: "y"}.get(axis, f"x{axis}")


@dataclass(frozen=True)
class GridSample:
    """Row-major samples: columns are the free coordinates followed by f"""
    columns: Tuple[str, ...]
    values: np.ndarray

    def __len__(self) -> int:
        return self.values.shape[0]


def grid_sample(
    objective: Union[str, Objective],
    resolution: int,
    plane: Optional[str] = None
) -> GridSample:
    """
    Sample an objective on an evenly spaced grid over its box

    Without a plane the objective must be 2-D and rows run over x (outer)
    then y (inner). A plane fixes all but one coordinate for a 1-D slice.
    """
    if int(resolution) != resolution or resolution < 2:
        raise InvalidArgumentError(f"resolution must be an integer >= 2, got {resolution!r}")
    if isinstance(objective, str):
        objective = get_objective(objective)
    resolution = int(resolution)

    if plane is None:
        if objective.dim != 2:
            raise InvalidArgumentError(f"Full grids need d=2; {objective.name} has d={objective.dim}")
        xs = np.linspace(objective.box_lo[0], objective.box_hi[0], resolution)
        ys = np.linspace(objective.box_lo[1], objective.box_hi[1], resolution)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        points = np.stack([gx.ravel(), gy.ravel()], axis=-1)
        values = np.column_stack([points, objective.evaluate(points)])
        return GridSample(columns=("x", "y", "f"), values=values)

    fixed = parse_plane(plane, objective.dim)
    free = [axis for axis in range(objective.dim) if axis not in fixed]
    if len(free) != 1:
        raise InvalidArgumentError(
            f"A slice must leave exactly one free coordinate; {plane!r} leaves {len(free)}"
        )
    axis = free[0]
    line = np.linspace(objective.box_lo[axis], objective.box_hi[axis], resolution)
    points = np.empty((resolution, objective.dim))
    for fixed_axis, value in fixed.items():
        points[:, fixed_axis] = value
    points[:, axis] = line
    values = np.column_stack([line, objective.evaluate(points)])
    return GridSample(columns=(_axis_name(axis), "f"), values=values)


def render_grid_csv(grid: GridSample) -> str:
    return _render_csv(grid.columns, ([_fmt(v) for v in row] for row in grid.values))


def write_grid_csv(grid: GridSample, path: Union[str, Path]) -> Path:
    """Write a grid sample as CSV (6 significant digits)"""
    path = Path(path)
    text = render_grid_csv(grid)
    transaction = _OutputTransaction(path.parent)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        transaction.stage(path.name, text)
        transaction.commit()
    except OSError as e:
        transaction.rollback()
        logger.error(f"Cannot write grid to {path}: {e}")
        raise OutputError(path, str(e)) from e
    logger.info(f"Wrote {len(grid)} grid rows to {path}")
    return path
