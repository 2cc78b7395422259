"""One-dimensional parameter scans over delay, pulse area and momentum."""

from __future__ import annotations

import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .analysis import max_intermediate_population, momentum_kick, populations
from .hamiltonian import MODELS
from .propagator import IntegrationError, simulate
from .units import SimulationConfig, format_config, validate

log = logging.getLogger(__name__)

PARAMETERS = ("delay", "area", "momentum")
SWEEP_COLUMNS = ("param", "P1", "P2", "P3", "maxP2", "kick")
POPULATION_SUM_TOL = 1e-6


class SweepError(RuntimeError):
    """A grid point failed; carries the offending parameter value."""

    def __init__(self, parameter: str, value: float, cause: Exception):
        super().__init__(f"sweep over {parameter} failed at {parameter}={value:.9g}: {cause}")
        self.parameter = parameter
        self.value = value


def default_grid(parameter: str, base: SimulationConfig) -> np.ndarray:
    if parameter == "delay":
        return np.linspace(-2.0, 2.0, 81) * base.pulse_width
    if parameter == "area":
        return np.linspace(0.0, 200.0, 51)
    if parameter == "momentum":
        return np.geomspace(0.1, 10.0, 41)
    raise ValueError(f"unknown sweep parameter {parameter!r}; choose from {PARAMETERS}")


@dataclass(frozen=True)
class SweepSpec:
    base: SimulationConfig
    parameter: str
    grid: tuple[float, ...]
    model: str = "bare"

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}; choose from {PARAMETERS}")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        grid = tuple(float(v) for v in np.atleast_1d(self.grid))
        if not grid:
            raise ValueError("sweep grid is empty")
        steps = np.diff(grid)
        if steps.size and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError("sweep grid must be strictly monotone")
        object.__setattr__(self, "grid", grid)
        validate(self.base)

    @classmethod
    def default(cls, base: SimulationConfig, parameter: str, model: str = "bare") -> "SweepSpec":
        return cls(base, parameter, tuple(default_grid(parameter, base)), model)

    def config_at(self, value: float) -> SimulationConfig:
        if self.parameter == "delay":
            return validate(replace(self.base, delay=value))
        if self.parameter == "area":
            return validate(replace(self.base, omega0=value / self.base.pulse_width))
        return validate(replace(self.base, q=value))


@dataclass(frozen=True)
class SweepRow:
    param: float
    P1: float
    P2: float
    P3: float
    maxP2: float
    kick: float

    def values(self) -> tuple[float, ...]:
        return (self.param, self.P1, self.P2, self.P3, self.maxP2, self.kick)


def evaluate_point(cfg: SimulationConfig, param: float, model: str = "bare") -> SweepRow:
    """Single propagation from |1> reduced to one table row."""
    final, traj = simulate(cfg, model=model)
    p1, p2, p3 = populations(final)
    return SweepRow(param, p1, p2, p3, max_intermediate_population(traj), momentum_kick((p1, p2, p3)))


def _task(args) -> SweepRow:
    cfg, value, parameter, model = args
    try:
        return evaluate_point(cfg, value, model)
    except (IntegrationError, ValueError) as exc:
        raise SweepError(parameter, value, exc) from exc


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple[SweepRow, ...]
    notes: tuple[str, ...] = ()

    def column(self, name: str) -> np.ndarray:
        idx = SWEEP_COLUMNS.index(name)
        return np.array([r.values()[idx] for r in self.rows])

    @property
    def params(self) -> np.ndarray:
        return self.column("param")

    def level_crossing(self, column: str = "P2", level: float = 0.5) -> float | None:
        """First parameter value where ``column`` crosses ``level`` (linear interpolation)."""
        x, y = self.params, self.column(column) - level
        for i in range(len(x) - 1):
            if y[i] == 0.0:
                return float(x[i])
            if y[i] * y[i + 1] < 0:
                return float(x[i] - y[i] * (x[i + 1] - x[i]) / (y[i + 1] - y[i]))
        if len(y) and y[-1] == 0.0:
            return float(x[-1])
        return None

    def provenance(self) -> list[str]:
        lines = [f"sweep = {self.spec.parameter}", f"model = {self.spec.model}"]
        base = format_config(self.spec.base).splitlines()
        if self.spec.base.t_span is None:
            # window follows each row's delay
            base = [line for line in base if not line.startswith(("t_start", "t_end"))]
            lines.append("window = default per row")
        lines += base
        lines.append("grid = " + ",".join(f"{v:.9g}" for v in self.spec.grid))
        lines += list(self.notes)
        return lines

    def to_csv(self, target=None, header: list[str] | None = None) -> str:
        buf = io.StringIO()
        for line in (header or []) + self.provenance():
            buf.write(f"# {line}\n")
        buf.write(",".join(SWEEP_COLUMNS) + "\n")
        for row in self.rows:
            buf.write(",".join(f"{v:.9g}" for v in row.values()) + "\n")
        text = buf.getvalue()
        if target is not None:
            Path(target).write_text(text)
        return text


def run_sweep(spec: SweepSpec, workers: int = 1, notes: tuple[str, ...] = ()) -> SweepResult:
    """Evaluate every grid point; rows come back in grid order regardless of ``workers``."""
    tasks = [(spec.config_at(v), v, spec.parameter, spec.model) for v in spec.grid]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_task, tasks))
    else:
        rows = [_task(t) for t in tasks]
    for row in rows:
        total = row.P1 + row.P2 + row.P3
        if abs(total - 1.0) > POPULATION_SUM_TOL:
            raise SweepError(spec.parameter, row.param, ValueError(f"populations sum to {total}"))
    log.info("sweep over %s: %d points", spec.parameter, len(rows))
    return SweepResult(spec, tuple(rows), notes)


def _check(spec: SweepSpec, parameter: str) -> None:
    if spec.parameter != parameter:
        raise ValueError(f"expected a {parameter} sweep, got {spec.parameter}")


def sweep_delay(spec: SweepSpec, workers: int = 1) -> SweepResult:
    _check(spec, "delay")
    return run_sweep(spec, workers)


def sweep_area(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Scan Omega0*T at fixed delay; Omega0 = area / T."""
    _check(spec, "area")
    notes = ()
    if spec.base.delay < 0:
        notes = ("delay < 0: intuitive order (pump first)",)
    return run_sweep(spec, workers, notes)


def sweep_momentum(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Scan q at fixed pulses; records where final P2 first crosses 1/2."""
    _check(spec, "momentum")
    result = run_sweep(spec, workers)
    midpoint = result.level_crossing("P2", 0.5)
    note = f"P2 midpoint q = {midpoint:.9g}" if midpoint is not None else "P2 midpoint q = none"
    return replace(result, notes=result.notes + (note,))
