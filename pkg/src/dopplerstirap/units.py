"""Dimensionless units and the validated run configuration.

Units: hbar = 1, energies in the recoil frequency w_r = hbar k^2 / 2M,
time in 1/w_r, atomic momentum in hbar k.  With these choices the
gauge-transformed Hamiltonian has diagonal (2q, -(1 + detuning), -2q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

# Gaussian tails are cut where exp(-x^2) <= exp(-16)
WINDOW_WIDTHS = 4.0

CONFIG_KEYS = (
    "q",
    "omega0",
    "pulse_width",
    "delay",
    "detuning",
    "t_start",
    "t_end",
    "rtol",
    "norm_tol",
)


class ConfigError(ValueError):
    """Raised when a configuration violates one of its invariants."""


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by the integrator, checks and root finder.

    ``atol`` is always one tenth of ``rtol``; it is not an independent key
    in the config file.
    """

    rtol: float = 1e-11
    norm_tol: float = 1e-9
    root_tol: float = 1e-12

    @property
    def atol(self) -> float:
        return 0.1 * self.rtol


@dataclass(frozen=True)
class SimulationConfig:
    """Parameters of a single run, all dimensionless.

    ``delay`` > 0 means the Stokes pulse comes first (counterintuitive
    order).  ``t_span`` of ``None`` selects the default window
    ``[-(|delay| + 4 T), +(|delay| + 4 T)]``.
    """

    q: float
    omega0: float
    pulse_width: float
    delay: float
    detuning: float = 0.0
    t_span: tuple[float, float] | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)

    @property
    def span(self) -> tuple[float, float]:
        if self.t_span is not None:
            return (float(self.t_span[0]), float(self.t_span[1]))
        half = abs(self.delay) + WINDOW_WIDTHS * self.pulse_width
        return (-half, half)

    @property
    def area(self) -> float:
        return self.omega0 * self.pulse_width

    @property
    def level2_shift(self) -> float:
        """Recoil energy plus single-photon detuning (units of w_r)."""
        return 1.0 + self.detuning

    def updated(self, **changes) -> "SimulationConfig":
        return validate(replace(self, **changes))

    def as_items(self) -> list[tuple[str, float]]:
        """Resolved flat key/value pairs in config-file order."""
        t0, t1 = self.span
        return [
            ("q", self.q),
            ("omega0", self.omega0),
            ("pulse_width", self.pulse_width),
            ("delay", self.delay),
            ("detuning", self.detuning),
            ("t_start", t0),
            ("t_end", t1),
            ("rtol", self.tolerances.rtol),
            ("norm_tol", self.tolerances.norm_tol),
        ]


def _finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value!r}")


def validate(config: SimulationConfig) -> SimulationConfig:
    """Return ``config`` unchanged if all invariants hold, else raise ConfigError."""
    for f in ("q", "omega0", "pulse_width", "delay", "detuning"):
        _finite(f, getattr(config, f))
    if not config.pulse_width > 0:
        raise ConfigError("pulse_width must be positive")
    if not config.omega0 >= 0:
        raise ConfigError("omega0 must be nonnegative")
    if config.t_span is not None:
        if len(config.t_span) != 2:
            raise ConfigError("t_span must be a pair (t_start, t_end)")
        t0, t1 = config.t_span
        _finite("t_start", t0)
        _finite("t_end", t1)
        if not t0 < t1:
            raise ConfigError(f"t_start < t_end required, got t_start={t0}, t_end={t1}")
    tol = config.tolerances
    if not (tol.rtol > 0 and tol.norm_tol > 0 and tol.root_tol > 0):
        raise ConfigError("tolerances must be positive")
    return config


def momentum_from_geometry(
    speed: float, angle: float, wavenumber: float, mass: float, hbar: float
) -> float:
    """Momentum projection onto the laser axis in units of hbar k.

    ``angle`` is the crossing angle between the atomic velocity and the
    laser wave vector; q vanishes for a perpendicular crossing.
    """
    if wavenumber <= 0:
        raise ValueError("wavenumber must be positive")
    if mass <= 0:
        raise ValueError("mass must be positive")
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    return mass * speed * math.cos(angle) / (hbar * wavenumber)


def parse_config_text(text: str) -> dict[str, float]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = float(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} is not a number: {value!r}") from None
    return values


def config_from_mapping(values: dict[str, float]) -> SimulationConfig:
    """Build and validate a config from flat key/value pairs."""
    unknown = set(values) - set(CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown key {sorted(unknown)[0]!r}")
    missing = [k for k in ("q", "omega0", "pulse_width", "delay") if k not in values]
    if missing:
        raise ConfigError(f"missing required key {missing[0]!r}")
    has_start, has_end = "t_start" in values, "t_end" in values
    if has_start != has_end:
        raise ConfigError("t_start and t_end must be given together")
    t_span = (values["t_start"], values["t_end"]) if has_start else None
    defaults = Tolerances()
    tol = Tolerances(
        rtol=values.get("rtol", defaults.rtol),
        norm_tol=values.get("norm_tol", defaults.norm_tol),
    )
    cfg = SimulationConfig(
        q=values["q"],
        omega0=values["omega0"],
        pulse_width=values["pulse_width"],
        delay=values["delay"],
        detuning=values.get("detuning", 0.0),
        t_span=t_span,
        tolerances=tol,
    )
    return validate(cfg)


def load_config(path: str | Path, overrides: dict[str, float] | None = None) -> SimulationConfig:
    """Read a config file, apply ``overrides`` on top, and validate."""
    values = parse_config_text(Path(path).read_text())
    if overrides:
        values.update(overrides)
    return config_from_mapping(values)


def format_config(config: SimulationConfig) -> str:
    """Serialize to the flat config-file format (round-trips via load_config)."""
    return "".join(f"{k} = {v!r}\n" for k, v in config.as_items())


__all__ = [
    "CONFIG_KEYS",
    "ConfigError",
    "SimulationConfig",
    "Tolerances",
    "config_from_mapping",
    "format_config",
    "load_config",
    "momentum_from_geometry",
    "parse_config_text",
    "validate",
]

