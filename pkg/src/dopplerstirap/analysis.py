"""Observables and adiabaticity diagnostics."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .hamiltonian import BasisTag
from .propagator import QuantumState, Trajectory, simulate_lz
from .pulses import (
    PulsePair,
    cos_sin_2theta,
    effective_rabi_at,
    mixing_angle_at,
    mixing_angle_rate,
)
from .units import SimulationConfig

# "a << b" is reported as satisfied when a / b stays at or below this
MUCH_LESS = 0.1
# worst-case margins are taken where Omega_eff exceeds this fraction of its peak
ACTIVE_FRACTION = 1e-2
POPULATION_TOL = 1e-6


class NoCrossing(ValueError):
    """The bright state never crosses the intermediate level."""


def populations(psi: QuantumState) -> tuple[float, float, float]:
    if psi.basis is not BasisTag.BARE:
        raise ValueError(f"populations need a bare-basis state, got {psi.basis.value}")
    p1, p2, p3 = (float(x) for x in psi.populations)
    return p1, p2, p3


def decompose_dark_bright(psi: QuantumState, theta: float) -> tuple[complex, complex, complex]:
    """Amplitudes on |D> = cos(theta)|1> - sin(theta)|3>, |2>, |B> = sin(theta)|1> + cos(theta)|3>."""
    if psi.basis is not BasisTag.BARE:
        raise ValueError("decompose_dark_bright expects a bare-basis state")
    a1, a2, a3 = psi.amplitudes
    c, s = math.cos(theta), math.sin(theta)
    return complex(c * a1 - s * a3), complex(a2), complex(s * a1 + c * a3)


def recompose_dark_bright(d: complex, a2: complex, b: complex, theta: float) -> QuantumState:
    c, s = math.cos(theta), math.sin(theta)
    return QuantumState([c * d + s * b, a2, -s * d + c * b], BasisTag.BARE)


def max_intermediate_population(traj: Trajectory) -> float:
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    if traj.basis is not BasisTag.BARE:
        raise ValueError("max_intermediate_population expects a bare-basis trajectory")
    return float(np.max(traj.populations[:, 1]))


def crossing_angle(q: float) -> float:
    """theta* with cos(2 theta*) = 1/(2q)."""
    if not q > 0.5:
        raise NoCrossing(f"no bright/intermediate crossing for q={q} (needs q > 1/2)")
    return 0.5 * math.acos(1.0 / (2.0 * q))


def crossing_times(cfg: SimulationConfig, grid_points: int = 1025) -> list[float]:
    """Times in the integration window where cos 2theta(t) = 1/(2q).

    Sign changes are bracketed on a uniform grid and refined with Brent's
    method on the analytic mixing angle.
    """
    crossing_angle(cfg.q)  # raises NoCrossing
    p = PulsePair.from_config(cfg)
    target = 1.0 / (2.0 * cfg.q)

    def f(t):
        return float(cos_sin_2theta(t, p)[0]) - target

    t0, t1 = cfg.span
    grid = np.linspace(t0, t1, grid_points)
    vals = -np.tanh(p.ratio_exponent(grid)) - target
    roots: list[float] = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0:
            roots.append(brentq(f, a, b, xtol=cfg.tolerances.root_tol, rtol=4 * np.finfo(float).eps))
    if vals[-1] == 0.0:
        roots.append(float(t1))
    return roots


def bright_block_eigenvalues(t, cfg: SimulationConfig) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues mu1 <= mu2 of the bright/intermediate block (|2>, |B>)."""
    p = PulsePair.from_config(cfg)
    c2, _ = cos_sin_2theta(t, p)
    a = -cfg.level2_shift
    d = -2.0 * cfg.q * c2
    half_rabi = 0.5 * effective_rabi_at(t, p)
    mean = 0.5 * (a + d)
    radius = np.hypot(0.5 * (a - d), half_rabi)
    return mean - radius, mean + radius


def _ratio(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
    return np.where(num == 0, 0.0, out)


@dataclass
class Condition:
    name: str
    worst: float  # largest ratio over the active window
    satisfied: bool


@dataclass
class DiagnosticsReport:
    """Adiabaticity and decoupling conditions sampled over the window.

    Ratios are "small over large"; a condition holds when its worst-case
    ratio over the active window is below ``MUCH_LESS``.
    """

    times: np.ndarray
    theta: np.ndarray
    omega_eff: np.ndarray
    adiabaticity_ratio: np.ndarray  # |dtheta/dt| / Omega_eff
    gap: np.ndarray  # delta
    mu1: np.ndarray
    mu2: np.ndarray
    decoupling_ratio: np.ndarray  # 2q sin 2theta / delta
    large_area_ratio: np.ndarray  # 2q sin 2theta / Omega_eff
    sufficient_ratio: np.ndarray  # max(1/T, 2q sin 2theta) / Omega_eff
    side_condition: np.ndarray  # min mu < 2q cos 2theta < max mu
    adiabatic_return_margin: float  # (E_r + detuning) T in units of hbar
    crossings: list[float] = field(default_factory=list)
    conditions: list[Condition] = field(default_factory=list)

    def condition(self, name: str) -> Condition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_csv(self, target=None, header: list[str] | None = None) -> str:
        cols = (
            "t",
            "theta",
            "omega_eff",
            "adiabaticity_ratio",
            "gap",
            "mu1",
            "mu2",
            "decoupling_ratio",
            "large_area_ratio",
            "sufficient_ratio",
            "side_condition",
        )
        table = np.column_stack(
            [
                self.times,
                self.theta,
                self.omega_eff,
                self.adiabaticity_ratio,
                self.gap,
                self.mu1,
                self.mu2,
                self.decoupling_ratio,
                self.large_area_ratio,
                self.sufficient_ratio,
                self.side_condition.astype(float),
            ]
        )
        buf = io.StringIO()
        for line in header or []:
            buf.write(f"# {line}\n")
        buf.write(",".join(cols) + "\n")
        for row in table:
            buf.write(",".join(f"{v:.9g}" for v in row) + "\n")
        buf.write("# summary\n")
        for c in self.conditions:
            buf.write(f"# {c.name},worst={c.worst:.9g},satisfied={int(c.satisfied)}\n")
        buf.write(f"# adiabatic_return_margin={self.adiabatic_return_margin:.9g}\n")
        buf.write("# crossings=" + ";".join(f"{t:.9g}" for t in self.crossings) + "\n")
        text = buf.getvalue()
        if target is not None:
            Path(target).write_text(text)
        return text


def adiabaticity_report(cfg: SimulationConfig, n_samples: int = 512) -> DiagnosticsReport:
    p = PulsePair.from_config(cfg)
    t0, t1 = cfg.span
    times = np.linspace(t0, t1, n_samples)
    theta = np.asarray(mixing_angle_at(times, p), dtype=float)
    omega = np.asarray(effective_rabi_at(times, p), dtype=float)
    rate = np.abs(mixing_angle_rate(times, p))
    c2, s2 = cos_sin_2theta(times, p)
    dark_energy = 2.0 * cfg.q * c2
    coupling = np.abs(2.0 * cfg.q * s2)

    mu1, mu2 = bright_block_eigenvalues(times, cfg)
    gap = np.minimum(np.abs(dark_energy - mu1), np.abs(dark_energy - mu2))
    side = (mu1 < dark_energy) & (dark_energy < mu2)

    adiabatic = _ratio(rate, omega)
    decoupling = _ratio(coupling, gap)
    large_area = _ratio(coupling, omega)
    sufficient = _ratio(np.maximum(1.0 / cfg.pulse_width, coupling), omega)

    peak = omega.max()
    active = omega >= ACTIVE_FRACTION * peak if peak > 0 else np.ones_like(omega, dtype=bool)

    def summarize(name, series):
        worst = float(np.max(series[active]))
        return Condition(name, worst, worst <= MUCH_LESS)

    margin = cfg.level2_shift * cfg.pulse_width
    conditions = [
        summarize("adiabaticity", adiabatic),
        summarize("decoupling", decoupling),
        summarize("large_area", large_area),
        summarize("sufficient", sufficient),
        Condition("side_condition", float(np.mean(~side[active])), bool(np.all(side[active]))),
        Condition(
            "adiabatic_return",
            1.0 / margin if margin > 0 else math.inf,
            margin > 0 and 1.0 / margin <= MUCH_LESS,
        ),
    ]
    try:
        crossings = crossing_times(cfg)
    except NoCrossing:
        crossings = []
    return DiagnosticsReport(
        times=times,
        theta=theta,
        omega_eff=omega,
        adiabaticity_ratio=adiabatic,
        gap=gap,
        mu1=mu1,
        mu2=mu2,
        decoupling_ratio=decoupling,
        large_area_ratio=large_area,
        sufficient_ratio=sufficient,
        side_condition=side,
        adiabatic_return_margin=margin,
        crossings=crossings,
        conditions=conditions,
    )


def lz_parameter(cfg: SimulationConfig) -> float:
    """Adiabaticity parameter Gamma = (Omega_eff/2)^2 / |sweep rate| at the first crossing."""
    roots = crossing_times(cfg)
    if not roots:
        raise NoCrossing("crossing lies outside the integration window")
    t_star = roots[0]
    p = PulsePair.from_config(cfg)
    _, s2 = cos_sin_2theta(t_star, p)
    # d/dt (E - 2q cos 2theta) = 4 q sin 2theta dtheta/dt
    sweep = abs(4.0 * cfg.q * float(s2) * float(mixing_angle_rate(t_star, p)))
    coupling = 0.5 * float(effective_rabi_at(t_star, p))
    if coupling == 0.0:
        return 0.0
    if sweep == 0.0:
        return math.inf
    return coupling**2 / sweep


def lz_transition_probability(cfg: SimulationConfig) -> float:
    """Adiabatic bright -> intermediate transfer estimate, 1 - exp(-2 pi Gamma)."""
    gamma = lz_parameter(cfg)
    return -math.expm1(-2.0 * math.pi * gamma)


def lz_final_population(cfg: SimulationConfig) -> float:
    """Final |2> population predicted by propagating the two-level model from |1>.

    Only the bright component of |1> at ``t_start`` enters the two-level
    problem, so the result is scaled by sin^2 theta(t_start).
    """
    final, _ = simulate_lz(cfg)
    theta0 = float(mixing_angle_at(cfg.span[0], PulsePair.from_config(cfg)))
    return math.sin(theta0) ** 2 * float(final.populations[1])


def momentum_kick(pops) -> float:
    """Mean momentum transfer in units of hbar k: 0, 1, 2 for |1>, |2>, |3>."""
    p1, p2, p3 = (float(x) for x in pops)
    if abs(p1 + p2 + p3 - 1.0) > POPULATION_TOL:
        raise ValueError(f"populations sum to {p1 + p2 + p3:.9g}, expected 1")
    return p2 + 2.0 * p3
