"""Gaussian pump/Stokes pulse pair and the derived mixing angle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .units import SimulationConfig

# Below this fraction of the peak both envelopes are treated as underflowed
ENVELOPE_FLOOR = 1e-30


@dataclass(frozen=True)
class PulsePair:
    """Equal-width, equal-amplitude Gaussians: pump centred at +delay, Stokes at -delay."""

    omega0: float
    pulse_width: float
    delay: float

    def __post_init__(self):
        if not self.pulse_width > 0:
            raise ValueError("pulse_width must be positive")
        if not self.omega0 >= 0:
            raise ValueError("omega0 must be nonnegative")

    @classmethod
    def from_config(cls, cfg: SimulationConfig) -> "PulsePair":
        return cls(cfg.omega0, cfg.pulse_width, cfg.delay)

    def ratio_exponent(self, t):
        """x(t) with Omega_P/Omega_S = exp(x) = exp(4 tau t / T^2)."""
        return 4.0 * self.delay * np.asarray(t, dtype=float) / self.pulse_width**2


def pump_envelope(t, p: PulsePair):
    return p.omega0 * np.exp(-(((np.asarray(t, dtype=float) - p.delay) / p.pulse_width) ** 2))


def stokes_envelope(t, p: PulsePair):
    return p.omega0 * np.exp(-(((np.asarray(t, dtype=float) + p.delay) / p.pulse_width) ** 2))


def mixing_angle(omega_p, omega_s):
    """Angle with tan(theta) = omega_p / omega_s, in [0, pi/2]."""
    return np.arctan2(omega_p, omega_s)


def analytic_mixing_angle(t, p: PulsePair):
    """theta(t) from the Gaussian ratio alone; finite even where both envelopes underflow.

    Uses theta = pi/4 + arctan(tanh(x/2)), which equals arctan(exp(x))
    without overflowing.
    """
    x = p.ratio_exponent(t)
    return np.pi / 4 + np.arctan(np.tanh(0.5 * x))


def mixing_angle_at(t, p: PulsePair):
    """theta(t) from the envelopes, with the analytic ratio where both fall below the floor."""
    op = pump_envelope(t, p)
    os_ = stokes_envelope(t, p)
    theta = mixing_angle(op, os_)
    floor = ENVELOPE_FLOOR * p.omega0
    tiny = (op <= floor) & (os_ <= floor)
    if np.any(tiny):
        theta = np.where(tiny, analytic_mixing_angle(t, p), theta)
    return theta[()] if np.ndim(theta) == 0 else theta


def mixing_angle_rate(t, p: PulsePair):
    """d(theta)/dt = (2 tau / T^2) / cosh(4 tau t / T^2)."""
    x = p.ratio_exponent(t)
    with np.errstate(over="ignore"):
        return (2.0 * p.delay / p.pulse_width**2) / np.cosh(x)


def effective_rabi(omega_p, omega_s):
    return np.hypot(omega_p, omega_s)


def effective_rabi_at(t, p: PulsePair):
    return effective_rabi(pump_envelope(t, p), stokes_envelope(t, p))


def cos_sin_2theta(t, p: PulsePair):
    """(cos 2theta, sin 2theta) evaluated analytically: (-tanh x, sech x)."""
    x = p.ratio_exponent(t)
    with np.errstate(over="ignore"):
        return -np.tanh(x), 1.0 / np.cosh(x)
