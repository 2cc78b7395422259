"""Hamiltonians of the gauge-transformed lambda system in three representations.

All builders accept a scalar time or an array of times and return
matrices of shape ``(3, 3)`` / ``(2, 2)`` or ``(n, 3, 3)`` / ``(n, 2, 2)``.
Basis orders are fixed by :class:`BasisTag`.
"""

from __future__ import annotations

import enum
import math
from typing import Callable

import numpy as np

from .pulses import (
    ENVELOPE_FLOOR,
    PulsePair,
    effective_rabi,
    mixing_angle_at,
    mixing_angle_rate,
    pump_envelope,
    stokes_envelope,
)
from .units import SimulationConfig


class BasisTag(enum.Enum):
    BARE = "bare"  # |1>, |2>, |3>
    DARK_BRIGHT = "dark_bright"  # |D>, |2>, |B>
    LZ = "lz"  # |B>, |2>

    @property
    def labels(self) -> tuple[str, ...]:
        return {
            BasisTag.BARE: ("1", "2", "3"),
            BasisTag.DARK_BRIGHT: ("D", "2", "B"),
            BasisTag.LZ: ("B", "2"),
        }[self]


HamiltonianSource = Callable[[float], np.ndarray]


def _empty(t, dim: int) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(t, dtype=float)
    return t, np.zeros(t.shape + (dim, dim), dtype=complex)


def transformation(theta) -> np.ndarray:
    """Orthogonal map from bare to dark/bright amplitudes (rows <D|, <2|, <B|)."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    u = np.zeros(theta.shape + (3, 3))
    u[..., 0, 0] = c
    u[..., 0, 2] = -s
    u[..., 1, 1] = 1.0
    u[..., 2, 0] = s
    u[..., 2, 2] = c
    return u


def transformation_derivative(theta) -> np.ndarray:
    """dU/dtheta."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    du = np.zeros(theta.shape + (3, 3))
    du[..., 0, 0] = -s
    du[..., 0, 2] = -c
    du[..., 2, 0] = c
    du[..., 2, 2] = -s
    return du


def bare_hamiltonian(t, cfg: SimulationConfig) -> np.ndarray:
    """Gauge-frame Hamiltonian: diag(2q, -(1+detuning), -2q), pump on 1-2, Stokes on 3-2."""
    p = PulsePair.from_config(cfg)
    t, h = _empty(t, 3)
    h[..., 0, 0] = 2.0 * cfg.q
    h[..., 1, 1] = -cfg.level2_shift
    h[..., 2, 2] = -2.0 * cfg.q
    half_p = 0.5 * pump_envelope(t, p)
    half_s = 0.5 * stokes_envelope(t, p)
    h[..., 0, 1] = h[..., 1, 0] = half_p
    h[..., 2, 1] = h[..., 1, 2] = half_s
    return h


def rotating_frame_term(t, cfg: SimulationConfig) -> np.ndarray:
    """i (dU/dt) U^T, the extra term picked up by a time-dependent basis change."""
    p = PulsePair.from_config(cfg)
    theta = mixing_angle_at(t, p)
    rate = np.asarray(mixing_angle_rate(t, p))
    udot = transformation_derivative(theta) * rate[..., None, None]
    term = 1j * udot @ np.swapaxes(transformation(theta), -1, -2)
    # exact result is Hermitian; symmetrise away rounding on the diagonal
    return 0.5 * (term + np.swapaxes(term.conj(), -1, -2))


def darkbright_hamiltonian(
    t, cfg: SimulationConfig, include_nonadiabatic: bool = False
) -> np.ndarray:
    """Hamiltonian in the (|D>, |2>, |B>) basis.

    Without the flag this is the instantaneous block form; with it the
    rotating-frame term is added so that propagation in this basis is
    exactly equivalent to the bare frame.
    """
    p = PulsePair.from_config(cfg)
    t, h = _empty(t, 3)
    op, os_ = pump_envelope(t, p), stokes_envelope(t, p)
    theta = mixing_angle_at(t, p)
    doppler = 2.0 * cfg.q
    c2, s2 = np.cos(2 * theta), np.sin(2 * theta)
    h[..., 0, 0] = doppler * c2
    h[..., 0, 2] = h[..., 2, 0] = doppler * s2
    h[..., 1, 1] = -cfg.level2_shift
    h[..., 2, 2] = -doppler * c2
    h[..., 2, 1] = h[..., 1, 2] = 0.5 * effective_rabi(op, os_)
    if include_nonadiabatic:
        h = h + rotating_frame_term(t, cfg)
    return h


def decoupled_hamiltonian(t, cfg: SimulationConfig) -> np.ndarray:
    """Dark/bright block form with the dark-bright coupling dropped.

    The dark state only acquires a phase; the bright/intermediate block is
    the Landau-Zener problem.  This is a reduced model, not the exact one.
    """
    h = darkbright_hamiltonian(t, cfg)
    h[..., 0, 2] = h[..., 2, 0] = 0.0
    return h


def lz_hamiltonian(t, cfg: SimulationConfig) -> np.ndarray:
    """Two-level Hamiltonian in the (|B>, |2>) basis, shifted so |2> sits at zero."""
    p = PulsePair.from_config(cfg)
    t, h = _empty(t, 2)
    theta = mixing_angle_at(t, p)
    h[..., 0, 0] = cfg.level2_shift - 2.0 * cfg.q * np.cos(2 * theta)
    h[..., 0, 1] = h[..., 1, 0] = 0.5 * effective_rabi(pump_envelope(t, p), stokes_envelope(t, p))
    return h


MODELS = {
    "bare": (BasisTag.BARE, bare_hamiltonian),
    "darkbright": (
        BasisTag.DARK_BRIGHT,
        lambda t, cfg: darkbright_hamiltonian(t, cfg, include_nonadiabatic=True),
    ),
    "decoupled": (BasisTag.DARK_BRIGHT, decoupled_hamiltonian),
}


def _fast_bare(cfg: SimulationConfig) -> HamiltonianSource:
    # scalar calls dominate ODE right-hand sides; skip the array machinery there
    base = bare_hamiltonian(0.0, cfg)
    base[0, 1] = base[1, 0] = base[1, 2] = base[2, 1] = 0.0
    half, width, tau = 0.5 * cfg.omega0, cfg.pulse_width, cfg.delay

    def source(t):
        if np.ndim(t):
            return bare_hamiltonian(t, cfg)
        h = base.copy()
        h[0, 1] = h[1, 0] = half * math.exp(-(((t - tau) / width) ** 2))
        h[1, 2] = h[2, 1] = half * math.exp(-(((t + tau) / width) ** 2))
        return h

    e1, e2, e3 = base[0, 0].real, base[1, 1].real, base[2, 2].real

    def real_rhs(t, y):
        # y = (Re psi, Im psi); H is real symmetric so d(Re)/dt = H Im, d(Im)/dt = -H Re
        p = half * math.exp(-(((t - tau) / width) ** 2))
        s = half * math.exp(-(((t + tau) / width) ** 2))
        a1, a2, a3, b1, b2, b3 = y
        return [
            e1 * b1 + p * b2,
            p * b1 + e2 * b2 + s * b3,
            s * b2 + e3 * b3,
            -(e1 * a1 + p * a2),
            -(p * a1 + e2 * a2 + s * a3),
            -(s * a2 + e3 * a3),
        ]

    source.real_rhs = real_rhs
    return source


def _fast_rotated(cfg: SimulationConfig, model: str) -> HamiltonianSource:
    # scalar twin of darkbright_hamiltonian / decoupled_hamiltonian
    _, builder = MODELS[model]
    width, tau, om = cfg.pulse_width, cfg.delay, cfg.omega0
    doppler, e2 = 2.0 * cfg.q, -cfg.level2_shift
    floor = ENVELOPE_FLOOR * om
    with_coupling = model == "darkbright"
    slope = 2.0 * tau / width**2

    def source(t):
        if np.ndim(t):
            return builder(t, cfg)
        op = om * math.exp(-(((t - tau) / width) ** 2))
        os_ = om * math.exp(-(((t + tau) / width) ** 2))
        x = 2.0 * slope * t
        if op <= floor and os_ <= floor:
            theta = math.pi / 4 + math.atan(math.tanh(0.5 * x))
        else:
            theta = math.atan2(op, os_)
        c2, s2 = math.cos(2 * theta), math.sin(2 * theta)
        h = np.zeros((3, 3), dtype=complex)
        h[0, 0] = doppler * c2
        h[1, 1] = e2
        h[2, 2] = -doppler * c2
        h[1, 2] = h[2, 1] = 0.5 * math.hypot(op, os_)
        if with_coupling:
            rate = slope / math.cosh(x) if abs(x) < 700 else 0.0
            h[0, 2] = doppler * s2 - 1j * rate
            h[2, 0] = doppler * s2 + 1j * rate
        return h

    return source


def hamiltonian_source(cfg: SimulationConfig, model: str = "bare") -> HamiltonianSource:
    """Bind a config to one of the three-level builders in :data:`MODELS`."""
    try:
        _, builder = MODELS[model]
    except KeyError:
        raise ValueError(f"unknown model {model!r}; choose from {sorted(MODELS)}") from None
    if model == "bare":
        return _fast_bare(cfg)
    return _fast_rotated(cfg, model)
