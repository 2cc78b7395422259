"""Time-dependent Schroedinger propagation, i dpsi/dt = H(t) psi.

``propagate`` is the production path (adaptive 8th-order Dormand-Prince
with local error control).  ``propagate_oracle`` is an independent
check: a product of exact matrix exponentials of H at substep midpoints.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import ode

from .hamiltonian import (
    MODELS,
    BasisTag,
    HamiltonianSource,
    hamiltonian_source,
    lz_hamiltonian,
    transformation,
)
from .pulses import PulsePair, effective_rabi_at, mixing_angle_at
from .units import SimulationConfig, Tolerances

log = logging.getLogger(__name__)

DEFAULT_SAMPLES = 512
MAX_STEPS = 10**8

TRAJECTORY_COLUMNS = ("t", "P1", "P2", "P3", "theta", "omega_eff", "PD", "PB")


class IntegrationError(RuntimeError):
    """The integrator failed or the result violated the norm bound."""


@dataclass(frozen=True)
class QuantumState:
    amplitudes: np.ndarray
    basis: BasisTag = BasisTag.BARE

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        expected = len(self.basis.labels)
        if amps.size != expected:
            raise ValueError(f"{self.basis.value} basis needs {expected} amplitudes, got {amps.size}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis_state(cls, index: int, basis: BasisTag = BasisTag.BARE) -> "QuantumState":
        amps = np.zeros(len(basis.labels), dtype=complex)
        amps[index] = 1.0
        return cls(amps, basis)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm_error(self) -> float:
        return abs(float(np.sum(self.populations)) - 1.0)


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled propagation record.

    ``theta`` and ``omega_eff`` are filled when the trajectory came from a
    pulse configuration (see :func:`simulate`); for a bare ``propagate``
    call on an arbitrary source they are ``None``.
    """

    times: np.ndarray
    states: np.ndarray  # (n_samples, dim)
    basis: BasisTag
    theta: np.ndarray | None = None
    omega_eff: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.times)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.states) ** 2

    def state(self, i: int) -> QuantumState:
        return QuantumState(self.states[i], self.basis)

    @property
    def final(self) -> QuantumState:
        return self.state(-1)

    def dark_bright_populations(self) -> tuple[np.ndarray, np.ndarray]:
        """|<D|psi>|^2 and |<B|psi>|^2 per sample (bare basis only)."""
        if self.basis is not BasisTag.BARE or self.theta is None:
            raise ValueError("dark/bright projections need a bare-basis trajectory with theta")
        c, s = np.cos(self.theta), np.sin(self.theta)
        psi1, psi3 = self.states[:, 0], self.states[:, 2]
        return np.abs(c * psi1 - s * psi3) ** 2, np.abs(s * psi1 + c * psi3) ** 2

    def to_csv(self, target=None, header: list[str] | None = None) -> str:
        """Write ``t,P1,P2,P3,theta,omega_eff,PD,PB``; returns the text."""
        pops = self.populations
        pd, pb = self.dark_bright_populations()
        table = np.column_stack([self.times, pops, self.theta, self.omega_eff, pd, pb])
        buf = io.StringIO()
        for line in header or []:
            buf.write(f"# {line}\n")
        buf.write(",".join(TRAJECTORY_COLUMNS) + "\n")
        for row in table:
            buf.write(",".join(f"{v:.9g}" for v in row) + "\n")
        text = buf.getvalue()
        if target is not None:
            Path(target).write_text(text)
        return text


def _split(z: np.ndarray) -> np.ndarray:
    return np.concatenate([z.real, z.imag])


def _join(y: np.ndarray, n: int) -> np.ndarray:
    return y[:n] + 1j * y[n:]


def propagate(
    h_source: HamiltonianSource,
    psi0: QuantumState,
    span: tuple[float, float],
    tol: Tolerances | None = None,
    n_samples: int = DEFAULT_SAMPLES,
    record_steps: bool = False,
) -> tuple[QuantumState, Trajectory]:
    """Integrate from ``span[0]`` to ``span[1]`` and sample on a uniform grid.

    The norm is never renormalised; a drift above ``tol.norm_tol`` raises
    :class:`IntegrationError`.  With ``record_steps`` every accepted
    internal step is merged into the trajectory as well.
    """
    tol = tol or Tolerances()
    t0, t1 = map(float, span)
    if not (np.isfinite(t0) and np.isfinite(t1)) or not t0 < t1:
        raise ValueError(f"span must be finite and increasing, got {span}")
    if psi0.norm_error() > tol.norm_tol:
        raise ValueError(f"initial state not normalised (error {psi0.norm_error():.3g})")
    n = psi0.amplitudes.size

    def rhs(t, y):
        z = y[:n] + 1j * y[n:]
        dz = -1j * (h_source(t) @ z)
        return np.concatenate([dz.real, dz.imag])

    # sources may carry a hand-expanded right-hand side for (Re psi, Im psi)
    solver = ode(getattr(h_source, "real_rhs", rhs)).set_integrator(
        "dop853", rtol=tol.rtol, atol=tol.atol, nsteps=MAX_STEPS
    )
    steps: list[tuple[float, np.ndarray]] = []
    if record_steps:
        solver.set_solout(lambda t, y: steps.append((t, _join(y, n))))
    solver.set_initial_value(_split(psi0.amplitudes), t0)

    times = np.linspace(t0, t1, max(int(n_samples), 2))
    states = np.empty((times.size, n), dtype=complex)
    states[0] = psi0.amplitudes
    for i, t in enumerate(times[1:], start=1):
        y = solver.integrate(t)
        if not solver.successful():
            raise IntegrationError(
                f"integrator stopped at t={solver.t:.6g} (return code {solver.get_return_code()})"
            )
        states[i] = _join(y, n)

    if record_steps and steps:
        extra_t = np.array([s[0] for s in steps])
        extra_y = np.array([s[1] for s in steps])
        keep = ~np.isin(extra_t, times)
        merged_t = np.concatenate([times, extra_t[keep]])
        order = np.argsort(merged_t, kind="stable")
        merged_t, idx = np.unique(merged_t[order], return_index=True)
        merged_y = np.concatenate([states, extra_y[keep]])[order][idx]
        times, states = merged_t, merged_y

    final = QuantumState(states[-1], psi0.basis)
    drift = float(np.max(np.abs(np.sum(np.abs(states) ** 2, axis=1) - 1.0)))
    if drift > tol.norm_tol:
        raise IntegrationError(f"norm drift {drift:.3g} exceeds norm_tol {tol.norm_tol:.3g}")
    log.debug("propagated %s over [%g, %g], norm drift %.2e", psi0.basis.value, t0, t1, drift)
    return final, Trajectory(times, states, psi0.basis)


def _evaluate_batch(h_source: HamiltonianSource, ts: np.ndarray, n: int) -> np.ndarray:
    h = np.asarray(h_source(ts))
    if h.shape != (ts.size, n, n):
        h = np.array([h_source(t) for t in ts])
    return h


def propagate_oracle(
    h_source: HamiltonianSource,
    psi0: QuantumState,
    span: tuple[float, float],
    steps: int,
    chunk: int = 20000,
) -> QuantumState:
    """Piecewise-constant propagation with exact exponentials at substep midpoints.

    Each exponential comes from a Hermitian eigendecomposition, so this
    path shares no code with the Runge-Kutta integrator.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    t0, t1 = map(float, span)
    n = psi0.amplitudes.size
    dt = (t1 - t0) / steps
    psi = np.array(psi0.amplitudes, dtype=complex)
    for start in range(0, steps, chunk):
        idx = np.arange(start, min(start + chunk, steps))
        mids = t0 + (idx + 0.5) * dt
        w, v = np.linalg.eigh(_evaluate_batch(h_source, mids, n))
        phases = np.exp(-1j * w * dt)
        for k in range(idx.size):
            vk = v[k]
            psi = vk @ (phases[k] * (vk.conj().T @ psi))
    return QuantumState(psi, psi0.basis)


def initial_state(cfg: SimulationConfig, basis: BasisTag, psi0: QuantumState | None = None) -> QuantumState:
    """Bare-basis start (default |1>) expressed in ``basis`` at ``t_start``."""
    psi0 = psi0 or QuantumState.basis_state(0)
    if psi0.basis is not BasisTag.BARE:
        raise ValueError("initial state must be given in the bare basis")
    if basis is BasisTag.BARE:
        return psi0
    theta0 = mixing_angle_at(cfg.span[0], PulsePair.from_config(cfg))
    return QuantumState(transformation(theta0) @ psi0.amplitudes, basis)


def simulate(
    cfg: SimulationConfig,
    model: str = "bare",
    psi0: QuantumState | None = None,
    n_samples: int = DEFAULT_SAMPLES,
) -> tuple[QuantumState, Trajectory]:
    """Run one configuration and return a bare-basis trajectory with theta and Omega_eff.

    ``model`` picks the Hamiltonian: ``"bare"`` (default), ``"darkbright"``
    (exactly equivalent, includes the rotating-frame term) or
    ``"decoupled"`` (dark-bright coupling dropped, reduced model).
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {sorted(MODELS)}")
    basis, _ = MODELS[model]
    start = initial_state(cfg, basis, psi0)
    _, traj = propagate(hamiltonian_source(cfg, model), start, cfg.span, cfg.tolerances, n_samples)

    pulses = PulsePair.from_config(cfg)
    theta = np.asarray(mixing_angle_at(traj.times, pulses), dtype=float)
    states = traj.states
    if basis is BasisTag.DARK_BRIGHT:
        u_t = np.swapaxes(transformation(theta), -1, -2)
        states = np.einsum("nij,nj->ni", u_t, states)
    bare = Trajectory(
        traj.times,
        states,
        BasisTag.BARE,
        theta=theta,
        omega_eff=np.asarray(effective_rabi_at(traj.times, pulses), dtype=float),
    )
    return bare.final, bare


def simulate_lz(cfg: SimulationConfig, n_samples: int = DEFAULT_SAMPLES) -> tuple[QuantumState, Trajectory]:
    """Propagate the two-level bright/intermediate model from |B>."""
    start = QuantumState.basis_state(0, BasisTag.LZ)
    final, traj = propagate(
        lambda t: lz_hamiltonian(t, cfg), start, cfg.span, cfg.tolerances, n_samples
    )
    pulses = PulsePair.from_config(cfg)
    traj = Trajectory(
        traj.times,
        traj.states,
        BasisTag.LZ,
        theta=np.asarray(mixing_angle_at(traj.times, pulses), dtype=float),
        omega_eff=np.asarray(effective_rabi_at(traj.times, pulses), dtype=float),
    )
    return final, traj
