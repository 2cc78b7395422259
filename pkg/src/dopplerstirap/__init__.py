"""Adiabatic population transfer in a three-level lambda atom with photon recoil and Doppler shifts."""

__version__ = "0.1.0"

from .analysis import (
    DiagnosticsReport,
    NoCrossing,
    adiabaticity_report,
    crossing_times,
    decompose_dark_bright,
    lz_final_population,
    lz_transition_probability,
    max_intermediate_population,
    momentum_kick,
    populations,
)
from .hamiltonian import (
    BasisTag,
    bare_hamiltonian,
    darkbright_hamiltonian,
    decoupled_hamiltonian,
    hamiltonian_source,
    lz_hamiltonian,
    transformation,
)
from .propagator import (
    IntegrationError,
    QuantumState,
    Trajectory,
    propagate,
    propagate_oracle,
    simulate,
    simulate_lz,
)
from .pulses import (
    PulsePair,
    effective_rabi,
    mixing_angle,
    mixing_angle_at,
    mixing_angle_rate,
    pump_envelope,
    stokes_envelope,
)
from .sweeps import SweepResult, SweepSpec, sweep_area, sweep_delay, sweep_momentum
from .units import ConfigError, SimulationConfig, Tolerances, load_config, momentum_from_geometry, validate
