import math

import numpy as np
import pytest
from scipy.linalg import expm

from dopplerstirap.hamiltonian import (
    BasisTag,
    bare_hamiltonian,
    darkbright_hamiltonian,
    hamiltonian_source,
    transformation,
)
from dopplerstirap.propagator import (
    TRAJECTORY_COLUMNS,
    IntegrationError,
    QuantumState,
    propagate,
    propagate_oracle,
    simulate,
)
from dopplerstirap.pulses import PulsePair, mixing_angle_at
from dopplerstirap.units import SimulationConfig, Tolerances

GROUND = QuantumState.basis_state(0)


def zero_source(t):
    return np.zeros((3, 3), dtype=complex)


def test_quantum_state_shape_checked():
    with pytest.raises(ValueError):
        QuantumState([1, 0], BasisTag.BARE)
    s = QuantumState([0.6, 0.8j], BasisTag.LZ)
    assert s.norm_error() == pytest.approx(0, abs=1e-15)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 1


def test_free_evolution_is_identity():
    psi0 = QuantumState(np.array([1, 1j, -1]) / math.sqrt(3))
    final, traj = propagate(zero_source, psi0, (-5.0, 5.0))
    np.testing.assert_allclose(final.amplitudes, psi0.amplitudes, atol=1e-15)
    assert len(traj) == 512
    oracle = propagate_oracle(zero_source, psi0, (-5.0, 5.0), steps=10)
    np.testing.assert_allclose(oracle.amplitudes, psi0.amplitudes, atol=1e-15)


def test_rabi_pi_pulse():
    omega = 2.0
    h = np.array([[0, omega / 2], [omega / 2, 0]], dtype=complex)
    start = QuantumState([1, 0], BasisTag.LZ)
    final, _ = propagate(lambda t: h, start, (0.0, math.pi / omega))
    np.testing.assert_allclose(final.populations, [0, 1], atol=1e-10)


def test_oracle_exact_for_constant_hamiltonian():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    h = a + a.conj().T
    psi0 = QuantumState(np.array([0.6, 0, 0.8j]))
    expected = expm(-1j * h * 2.5) @ psi0.amplitudes
    for steps in (1, 7, 100):
        got = propagate_oracle(lambda t: h, psi0, (0.0, 2.5), steps)
        np.testing.assert_allclose(got.amplitudes, expected, atol=1e-12)
    rk, _ = propagate(lambda t: h, psi0, (0.0, 2.5))
    np.testing.assert_allclose(rk.amplitudes, expected, atol=1e-9)


def test_oracle_accepts_scalar_only_sources():
    cfg = SimulationConfig(q=0.1, omega0=10, pulse_width=10, delay=10)

    def scalar_only(t):
        if np.ndim(t):
            raise TypeError("scalar only")
        return bare_hamiltonian(t, cfg)

    with pytest.raises(TypeError):
        propagate_oracle(scalar_only, GROUND, cfg.span, 50)

    def loose(t):
        return bare_hamiltonian(float(np.ravel(t)[0]), cfg)

    a = propagate_oracle(loose, GROUND, (0.0, 1.0), 50)
    b = propagate_oracle(lambda t: bare_hamiltonian(t, cfg), GROUND, (0.0, 1.0), 50)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-14)


def test_stirap_dark_state_limit():
    cfg = SimulationConfig(q=0.0, omega0=10, pulse_width=10, delay=10)
    final, traj = simulate(cfg)
    assert final.populations[2] >= 0.999
    oracle = propagate_oracle(hamiltonian_source(cfg), GROUND, cfg.span, 200_000)
    assert np.max(np.abs(oracle.amplitudes - final.amplitudes)) <= 1e-6


@pytest.mark.parametrize("delay", [10.0, -10.0])
def test_oracle_agreement_slow_atoms(delay):
    cfg = SimulationConfig(q=0.1, omega0=10, pulse_width=10, delay=delay)
    final, _ = simulate(cfg)
    oracle = propagate_oracle(hamiltonian_source(cfg), GROUND, cfg.span, 200_000)
    assert np.max(np.abs(oracle.amplitudes - final.amplitudes)) <= 1e-6


def test_oracle_converges_second_order():
    cfg = SimulationConfig(q=2.0, omega0=10, pulse_width=5, delay=-5)
    src = hamiltonian_source(cfg)
    ref, _ = propagate(src, GROUND, cfg.span, Tolerances(rtol=1e-13))
    errs = [
        np.max(np.abs(propagate_oracle(src, GROUND, cfg.span, n).amplitudes - ref.amplitudes))
        for n in (2000, 4000)
    ]
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


@pytest.mark.parametrize(
    "q,delay",
    [(0.0, 10.0), (0.1, 10.0), (0.1, -10.0), (10.0, 10.0), (10.0, -8.0), (10.0, -15.0)],
)
def test_norm_conserved(q, delay):
    cfg = SimulationConfig(q=q, omega0=10, pulse_width=10, delay=delay)
    _, traj = simulate(cfg)
    drift = np.max(np.abs(traj.populations.sum(axis=1) - 1))
    assert drift <= 1e-9


@pytest.mark.parametrize("q,delay", [(0.1, 10.0), (0.1, -10.0), (10.0, -10.0)])
def test_frame_equivalence(q, delay):
    cfg = SimulationConfig(q=q, omega0=10, pulse_width=10, delay=delay)
    t0, t1 = cfg.span
    p = PulsePair.from_config(cfg)
    bare_final, _ = propagate(hamiltonian_source(cfg), GROUND, cfg.span)
    start_db = QuantumState(transformation(mixing_angle_at(t0, p)) @ GROUND.amplitudes, BasisTag.DARK_BRIGHT)
    db_final, _ = propagate(
        lambda t: darkbright_hamiltonian(t, cfg, include_nonadiabatic=True), start_db, cfg.span
    )
    rotated = transformation(mixing_angle_at(t1, p)) @ bare_final.amplitudes
    assert np.max(np.abs(rotated - db_final.amplitudes)) <= 1e-6


def test_time_reversal():
    cfg = SimulationConfig(q=0.1, omega0=10, pulse_width=10, delay=-10)
    src = hamiltonian_source(cfg)
    t0, t1 = cfg.span
    psi0 = QuantumState(np.array([0.6, 0.0, 0.8j]))
    forward, _ = propagate(src, psi0, (t0, t1))
    # psi(s) = psi(-s) obeys i dpsi/ds = -H(-s) psi
    back, _ = propagate(lambda s: -src(-s), forward, (-t1, -t0))
    assert np.max(np.abs(back.amplitudes - psi0.amplitudes)) <= 1e-6


def test_nonunitary_source_flagged():
    h = np.diag([0.0, -0.5j, 0.0])
    psi0 = QuantumState([0, 1, 0])
    with pytest.raises(IntegrationError, match="norm drift"):
        propagate(lambda t: h, psi0, (0.0, 1.0))


@pytest.mark.filterwarnings("ignore:dop853")
def test_integrator_failure_reported():
    with pytest.raises(IntegrationError):
        propagate(lambda t: np.full((3, 3), np.nan), GROUND, (0.0, 1.0))


def test_bad_inputs():
    with pytest.raises(ValueError, match="normalised"):
        propagate(zero_source, QuantumState([1, 1, 0]), (0, 1))
    with pytest.raises(ValueError, match="span"):
        propagate(zero_source, GROUND, (1, 0))
    with pytest.raises(ValueError):
        propagate_oracle(zero_source, GROUND, (0, 1), 0)


def test_record_steps_merges_internal_points():
    cfg = SimulationConfig(q=0.1, omega0=10, pulse_width=10, delay=10)
    _, plain = propagate(hamiltonian_source(cfg), GROUND, cfg.span)
    _, full = propagate(hamiltonian_source(cfg), GROUND, cfg.span, record_steps=True)
    assert len(full) > len(plain)
    assert np.all(np.diff(full.times) > 0)
    assert np.isin(plain.times, full.times).all()
    np.testing.assert_allclose(full.states[-1], plain.states[-1], atol=1e-12)


def test_simulate_models_agree_and_fill_pulses():
    cfg = SimulationConfig(q=0.1, omega0=10, pulse_width=10, delay=10)
    a, ta = simulate(cfg)
    b, tb = simulate(cfg, model="darkbright")
    assert ta.basis is tb.basis is BasisTag.BARE
    assert np.max(np.abs(ta.states - tb.states)) <= 1e-6
    assert ta.theta[0] == pytest.approx(0, abs=1e-6) and ta.theta[-1] == pytest.approx(math.pi / 2, abs=1e-6)
    assert ta.omega_eff.max() == pytest.approx(10.0, rel=1e-3)
    with pytest.raises(ValueError, match="unknown model"):
        simulate(cfg, model="nope")


def test_trajectory_csv(tmp_path):
    cfg = SimulationConfig(q=0.1, omega0=10, pulse_width=10, delay=10)
    _, traj = simulate(cfg)
    text = traj.to_csv(tmp_path / "t.csv", header=["q = 0.1"])
    lines = text.splitlines()
    assert lines[0] == "# q = 0.1"
    assert lines[1] == ",".join(TRAJECTORY_COLUMNS) == "t,P1,P2,P3,theta,omega_eff,PD,PB"
    rows = np.loadtxt(tmp_path / "t.csv", delimiter=",", comments="#", skiprows=2)
    assert rows.shape == (512, 8)
    # |d|^2 + |b|^2 = P1 + P3 at every sample
    np.testing.assert_allclose(rows[:, 6] + rows[:, 7], rows[:, 1] + rows[:, 3], atol=1e-8)
