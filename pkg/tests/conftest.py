import pytest

from dopplerstirap.units import SimulationConfig

T = 10.0


@pytest.fixture
def slow_cfg():
    """Slow-atom parameters: q = 0.1, Omega0*T = 100, T = 10, counterintuitive delay."""
    return SimulationConfig(q=0.1, omega0=10.0, pulse_width=T, delay=T)


@pytest.fixture
def fast_cfg():
    return SimulationConfig(q=10.0, omega0=10.0, pulse_width=T, delay=-T)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion, then assert it."""

    def check(number: int, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
