"""Command-line entry point.

    dopplerstirap run --config fig2.txt --out traj.csv
    dopplerstirap sweep-delay --config fig2.txt --set q=10 --out fig4.csv
    dopplerstirap diagnostics --config fig2.txt

Exit codes: 0 success, 1 invalid configuration, 2 integration failure
(argparse usage errors also exit with 2).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import adiabaticity_report, max_intermediate_population, momentum_kick, populations
from .hamiltonian import MODELS
from .propagator import IntegrationError, simulate
from .sweeps import SweepError, SweepSpec, default_grid, sweep_area, sweep_delay, sweep_momentum
from .units import CONFIG_KEYS, ConfigError, format_config, load_config

log = logging.getLogger("dopplerstirap")

SUBCOMMANDS = ("run", "sweep-delay", "sweep-area", "sweep-momentum", "diagnostics")
_SWEEPS = {
    "sweep-delay": ("delay", sweep_delay),
    "sweep-area": ("area", sweep_area),
    "sweep-momentum": ("momentum", sweep_momentum),
}


@dataclass
class CommandSpec:
    subcommand: str
    config: Path
    out: Path | None = None
    overrides: dict[str, float] = field(default_factory=dict)
    model: str = "bare"
    grid: tuple[float, float, int] | None = None
    workers: int = 1


def _override(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    key = key.strip()
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    if key not in CONFIG_KEYS:
        raise argparse.ArgumentTypeError(f"unknown config key {key!r}")
    try:
        return key, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{key}: not a number: {value!r}") from None


def _grid(text: str) -> tuple[float, float, int]:
    try:
        start, stop, num = text.split(",")
        return float(start), float(stop), int(num)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start,stop,num, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dopplerstirap",
        description="Adiabatic transfer in a recoiling lambda atom: trajectories, sweeps, diagnostics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="{" + ",".join(SUBCOMMANDS) + "}")
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, help="flat key = value config file")
        p.add_argument("--out", type=Path, help="output CSV (default: stdout)")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            type=_override,
            default=[],
            metavar="KEY=VALUE",
            help="override a config key; repeatable",
        )
        if name != "diagnostics":
            p.add_argument("--model", choices=sorted(MODELS), default="bare")
        if name in _SWEEPS:
            p.add_argument("--grid", type=_grid, help="start,stop,num (delay in units of 1/w_r)")
            p.add_argument("--workers", type=int, default=1)
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def parse_args(argv: list[str] | None = None) -> CommandSpec:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if ns.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return CommandSpec(
        subcommand=ns.subcommand,
        config=ns.config,
        out=ns.out,
        overrides=dict(ns.overrides),
        model=getattr(ns, "model", "bare"),
        grid=getattr(ns, "grid", None),
        workers=getattr(ns, "workers", 1),
    )


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def execute(spec: CommandSpec) -> int:
    try:
        cfg = load_config(spec.config, spec.overrides)
    except (ConfigError, OSError) as exc:
        print(f"dopplerstirap: invalid configuration: {exc}", file=sys.stderr)
        return 1
    header = [f"dopplerstirap {__version__} {spec.subcommand}"] + format_config(cfg).splitlines()

    try:
        if spec.subcommand == "run":
            final, traj = simulate(cfg, model=spec.model)
            pops = populations(final)
            summary = [
                f"model = {spec.model}",
                "final P1,P2,P3 = " + ",".join(f"{p:.9g}" for p in pops),
                f"max P2 = {max_intermediate_population(traj):.9g}",
                f"kick = {momentum_kick(pops):.9g}",
            ]
            _emit(traj.to_csv(header=header + summary), spec.out)
        elif spec.subcommand == "diagnostics":
            _emit(adiabaticity_report(cfg).to_csv(header=header), spec.out)
        else:
            parameter, runner = _SWEEPS[spec.subcommand]
            if spec.grid is None:
                grid = default_grid(parameter, cfg)
            else:
                start, stop, num = spec.grid
                grid = np.linspace(start, stop, num)
            sweep = SweepSpec(cfg, parameter, tuple(grid), spec.model)
            result = runner(sweep, workers=spec.workers)
            _emit(result.to_csv(header=header[:1]), spec.out)
    except ValueError as exc:
        print(f"dopplerstirap: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except (IntegrationError, SweepError) as exc:
        print(f"dopplerstirap: integration failed: {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv: list[str] | None = None) -> int:
    return execute(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
