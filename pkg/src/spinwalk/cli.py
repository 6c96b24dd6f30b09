"""Command-line front end.

Every subcommand reads one JSON document (``--config``) and writes CSV files
plus ``manifest.json`` into ``--out``.  Exit codes: 0 success, 2 bad
configuration, 3 memory cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .experiment import ConfigError, WalkConfig, run
from .hilbert import DEFAULT_MEMORY_CAP, ResourceCapError
from .semiclassical import dirac_coefficients, group_velocity, ll_trajectory, quasienergy
from .sweep import DEFAULT_STEPS, METRICS, SweepGrid, default_axis, dominant_period, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_CAP = 0, 2, 3


def fmt(value) -> str:
    """Shortest round-trip decimal for floats, plain text otherwise."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(fmt(v) for v in row) + "\n")


def write_manifest(out: Path, command: str, config: dict, files, started: float) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "files": sorted(files),
        "wall_time_s": round(time.perf_counter() - started, 3),
    }
    with open(out / "manifest.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def load_config(path) -> dict:
    if path is None:
        raise ConfigError("config", "no --config given")
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except OSError as err:
        raise ConfigError("config", f"cannot read {path}: {err.strerror}") from None
    except json.JSONDecodeError as err:
        raise ConfigError("config", f"invalid JSON: {err}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return data


def _pop(data: dict, key: str, default, kind=float):
    value = data.pop(key, default)
    try:
        if kind is list:
            return [float(v) for v in value]
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"cannot interpret {value!r}") from None


def _walk_config(data: dict, args) -> WalkConfig:
    if args.stride is not None:
        data = dict(data, sample_stride=args.stride)
    try:
        return WalkConfig.from_dict(data)
    except TypeError as err:
        raise ConfigError("config", str(err)) from None


def cmd_evolve(args) -> list[str]:
    config = _walk_config(load_config(args.config), args)
    series = run(config, args.memory_cap).arrays()
    out = args.out
    times = series["times"]
    V, E = config.nodes, config.lattice.num_edges
    written = []

    def emit(name, header, table):
        write_csv(out / name, ["t"] + header, ([t, *row] for t, row in zip(times, table)))
        written.append(name)

    if "p" in series:
        emit("p.csv", [f"x{x}" for x in range(V)], series["p"])
    if "spin" in series:
        header = [f"e{e}.{c}" for e in range(E) for c in ("sx", "sy", "sz")]
        emit("spin.csv", header, series["spin"].reshape(len(times), -1))
    if "mean_spin" in series:
        emit("mean_spin.csv", ["sx", "sy", "sz"], series["mean_spin"])
    if "entropies" in series:
        emit("entropies.csv", ["S_x", "S_c", "S_s"], series["entropies"])
    if "spin_set_entropy" in series:
        emit("spin_set.csv", ["S_A"], series["spin_set_entropy"][:, None])
    if "concurrence" in series:
        header = [f"C{i}_{j}" for i in range(E) for j in range(i + 1, E)]
        emit("concurrence.csv", header, series["concurrence"])
    args._config_echo = config.to_dict()
    return written


def cmd_sweep(args) -> list[str]:
    data = load_config(args.config)
    resolution = int(_pop(data, "resolution", 32, int))
    thetas = data.pop("theta_values", None)
    Js = data.pop("J_values", None)
    thetas = default_axis(resolution) if thetas is None else _pop({"theta_values": thetas}, "theta_values", None, list)
    Js = default_axis(resolution) if Js is None else _pop({"J_values": Js}, "J_values", None, list)
    data.setdefault("steps", DEFAULT_STEPS)
    data.setdefault("theta", float(thetas[0]))
    data.setdefault("J", float(Js[0]))
    data["observables"] = ["p", "mean_spin", "entropies"]
    template = _walk_config(data, args)
    try:
        grid = SweepGrid(template, thetas, Js)
    except ValueError as err:
        raise ConfigError("theta_values", str(err)) from None
    result = run_sweep(grid, args.workers, args.memory_cap)
    write_csv(args.out / "sweep.csv", ["theta", "J", *METRICS, "error"], result.rows())
    args._config_echo = dict(template.to_dict(), theta_values=list(grid.theta_values),
                             J_values=list(grid.J_values))
    return ["sweep.csv"]


def cmd_dispersion(args) -> list[str]:
    data = load_config(args.config) if args.config else {}
    thetas = _pop(data, "theta_values", [math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2], list)
    n = _pop(data, "num_momenta", 128, int)
    if data:
        raise ConfigError(next(iter(data)), "unknown configuration key")
    if n < 2:
        raise ConfigError("num_momenta", "expected at least 2")
    # cell-centred momenta in (-pi, pi) never hit the cone tip p = 0
    k = -math.pi + (np.arange(n) + 0.5) * 2 * math.pi / n
    bands, velocity = [], []
    for theta in thetas:
        band = quasienergy(k, theta)
        for i in range(n):
            bands.append((theta, k[i], band.E_plus[i], *band.d_hat[i]))
        v = group_velocity(k, theta)
        velocity.extend((theta, k[i], v[i]) for i in range(n))
    write_csv(args.out / "bands.csv", ["theta", "k", "E", "dx", "dy", "dz"], bands)
    write_csv(args.out / "velocity.csv", ["theta", "p", "v_g"], velocity)
    args._config_echo = {"theta_values": thetas, "num_momenta": n}
    return ["bands.csv", "velocity.csv"]


def cmd_llcompare(args) -> list[str]:
    data = load_config(args.config)
    p = _pop(data, "p", 6 * math.pi / 13)
    dt = _pop(data, "dt", 0.1)
    data.setdefault("initial", "iz")
    data["observables"] = ["mean_spin"]
    data["sample_stride"] = 1
    config = _walk_config(data, args)
    if config.theta is None:
        raise ConfigError("theta", "the comparison needs a uniform coin angle")
    exact = run(config, args.memory_cap).arrays()["mean_spin"]
    try:
        coeffs = dirac_coefficients(p, config.theta)
        v_g = coeffs.v_g
    except ValueError as err:
        raise ConfigError("p", str(err)) from None
    s0 = exact[0]
    damped = ll_trajectory(s0, coeffs.d0, config.J, config.nodes, config.steps, v_g=v_g, dt=dt)
    free = ll_trajectory(s0, coeffs.d0, config.J, config.nodes, config.steps, dt=dt)
    header = ["sx", "sy", "sz", "abs_s"]
    times = range(config.steps + 1)
    for name, traj in (("exact.csv", exact), ("ll.csv", damped), ("ll_precession.csv", free)):
        norms = np.linalg.norm(traj, axis=1)
        write_csv(args.out / name, ["t"] + header, ([t, *traj[t], norms[t]] for t in times))
    summary = {
        "period_exact": dominant_period(exact[:, 2]),
        "period_ll": dominant_period(damped[:, 2]),
        "period_mean_field": 4 * math.pi * config.nodes / config.J,
    }
    with open(args.out / "periods.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump({k: float(v) for k, v in summary.items()}, f, indent=2, sort_keys=True)
        f.write("\n")
    args._config_echo = dict(config.to_dict(), p=p, dt=dt)
    return ["exact.csv", "ll.csv", "ll_precession.csv", "periods.json"]


COMMANDS = {
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
    "dispersion": cmd_dispersion,
    "llcompare": cmd_llcompare,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinwalk", description="Quantum walk with edge spins.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, required=name != "dispersion")
        p.add_argument("--out", type=Path, default=Path("."))
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--memory-cap", type=int, default=DEFAULT_MEMORY_CAP)
        p.add_argument("--stride", type=int, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        if args.workers < 1:
            raise ConfigError("workers", "expected a positive integer")
        args.out.mkdir(parents=True, exist_ok=True)
        files = COMMANDS[args.command](args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceCapError as err:
        print(f"resource cap exceeded: {err}", file=sys.stderr)
        return EXIT_CAP
    write_manifest(args.out, args.command, args._config_echo, files, started)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
