"""Experiment description and the trajectory loop.

A :class:`WalkConfig` holds everything needed to reproduce one run; its
dictionary form is the JSON document read by the command line.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Callable, Sequence

from .evolution import CoinField, Coupling, StepOperator, step
from .hilbert import (
    DEFAULT_MEMORY_CAP,
    BasisIndex,
    Boundary,
    InitialStateSpec,
    Lattice,
    StateVector,
    build_initial_state,
)
from .observables import OBSERVABLES, ObservableSeries, Recorder


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class WalkConfig:
    nodes: int
    J: float
    theta: float | None = None
    theta_minus: float | None = None
    theta_plus: float | None = None
    interface: int | None = None
    boundary: str = "p"
    initial: str = "z"
    uniform: bool = False
    x0: int | None = None
    steps: int = 100
    observables: tuple = ("p", "mean_spin", "entropies")
    spin_set: tuple | None = None
    sample_stride: int | None = None
    average_window: tuple | None = None
    bounce_phase: float = 1.0

    def __post_init__(self):
        if not isinstance(self.nodes, int) or isinstance(self.nodes, bool) or self.nodes < 2:
            raise ConfigError("nodes", f"expected an integer >= 2, got {self.nodes!r}")
        if self.boundary not in ("p", "b"):
            raise ConfigError("boundary", f"expected 'p' or 'b', got {self.boundary!r}")
        _check_real("J", self.J)
        has_interface = any(v is not None for v in (self.theta_minus, self.theta_plus, self.interface))
        if self.theta is None and not has_interface:
            raise ConfigError("theta", "missing (or give theta_minus/theta_plus/interface)")
        if self.theta is not None and has_interface:
            raise ConfigError("theta", "give either theta or theta_minus/theta_plus/interface")
        if self.theta is not None:
            _check_real("theta", self.theta)
        else:
            for key in ("theta_minus", "theta_plus"):
                _check_real(key, getattr(self, key))
            if not isinstance(self.interface, int) or not 0 <= self.interface < self.nodes:
                raise ConfigError("interface", f"expected a node index, got {self.interface!r}")
        label = self.initial
        if label.startswith("i"):
            object.__setattr__(self, "initial", label[1:])
            object.__setattr__(self, "uniform", True)
        if self.initial not in ("z", "x", "zx", "e"):
            raise ConfigError("initial", f"unknown initial state {label!r}")
        if self.x0 is None:
            object.__setattr__(self, "x0", self.nodes // 2)
        if not isinstance(self.x0, int) or not 0 <= self.x0 < self.nodes:
            raise ConfigError("x0", f"expected a node index, got {self.x0!r}")
        try:
            self.initial_spec.validate(self.lattice)
        except ValueError as err:
            raise ConfigError("x0", str(err)) from None
        if not isinstance(self.steps, int) or self.steps < 0:
            raise ConfigError("steps", f"expected a non-negative integer, got {self.steps!r}")
        object.__setattr__(self, "observables", tuple(self.observables))
        unknown = set(self.observables) - set(OBSERVABLES)
        if unknown:
            raise ConfigError("observables", f"unknown names {sorted(unknown)}")
        if self.spin_set is not None:
            object.__setattr__(self, "spin_set", tuple(int(e) for e in self.spin_set))
            edges = self.lattice.num_edges
            if not self.spin_set or len(set(self.spin_set)) != len(self.spin_set) or any(
                    not 0 <= e < edges for e in self.spin_set):
                raise ConfigError("spin_set", f"expected distinct edges in [0, {edges})")
        if "spin_set" in self.observables and not self.spin_set:
            raise ConfigError("spin_set", "required by the 'spin_set' observable")
        if self.sample_stride is None:
            object.__setattr__(self, "sample_stride", 1 if self.nodes <= 13 else 4)
        if not isinstance(self.sample_stride, int) or self.sample_stride < 1:
            raise ConfigError("sample_stride", f"expected a positive integer, got {self.sample_stride!r}")
        if self.average_window is not None:
            window = tuple(self.average_window)
            if len(window) != 2 or not 0 <= window[0] < window[1] <= self.steps:
                raise ConfigError("average_window", f"expected [start, stop] within the run, got {window}")
            object.__setattr__(self, "average_window", window)
        if self.boundary == "p" and self.bounce_phase != 1.0:
            raise ConfigError("bounce_phase", "only meaningful on reflective lattices")

    @classmethod
    def from_dict(cls, data: dict) -> "WalkConfig":
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown configuration key")
        for key in ("nodes", "J"):
            if key not in data:
                raise ConfigError(key, "missing required key")
        return cls(**data)

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("observables", "spin_set", "average_window"):
            if out[key] is not None:
                out[key] = list(out[key])
        return out

    def with_params(self, **changes) -> "WalkConfig":
        return replace(self, **changes)

    @property
    def lattice(self) -> Lattice:
        return Lattice(self.nodes, Boundary(self.boundary))

    @property
    def initial_spec(self) -> InitialStateSpec:
        return InitialStateSpec(self.initial, self.uniform, self.x0)

    @property
    def coin(self) -> CoinField:
        if self.theta is not None:
            return CoinField.uniform(self.nodes, self.theta)
        return CoinField.interface(self.nodes, self.theta_minus, self.theta_plus, self.interface)

    @property
    def window(self) -> tuple[int, int]:
        """Averaging window in steps; defaults to the second half of the run."""
        if self.average_window is not None:
            return self.average_window
        return self.steps // 2, self.steps

    def operator(self) -> StepOperator:
        return StepOperator(self.lattice, self.coin, Coupling(self.J), bounce_phase=self.bounce_phase)

    def initial_state(self, memory_cap: int = DEFAULT_MEMORY_CAP) -> StateVector:
        return build_initial_state(self.initial_spec, BasisIndex(self.lattice, memory_cap))


def _check_real(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(key, f"expected a finite number, got {value!r}")


def run(config: WalkConfig, memory_cap: int = DEFAULT_MEMORY_CAP,
        callback: Callable[[int, StateVector], None] | None = None,
        observables: Sequence[str] | None = None) -> ObservableSeries:
    """Evolve ``config.steps`` steps, sampling observables every ``sample_stride`` steps (t = 0 included)."""
    state = config.initial_state(memory_cap)
    op = config.operator()
    recorder = Recorder(config.nodes, observables or config.observables, config.spin_set)
    stride = config.sample_stride
    for t in range(config.steps + 1):
        if t:
            step(state, op)
        if t % stride == 0 or t == config.steps:
            recorder(t, state)
        if callback is not None:
            callback(t, state)
    return recorder.series
