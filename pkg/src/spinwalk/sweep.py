"""(theta, J) parameter scans and the curve fits used on their output."""

from __future__ import annotations

import math
import multiprocessing as mp
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.optimize import curve_fit
from scipy.signal import find_peaks

from .experiment import WalkConfig, run
from .hilbert import DEFAULT_MEMORY_CAP, BYTES_PER_AMPLITUDE, BasisIndex, ResourceCapError
from .observables import ks_distance

LOCALIZATION_THRESHOLD = 1.5 / 100
DEFAULT_RESOLUTION = 32
DEFAULT_STEPS = 4000

METRICS = ("D_KS", "S_x", "S_c", "S_s", "mean_S_x", "mean_S_c", "mean_S_s", "mean_abs_spin")


def default_axis(n: int = DEFAULT_RESOLUTION) -> np.ndarray:
    """Cell-centred points covering (0, pi)."""
    return (np.arange(n) + 0.5) * np.pi / n


@dataclass(frozen=True)
class SweepGrid:
    template: WalkConfig
    theta_values: tuple = field(default_factory=lambda: tuple(default_axis()))
    J_values: tuple = field(default_factory=lambda: tuple(default_axis()))

    def __post_init__(self):
        object.__setattr__(self, "theta_values", tuple(float(v) for v in self.theta_values))
        object.__setattr__(self, "J_values", tuple(float(v) for v in self.J_values))
        if not self.theta_values or not self.J_values:
            raise ValueError("sweep grid must not be empty")
        if self.template.theta is None:
            raise ValueError("sweep template must use a uniform coin angle")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.theta_values), len(self.J_values)

    def cells(self):
        for i, theta in enumerate(self.theta_values):
            for j, J in enumerate(self.J_values):
                yield (i, j), self.template.with_params(theta=theta, J=J)


@dataclass
class SweepResult:
    theta_values: np.ndarray
    J_values: np.ndarray
    metrics: dict  # name -> (n_theta, n_J) array, NaN for failed cells
    errors: dict  # (i, j) -> message

    def rows(self):
        """Long-form records ``(theta, J, metrics..., error)`` in grid order."""
        for i, theta in enumerate(self.theta_values):
            for j, J in enumerate(self.J_values):
                values = [float(self.metrics[m][i, j]) for m in METRICS]
                yield (float(theta), float(J), *values, self.errors.get((i, j), ""))

    def localized(self) -> np.ndarray:
        return self.metrics["D_KS"] > LOCALIZATION_THRESHOLD


def cell_metrics(config: WalkConfig, memory_cap: int = DEFAULT_MEMORY_CAP) -> dict[str, float]:
    series = run(config, memory_cap, observables=("p", "mean_spin", "entropies")).arrays()
    times = series["times"]
    lo, hi = config.window
    sel = (times >= lo) & (times <= hi)
    p_avg = series["p"][sel].mean(axis=0)
    ent = series["entropies"]
    out = {"D_KS": ks_distance(p_avg / p_avg.sum())}
    for k, name in enumerate(("S_x", "S_c", "S_s")):
        out[name] = float(ent[-1, k])
        out["mean_" + name] = float(ent[sel, k].mean())
    out["mean_abs_spin"] = float(np.linalg.norm(series["mean_spin"][sel], axis=1).mean())
    return out


def _cell_task(args):
    index, config, memory_cap = args
    try:
        return index, cell_metrics(config, memory_cap), None
    except Exception as err:  # recorded per cell, the sweep goes on
        return index, None, f"{type(err).__name__}: {err}"


def max_workers(config: WalkConfig, memory_cap: int) -> int:
    """In-flight trajectories allowed by the cap (two state-sized buffers each)."""
    footprint = 2 * BasisIndex(config.lattice, memory_cap).dim * BYTES_PER_AMPLITUDE
    return max(1, memory_cap // footprint)


def run_sweep(grid: SweepGrid, workers: int = 1, memory_cap: int = DEFAULT_MEMORY_CAP) -> SweepResult:
    if workers < 1:
        raise ValueError("workers must be >= 1")
    try:
        workers = min(workers, max_workers(grid.template, memory_cap))
    except ResourceCapError:
        workers = 1  # every cell will report the cap error itself
    tasks = [(index, config, memory_cap) for index, config in grid.cells()]
    if workers == 1:
        results = [_cell_task(t) for t in tasks]
    else:
        with mp.get_context("spawn").Pool(workers) as pool:
            results = pool.map(_cell_task, tasks, chunksize=1)
    metrics = {m: np.full(grid.shape, np.nan) for m in METRICS}
    errors = {}
    for index, values, error in sorted(results, key=lambda r: r[0]):
        if error is not None:
            errors[index] = error
            continue
        for m in METRICS:
            metrics[m][index] = values[m]
    return SweepResult(np.array(grid.theta_values), np.array(grid.J_values), metrics, errors)


def fit_linear_slope(times, values, window: tuple[float, float] | None = None) -> float:
    """Least-squares slope of ``values(times)`` restricted to ``window`` (inclusive)."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is not None:
        sel = (times >= window[0]) & (times <= window[1])
        times, values = times[sel], values[sel]
    if len(times) < 2 or np.ptp(times) == 0:
        raise ValueError("fit window holds fewer than two distinct times")
    slope, _ = np.polyfit(times, values, 1)
    return float(slope)


class FitError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3g})")
        self.residual = residual


@dataclass(frozen=True)
class StretchedFit:
    nu: float
    alpha: float
    residual: float


def stretched_exponential(t, nu, alpha):
    return 1.0 - np.exp(-nu * np.power(t, alpha))


def fit_stretched_exponential(times, values, p0=(0.1, 0.5)) -> StretchedFit:
    """Fit ``1 - exp(-nu t**alpha)`` to a series already normalized by its saturation value."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    sel = times > 0
    times, values = times[sel], values[sel]
    if len(times) < 3:
        raise ValueError("need at least three positive times")
    try:
        (nu, alpha), _ = curve_fit(stretched_exponential, times, values, p0=p0,
                                   bounds=([1e-8, 0.05], [10.0, 3.0]), maxfev=20000)
    except RuntimeError as err:
        resid = float(np.sqrt(np.mean((stretched_exponential(times, *p0) - values) ** 2)))
        raise FitError(str(err), resid) from None
    resid = float(np.sqrt(np.mean((stretched_exponential(times, nu, alpha) - values) ** 2)))
    if not (math.isfinite(nu) and math.isfinite(alpha)):
        raise FitError("fit did not converge", resid)
    return StretchedFit(float(nu), float(alpha), resid)


def smooth(values, window: int = 9) -> np.ndarray:
    return uniform_filter1d(np.asarray(values, dtype=float), size=window, mode="nearest")


def recurrence_peaks(values, window: int = 9, prominence: float = 0.01,
                     distance: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Indices and smoothed heights of the recurrence maxima of a ``|s|(t)`` series."""
    smoothed = smooth(values, window)
    kwargs = {"prominence": prominence}
    if distance is not None:
        kwargs["distance"] = distance
    idx, _ = find_peaks(smoothed, **kwargs)
    return idx, smoothed[idx]


def dominant_period(values, dt: float = 1.0) -> float:
    """Period of the strongest non-zero Fourier mode, refined by parabolic interpolation."""
    x = np.asarray(values, dtype=float)
    x = x - x.mean()
    n = len(x)
    pad = 8 * n
    spec = np.abs(np.fft.rfft(x * np.hanning(n), pad))
    k = int(np.argmax(spec[1:])) + 1
    if 0 < k < len(spec) - 1:
        a, b, c = spec[k - 1], spec[k], spec[k + 1]
        k = k + 0.5 * (a - c) / (a - 2 * b + c)
    return pad * dt / k
