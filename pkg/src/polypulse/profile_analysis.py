"""Excitation-profile sweeps and bandwidth metrics.

Profiles are transition probabilities sampled over a 1D Rabi-error grid or a
2D (Rabi error, detuning error) grid.  Band measurements use linear
interpolation between grid points; no fitting.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .su2 import InvalidInputError, PulseTrain, probability_grid

__all__ = [
    "GridSpec",
    "Profile",
    "BandMode",
    "BandMeasurement",
    "sweep_1d",
    "sweep_2d",
    "band_at_level",
    "write_profile_csv",
]

_DIVISIBILITY_ATOL = 1e-9


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    n = (hi - lo) / step
    if abs(n - round(n)) > _DIVISIBILITY_ATOL / step:
        raise InvalidInputError(
            f"step {step} does not divide the range [{lo}, {hi}]"
        )
    return lo + step * np.arange(int(round(n)) + 1)


@dataclass(frozen=True)
class GridSpec:
    """Sweep axes: eps is the relative Rabi error, delta the absolute
    detuning error in rad per unit duration.  delta axes are optional; a
    spec with them is 2D."""

    eps_range: tuple[float, float]
    eps_step: float
    delta_range: tuple[float, float] | None = None
    delta_step: float | None = None

    def __post_init__(self):
        lo, hi = self.eps_range
        if not (lo < hi and self.eps_step > 0):
            raise InvalidInputError("need eps lo < hi and eps_step > 0")
        _axis(lo, hi, self.eps_step)  # validates divisibility
        if (self.delta_range is None) != (self.delta_step is None):
            raise InvalidInputError("delta_range and delta_step go together")
        if self.delta_range is not None:
            dlo, dhi = self.delta_range
            if not (dlo < dhi and self.delta_step > 0):
                raise InvalidInputError("need delta lo < hi and delta_step > 0")
            _axis(dlo, dhi, self.delta_step)

    @property
    def is_2d(self) -> bool:
        return self.delta_range is not None

    @property
    def eps_axis(self) -> np.ndarray:
        return _axis(self.eps_range[0], self.eps_range[1], self.eps_step)

    @property
    def delta_axis(self) -> np.ndarray:
        if self.delta_range is None:
            raise InvalidInputError("grid has no delta axis")
        return _axis(self.delta_range[0], self.delta_range[1], self.delta_step)


@dataclass(frozen=True)
class Profile:
    """Sampled transition probability; 2D values are indexed [delta, eps]."""

    grid: GridSpec
    values: np.ndarray
    train_id: str = ""

    def __post_init__(self):
        expected = (
            (len(self.grid.delta_axis), len(self.grid.eps_axis))
            if self.grid.is_2d
            else (len(self.grid.eps_axis),)
        )
        if self.values.shape != expected:
            raise InvalidInputError(
                f"values shape {self.values.shape} != grid shape {expected}"
            )
        if np.any(self.values < -1e-12) or np.any(self.values > 1 + 1e-12):
            raise InvalidInputError("profile values must lie in [0, 1]")


def sweep_1d(train: PulseTrain, grid: GridSpec, train_id: str = "") -> Profile:
    """Transition probability over the eps axis at zero detuning error."""
    if grid.is_2d:
        raise InvalidInputError("sweep_1d needs a 1D grid")
    values = probability_grid(
        train.rabi, train.detunings, grid.eps_axis, duration=train.duration
    )
    return Profile(grid, values, train_id)


def sweep_2d(train: PulseTrain, grid: GridSpec, train_id: str = "") -> Profile:
    """Transition probability over the (delta, eps) lattice, delta-major."""
    if not grid.is_2d:
        raise InvalidInputError("sweep_2d needs a 2D grid")
    eps = grid.eps_axis[np.newaxis, :]
    delta = grid.delta_axis[:, np.newaxis]
    values = probability_grid(
        train.rabi, train.detunings, eps, delta, duration=train.duration
    )
    return Profile(grid, values, train_id)


class BandMode(enum.Enum):
    INNER = "inner"
    OUTER = "outer"


class BandMeasurement(NamedTuple):
    """Half-width in eps plus a flag for whether the level was attained."""

    value: float
    attained: bool


def _crossing(x0, y0, x1, y1, level):
    # linear interpolation of the |x| where y crosses level between two points
    if y1 == y0:
        return abs(x1)
    t = (level - y0) / (y1 - y0)
    return abs(x0 + t * (x1 - x0))


def band_at_level(
    profile: Profile,
    level: float,
    mode: BandMode,
    target: float = 1.0,
) -> BandMeasurement:
    """Bandwidth metric of a 1D profile.

    INNER: half-width of the maximal contiguous eps interval around 0 where
    |value - target| <= level.  OUTER: smallest |eps| beyond which
    value <= level everywhere out to the grid edge.  Crossings are located
    by linear interpolation.
    """
    if profile.grid.is_2d:
        raise InvalidInputError("band_at_level needs a 1D profile")
    eps = profile.grid.eps_axis
    vals = profile.values
    edge = min(abs(eps[0]), abs(eps[-1]))
    i0 = int(np.argmin(np.abs(eps)))

    if mode is BandMode.INNER:
        dev = np.abs(vals - target)
        if dev[i0] > level:
            return BandMeasurement(0.0, False)
        right = edge
        for i in range(i0, len(eps) - 1):
            if dev[i + 1] > level:
                right = _crossing(eps[i], dev[i], eps[i + 1], dev[i + 1], level)
                break
        left = edge
        for i in range(i0, 0, -1):
            if dev[i - 1] > level:
                left = _crossing(eps[i], dev[i], eps[i - 1], dev[i - 1], level)
                break
        return BandMeasurement(min(left, right), True)

    above = np.where(vals > level)[0]
    if len(above) == 0:
        return BandMeasurement(0.0, True)
    if above[0] == 0 or above[-1] == len(eps) - 1:
        return BandMeasurement(edge, False)
    i = above[-1]
    right = _crossing(eps[i], vals[i], eps[i + 1], vals[i + 1], level)
    i = above[0]
    left = _crossing(eps[i], vals[i], eps[i - 1], vals[i - 1], level)
    return BandMeasurement(max(left, right), True)


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_profile_csv(
    profile: Profile,
    path,
    unit_scale: float = math.pi,
    extra_header: dict | None = None,
) -> None:
    """Write a profile as CSV with `# key=value` header lines.

    Detuning-axis values are emitted in pi/T units (divided by unit_scale);
    eps is dimensionless.  Numbers carry 9 significant digits so repeated
    runs are byte-identical.
    """
    lines = [f"# train={profile.train_id} unit=pi/T"]
    for k, v in (extra_header or {}).items():
        lines.append(f"# {k}={v}")
    if profile.grid.is_2d:
        lines.append("eps,delta,p")
        for i, d in enumerate(profile.grid.delta_axis):
            for j, e in enumerate(profile.grid.eps_axis):
                lines.append(
                    f"{_fmt(e)},{_fmt(d / unit_scale)},{_fmt(profile.values[i, j])}"
                )
    else:
        lines.append("eps,p")
        for e, v in zip(profile.grid.eps_axis, profile.values):
            lines.append(f"{_fmt(e)},{_fmt(v)}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
