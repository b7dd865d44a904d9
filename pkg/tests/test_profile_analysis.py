"""Tests for profile sweeps, band metrics, and CSV export."""

import math

import numpy as np
import pytest

from polypulse import (
    BandMode,
    GridSpec,
    Profile,
    PulseTrain,
    band_at_level,
    sweep_1d,
    sweep_2d,
    write_profile_csv,
)
from polypulse.su2 import InvalidInputError

PI = math.pi


def test_pi_pulse_closed_form():
    t = PulseTrain.from_detunings(PI, [0.0])
    grid = GridSpec((-1.0, 1.0), 0.01)
    prof = sweep_1d(t, grid)
    expected = np.cos(0.5 * PI * grid.eps_axis) ** 2
    assert np.max(np.abs(prof.values - expected)) < 1e-12


def test_grid_divisibility_enforced():
    with pytest.raises(InvalidInputError):
        GridSpec((-1.0, 1.0), 0.3)
    with pytest.raises(InvalidInputError):
        GridSpec((1.0, -1.0), 0.1)
    with pytest.raises(InvalidInputError):
        GridSpec((-1.0, 1.0), 0.1, delta_range=(-1.0, 1.0))  # missing delta_step


def test_sweep_1d_equals_zero_delta_row_of_sweep_2d():
    t = PulseTrain.from_detunings(0.675 * PI, [-0.9267 * PI, 0.0227 * PI, -0.0227 * PI, 0.9267 * PI])
    g1 = GridSpec((-1.0, 1.0), 0.05)
    g2 = GridSpec((-1.0, 1.0), 0.05, (-1.0, 1.0), 0.25)
    p1 = sweep_1d(t, g1)
    p2 = sweep_2d(t, g2)
    row = int(np.argmin(np.abs(g2.delta_axis)))
    assert np.allclose(p2.values[row], p1.values, atol=1e-13)


def test_profile_shape_checked():
    grid = GridSpec((-1.0, 1.0), 0.5)
    with pytest.raises(InvalidInputError):
        Profile(grid, np.zeros(4))  # axis has 5 points
    with pytest.raises(InvalidInputError):
        Profile(grid, np.full(5, 1.5))  # out of [0, 1]


def test_inner_band_linear_interpolation():
    # triangular deviation: dev = |eps|, so the level-0.25 inner band is 0.25
    grid = GridSpec((-1.0, 1.0), 0.1)
    vals = 1.0 - np.abs(grid.eps_axis)
    prof = Profile(grid, vals)
    m = band_at_level(prof, 0.25, BandMode.INNER, target=1.0)
    assert m.attained
    assert m.value == pytest.approx(0.25, abs=1e-12)


def test_outer_band_linear_interpolation():
    # values = |eps| fall below 0.25 inside |eps| < 0.25; outer band is 1.0
    # minus nothing: p > level near the edges, so the metric is not attained
    grid = GridSpec((-1.0, 1.0), 0.1)
    prof = Profile(grid, np.abs(grid.eps_axis))
    m = band_at_level(prof, 0.25, BandMode.OUTER)
    assert not m.attained
    # a peaked profile: p = max(0, 1 - 4|eps|) crosses 0.25 at |eps| = 0.1875
    prof = Profile(grid, np.maximum(0.0, 1.0 - 4 * np.abs(grid.eps_axis)))
    m = band_at_level(prof, 0.25, BandMode.OUTER)
    assert m.attained
    assert m.value == pytest.approx(0.1875, abs=1e-12)


def test_inner_band_not_attained_off_target_center():
    grid = GridSpec((-1.0, 1.0), 0.1)
    prof = Profile(grid, np.full(21, 0.4))
    m = band_at_level(prof, 0.1, BandMode.INNER, target=1.0)
    assert not m.attained
    assert m.value == 0.0


def test_bands_grow_with_train_length(builtin_entries):
    by_id = {e.id: e for e in builtin_entries}
    widths = []
    for id_ in ("BB-X3-deriv", "BB-X5-deriv", "BB-X11-deriv"):
        t = by_id[id_].train
        prof = sweep_1d(t, GridSpec((-1.0, 1.0), 1e-3))
        m = band_at_level(prof, 1e-4, BandMode.INNER, target=1.0)
        assert m.attained
        widths.append(m.value)
    assert widths[0] < widths[1] < widths[2]


def test_csv_round_trip_and_determinism(tmp_path):
    t = PulseTrain.from_detunings(PI, [0.0])
    prof = sweep_1d(t, GridSpec((-1.0, 1.0), 0.25), train_id="demo")
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_profile_csv(prof, p1)
    write_profile_csv(prof, p2)
    assert p1.read_bytes() == p2.read_bytes()
    lines = p1.read_text().splitlines()
    assert lines[0] == "# train=demo unit=pi/T"
    assert lines[1] == "eps,p"
    eps, p = lines[2].split(",")
    assert float(eps) == -1.0
    assert float(p) == pytest.approx(0.0, abs=1e-12)


def test_csv_2d_layout(tmp_path):
    t = PulseTrain.from_detunings(PI, [0.0])
    prof = sweep_2d(t, GridSpec((-1.0, 1.0), 1.0, (-PI, PI), PI))
    path = tmp_path / "c.csv"
    write_profile_csv(prof, path)
    lines = path.read_text().splitlines()
    assert lines[1] == "eps,delta,p"
    # delta written in pi/T units
    assert lines[2].split(",")[1] == "-1"
    assert len(lines) == 2 + 3 * 3
