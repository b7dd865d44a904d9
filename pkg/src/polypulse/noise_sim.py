"""Noisy two-level simulation: Lindblad dynamics, readout error, finite shots.

Models the gap between ideal excitation profiles and what a real device
measures: amplitude damping (T1), pure dephasing (from T2), a symmetric
readout assignment error, and binomial shot noise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .profile_analysis import GridSpec, Profile
from .su2 import ErrorPoint, InvalidInputError, PulseTrain, apply_error

__all__ = ["NoiseModel", "InitialState", "NumericFailureError", "evolve_noisy", "measure", "noisy_sweep_1d"]

_INTEGRATOR_RTOL = 1e-10
_INTEGRATOR_ATOL = 1e-12


class NumericFailureError(RuntimeError):
    """The master-equation integrator failed to reach the final time."""


class InitialState(enum.Enum):
    GROUND = "ground"
    EXCITED = "excited"


@dataclass(frozen=True)
class NoiseModel:
    """Relaxation/dephasing times in seconds, readout flip probability,
    shot count, and the physical duration of one unit-duration pulse."""

    t1: float
    t2: float
    readout_error: float
    shots: int = 1024
    pulse_duration: float = 100e-9

    def __post_init__(self):
        if self.t1 <= 0 or self.t2 <= 0:
            raise InvalidInputError("t1 and t2 must be positive")
        if self.t2 > 2.0 * self.t1 + 1e-12:
            raise InvalidInputError("t2 must not exceed 2*t1")
        if not 0.0 <= self.readout_error < 0.5:
            raise InvalidInputError("readout_error must be in [0, 0.5)")
        if self.shots < 1:
            raise InvalidInputError("shots must be >= 1")
        if self.pulse_duration <= 0:
            raise InvalidInputError("pulse_duration must be > 0")

    @property
    def gamma1(self) -> float:
        return 1.0 / self.t1

    @property
    def gamma_phi(self) -> float:
        """Pure dephasing rate 1/T2 - 1/(2*T1)."""
        return max(0.0, 1.0 / self.t2 - 0.5 / self.t1)


def _lindblad_rhs(omega, delta, gamma1, gamma_phi):
    """Right-hand side for the density matrix flattened as [r00, r01, r10, r11].

    Basis order is (ground, excited); H = (omega/2) sx - (delta/2) sz acts in
    rad/s, decay rates in 1/s.
    """

    def rhs(_t, y):
        r00, r01, r10, r11 = y
        # -i [H, rho]
        c = 0.5j * omega
        d00 = c * (r10 - r01)
        d01 = c * (r11 - r00) - 1j * delta * r01
        d10 = c * (r00 - r11) + 1j * delta * r10
        d11 = c * (r01 - r10)
        # amplitude damping (sigma_minus = |g><e|)
        d00 += gamma1 * r11
        d11 -= gamma1 * r11
        d01 -= 0.5 * gamma1 * r01
        d10 -= 0.5 * gamma1 * r10
        # pure dephasing
        d01 -= gamma_phi * r01
        d10 -= gamma_phi * r10
        return [d00, d01, d10, d11]

    return rhs


def evolve_noisy(
    train: PulseTrain,
    e: ErrorPoint,
    nm: NoiseModel,
    initial: InitialState = InitialState.GROUND,
) -> float:
    """Excited-state population after the train under Lindblad dynamics.

    Each pulse is a constant generator integrated with an adaptive
    Runge-Kutta method (DOP853, tolerance 1e-10); the unit-duration
    frequencies are rescaled so one unit of duration lasts
    nm.pulse_duration seconds.
    """
    rho = (
        np.array([1, 0, 0, 0], dtype=complex)
        if initial is InitialState.GROUND
        else np.array([0, 0, 0, 1], dtype=complex)
    )
    for pulse in train.pulses:
        shifted = apply_error(pulse, e)
        seconds = pulse.duration * nm.pulse_duration
        scale = pulse.duration / seconds  # rad/unit-duration -> rad/s
        rhs = _lindblad_rhs(
            shifted.rabi * scale, shifted.detuning * scale, nm.gamma1, nm.gamma_phi
        )
        sol = solve_ivp(
            rhs,
            (0.0, seconds),
            rho,
            method="DOP853",
            rtol=_INTEGRATOR_RTOL,
            atol=_INTEGRATOR_ATOL,
        )
        if not sol.success:
            raise NumericFailureError(sol.message)
        rho = sol.y[:, -1]
    return float(np.clip(rho[3].real, 0.0, 1.0))


def measure(population: float, nm: NoiseModel, rng_seed: int) -> float:
    """Apply the symmetric readout flip, then sample the shot average."""
    if not 0.0 <= population <= 1.0:
        raise InvalidInputError("population must be in [0, 1]")
    r = nm.readout_error
    q = population * (1.0 - r) + (1.0 - population) * r
    rng = np.random.default_rng(rng_seed)
    return float(rng.binomial(nm.shots, q) / nm.shots)


def noisy_sweep_1d(
    train: PulseTrain,
    grid: GridSpec,
    nm: NoiseModel,
    rng_seed: int,
    initial: InitialState = InitialState.GROUND,
    train_id: str = "",
) -> Profile:
    """Simulated measured profile over the eps axis.

    Per-point sampling seeds are derived deterministically from
    (rng_seed, grid index) so parallel evaluation cannot reorder results.
    """
    if grid.is_2d:
        raise InvalidInputError("noisy_sweep_1d needs a 1D grid")
    eps = grid.eps_axis
    values = np.empty(len(eps))
    for i, e in enumerate(eps):
        pop = evolve_noisy(train, ErrorPoint(eps=float(e)), nm, initial)
        values[i] = measure(pop, nm, _pair_seed(rng_seed, i))
    return Profile(grid, values, train_id)


def _pair_seed(rng_seed: int, index: int) -> int:
    ss = np.random.SeedSequence([int(rng_seed), int(index)])
    return int(ss.generate_state(1)[0])
