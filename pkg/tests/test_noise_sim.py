"""Tests for the Lindblad noisy-qubit simulator."""

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from polypulse import (
    ErrorPoint,
    GridSpec,
    InitialState,
    NoiseModel,
    PulseTrain,
    evolve_noisy,
    measure,
    noisy_sweep_1d,
    transition_probability,
)
from polypulse.noise_sim import _lindblad_rhs
from polypulse.su2 import InvalidInputError

PI = math.pi

IBM_NOISE = dict(t1=195.52e-6, t2=232.57e-6, readout_error=0.0347)


def quiet_model(**kw):
    base = dict(t1=1e6, t2=1e6, readout_error=0.0)
    base.update(kw)
    return NoiseModel(**base)


def test_model_invariants():
    NoiseModel(**IBM_NOISE)
    with pytest.raises(InvalidInputError):
        NoiseModel(t1=1e-4, t2=3e-4, readout_error=0.0)  # t2 > 2 t1
    with pytest.raises(InvalidInputError):
        NoiseModel(t1=-1.0, t2=1.0, readout_error=0.0)
    with pytest.raises(InvalidInputError):
        NoiseModel(t1=1e-4, t2=1e-4, readout_error=0.6)
    with pytest.raises(InvalidInputError):
        NoiseModel(t1=1e-4, t2=1e-4, readout_error=0.1, shots=0)


def test_dephasing_rate():
    nm = NoiseModel(**IBM_NOISE)
    assert nm.gamma_phi == pytest.approx(1 / nm.t2 - 0.5 / nm.t1)
    assert quiet_model(t1=1e-4, t2=2e-4).gamma_phi == 0.0


def test_noiseless_limit_matches_unitary_dynamics():
    rng = np.random.default_rng(9)
    nm = quiet_model()
    for _ in range(50):
        n = int(rng.integers(1, 6))
        train = PulseTrain.from_detunings(
            float(rng.uniform(0.1, 2 * PI)), rng.uniform(-2 * PI, 2 * PI, n)
        )
        e = ErrorPoint(float(rng.uniform(-0.5, 0.5)))
        assert evolve_noisy(train, e, nm) == pytest.approx(
            transition_probability(train, e), abs=1e-6
        )


def test_pure_amplitude_decay():
    # no drive, start excited: population decays as exp(-t / T1)
    nm = NoiseModel(t1=1e-5, t2=2e-5, readout_error=0.0, pulse_duration=1e-5)
    train = PulseTrain.from_detunings(0.0, [0.0])
    p = evolve_noisy(train, ErrorPoint(), nm, initial=InitialState.EXCITED)
    assert p == pytest.approx(math.exp(-1.0), abs=1e-8)


def test_trace_preserved_through_integration():
    nm = NoiseModel(**IBM_NOISE)
    scale = 1.0 / nm.pulse_duration
    rhs = _lindblad_rhs(0.64 * PI * scale, 0.72 * PI * scale, nm.gamma1, nm.gamma_phi)
    rho0 = np.array([1, 0, 0, 0], dtype=complex)
    sol = solve_ivp(
        rhs, (0.0, nm.pulse_duration), rho0, method="DOP853", rtol=1e-10, atol=1e-12,
        dense_output=True,
    )
    assert sol.success
    for t in np.linspace(0.0, nm.pulse_duration, 40):
        rho = sol.sol(t)
        trace = rho[0].real + rho[3].real
        assert abs(trace - 1.0) < 1e-9
        assert -1e-9 <= rho[3].real <= 1 + 1e-9


def test_measure_readout_flip_and_shot_noise():
    nm = NoiseModel(t1=1e-4, t2=1e-4, readout_error=0.1, shots=200_000)
    # population 1 reads out at 1 - r on average; 3 sigma binomial bound
    q = 0.9
    sigma = math.sqrt(q * (1 - q) / nm.shots)
    got = measure(1.0, nm, rng_seed=13)
    assert abs(got - q) < 3 * sigma
    with pytest.raises(InvalidInputError):
        measure(1.2, nm, rng_seed=0)


def test_noisy_sweep_deterministic_and_seed_sensitive():
    nm = NoiseModel(**IBM_NOISE, shots=256)
    train = PulseTrain.from_detunings(0.6397 * PI, [0.72 * PI, 0.0, -0.72 * PI])
    grid = GridSpec((-0.4, 0.4), 0.2)
    a = noisy_sweep_1d(train, grid, nm, rng_seed=4)
    b = noisy_sweep_1d(train, grid, nm, rng_seed=4)
    c = noisy_sweep_1d(train, grid, nm, rng_seed=5)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_noise_depresses_peak():
    nm = NoiseModel(**IBM_NOISE)
    train = PulseTrain.from_detunings(0.6397 * PI, [0.72 * PI, 0.0, -0.72 * PI])
    pop = evolve_noisy(train, ErrorPoint(), nm)
    # decoherence alone only removes a tiny fraction over 300 ns
    assert 0.99 < pop < 1.0
    r = nm.readout_error
    q = pop * (1 - r) + (1 - pop) * r
    assert 0.94 < q < 0.98
