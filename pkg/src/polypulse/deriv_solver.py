"""Derivative-based broadband synthesis.

Solves the algebraic system

    P(0) = target,  d^k P / d eps^k |_0 = 0  (k = 1..n)

for the shared Rabi frequency and the n free detunings of an antisymmetric
train of length N = 2n + 1, by multistart Levenberg-Marquardt root finding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .su2 import (
    InvalidInputError,
    PulseTrain,
    Symmetry,
    _STENCILS,
    probability_grid,
)

__all__ = ["DerivProblem", "DerivSolution", "build_residuals", "solve"]

# Multistart sampling box, rad per unit duration.
RABI_MAX = 2.0 * np.pi
DETUNING_MAX = 2.0 * np.pi

# Base finite-difference step for the residual derivatives.  1e-3 leaves a
# round-off floor near 1e-9 on the second derivative, which is above the
# default residual tolerance; 1e-2 puts the floor below 1e-11.
RESIDUAL_FD_STEP = 1e-2

# Roots re-found from different starts agree only to the LM convergence
# radius, so duplicates are merged with a fairly loose metric.
_DEDUP_DISTANCE = 1e-4


@dataclass(frozen=True)
class DerivProblem:
    """Target probability and number of free detunings (N = 2*n_free + 1)."""

    target_p: float
    n_free: int
    tolerance: float = 1e-10

    def __post_init__(self):
        if not 0.0 < self.target_p <= 1.0:
            raise InvalidInputError(f"target_p must be in (0, 1], got {self.target_p}")
        if self.n_free < 1:
            raise InvalidInputError(f"n_free must be >= 1, got {self.n_free}")

    @property
    def length(self) -> int:
        return 2 * self.n_free + 1


@dataclass(frozen=True)
class DerivSolution:
    rabi: float
    detunings: tuple[float, ...]  # free detunings d_1..d_n
    residuals: tuple[float, ...]
    total_area: float

    def train(self, duration: float = 1.0) -> PulseTrain:
        return PulseTrain.from_detunings(
            self.rabi,
            antisymmetric_detunings(self.detunings),
            duration=duration,
            symmetry=Symmetry.ANTISYMMETRIC,
        )


def antisymmetric_detunings(free) -> list[float]:
    """Expand free detunings d_1..d_n to {d_1..d_n, 0, -d_n..-d_1}."""
    free = [float(d) for d in free]
    return free + [0.0] + [-d for d in reversed(free)]


_RICHARDSON_LEVELS = 3


def _stencil_plan(n_free: int, step: float):
    """Shared evaluation points and per-order stencil bookkeeping so one
    vectorized profile call covers every finite-difference sample."""
    xs = [0.0]
    index = {0.0: 0}
    plan = []
    for k in range(1, n_free + 1):
        base = step * (2.0 if k >= 3 else 1.0)
        offsets, coeffs = _STENCILS[k]
        rows = []
        for i in range(_RICHARDSON_LEVELS):
            h = base / 2**i
            idxs = []
            for o in offsets:
                x = o * h
                if x not in index:
                    index[x] = len(xs)
                    xs.append(x)
                idxs.append(index[x])
            rows.append((idxs, coeffs, h))
        plan.append(rows)
    return np.array(xs), plan


def build_residuals(
    rabi: float,
    detunings,
    prob: DerivProblem,
    step: float = RESIDUAL_FD_STEP,
) -> np.ndarray:
    """Residual vector [P(0) - target, P'(0), ..., P^(n)(0)].

    The train is the antisymmetric expansion of the free detunings; the
    derivatives are central finite differences with Richardson extrapolation.
    """
    dets = antisymmetric_detunings(detunings)
    xs, plan = _stencil_plan(prob.n_free, step)
    vals = probability_grid(rabi, dets, xs)
    res = [float(vals[0]) - prob.target_p]
    for k, rows in enumerate(plan, start=1):
        est = []
        for idxs, coeffs, h in rows:
            acc = 0.0
            for c, j in zip(coeffs, idxs):
                acc += c * vals[j]
            est.append(acc / h**k)
        for m in range(1, _RICHARDSON_LEVELS):
            fac = 4.0**m
            est = [
                (fac * est[i + 1] - est[i]) / (fac - 1.0) for i in range(len(est) - 1)
            ]
        res.append(float(est[0]))
    return np.array(res)


def _canonicalize(params: np.ndarray) -> np.ndarray:
    """Flip the global detuning sign so the first free detuning is >= 0."""
    out = params.copy()
    if out[1] < 0:
        out[1:] = -out[1:]
    return out


def solve(
    prob: DerivProblem,
    seeds: int = 200,
    rng_seed: int = 0,
    step: float = RESIDUAL_FD_STEP,
) -> list[DerivSolution]:
    """Multistart root finding; returns deduplicated solutions by total area.

    Starting points are sampled uniformly with rabi in (0, 2*pi] and each
    free detuning in [-2*pi, 2*pi].  Runs that do not converge to the
    problem tolerance are discarded; an empty list means no root was found.
    Deterministic for a fixed rng_seed.
    """
    if seeds < 1:
        raise InvalidInputError(f"seeds must be >= 1, got {seeds}")
    rng = np.random.default_rng(rng_seed)

    def residual_vec(x: np.ndarray) -> np.ndarray:
        return build_residuals(x[0], x[1:], prob, step=step)

    accepted: list[np.ndarray] = []
    for _ in range(seeds):
        x0 = np.concatenate(
            [
                rng.uniform(1e-3, RABI_MAX, 1),
                rng.uniform(-DETUNING_MAX, DETUNING_MAX, prob.n_free),
            ]
        )
        try:
            fit = least_squares(
                residual_vec,
                x0,
                method="lm",
                max_nfev=4000,
                # defaults stall around 1e-9; the FD residual floor is ~5e-12
                xtol=1e-15,
                ftol=1e-15,
                gtol=1e-15,
            )
        except (ValueError, FloatingPointError):
            continue
        x = fit.x
        if not np.all(np.isfinite(x)):
            continue
        if x[0] <= 0 or x[0] > RABI_MAX:
            continue
        if np.max(np.abs(x[1:])) > DETUNING_MAX:
            continue
        if np.max(np.abs(residual_vec(x))) > prob.tolerance:
            continue
        x = _canonicalize(x)
        if any(np.linalg.norm(x - y) < _DEDUP_DISTANCE for y in accepted):
            continue
        accepted.append(x)

    solutions = []
    for x in accepted:
        res = build_residuals(x[0], x[1:], prob, step=step)
        solutions.append(
            DerivSolution(
                rabi=float(x[0]),
                detunings=tuple(float(d) for d in x[1:]),
                residuals=tuple(float(r) for r in res),
                total_area=float(prob.length * x[0]),
            )
        )
    solutions.sort(key=lambda s: (s.total_area, s.rabi, s.detunings))
    return solutions
