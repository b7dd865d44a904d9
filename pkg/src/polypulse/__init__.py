"""polypulse: synthesis and analysis of polychromatic pulse trains.

Detuning-controlled composite pulse sequences: exact SU(2) dynamics,
derivative- and cost-function-based sequence synthesis, excitation-profile
analysis, and a noisy-qubit simulator.
"""

from .su2 import (
    ErrorPoint,
    InvalidInputError,
    Propagator,
    Pulse,
    PulseTrain,
    Symmetry,
    apply_error,
    probability_derivative,
    probability_grid,
    pulse_propagator,
    train_propagator,
    transition_probability,
)
from .deriv_solver import DerivProblem, DerivSolution, build_residuals, solve
from .cost_synthesis import (
    ProfileClass,
    SynthesisProblem,
    SynthesisResult,
    cost_2d,
    cost_bb,
    cost_nb,
    cost_pb,
    minimize,
    validate,
)
from .profile_analysis import (
    BandMeasurement,
    BandMode,
    GridSpec,
    Profile,
    band_at_level,
    sweep_1d,
    sweep_2d,
    write_profile_csv,
)
from .noise_sim import InitialState, NoiseModel, evolve_noisy, measure, noisy_sweep_1d
from .catalog import (
    CatalogEntry,
    CatalogError,
    load_catalog,
    revalidate,
    save_catalog,
)

__version__ = "0.1.0"
