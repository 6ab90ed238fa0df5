"""Fast 2D Helmholtz scattering from radially symmetric potentials."""

from .errors import (
    ConvergenceError,
    DomainError,
    HelmradError,
    IllConditionedModeError,
    PreconditionError,
    ScaledOverflowError,
    StitchingError,
    UnsupportedPotentialError,
)
from .pbessel import ModeSolution, NormalFormQ, PotentialSpec, eval_mode, solve_mode
from .potentials import load_potential_file, named_potential
from .scatter import (
    CircularWave,
    PlaneWave,
    ScatterProblem,
    ScatterSolution,
    eval_scattered,
    eval_total,
    solve_scatter,
)

__all__ = [
    "CircularWave",
    "ConvergenceError",
    "DomainError",
    "HelmradError",
    "IllConditionedModeError",
    "ModeSolution",
    "NormalFormQ",
    "PlaneWave",
    "PotentialSpec",
    "PreconditionError",
    "ScaledOverflowError",
    "ScatterProblem",
    "ScatterSolution",
    "StitchingError",
    "UnsupportedPotentialError",
    "eval_mode",
    "eval_scattered",
    "eval_total",
    "load_potential_file",
    "named_potential",
    "solve_mode",
    "solve_scatter",
]
