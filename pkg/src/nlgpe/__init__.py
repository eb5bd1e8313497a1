"""Exact and numerical solutions of a 1D nonlocal Gross-Pitaevskii equation
with quadratic Hamiltonian and quadratic interaction kernel."""
from .errors import (ConfigError, EdgeLeak, NlgpeError, NonOscillatoryRegime, OverflowRisk,
                     SingularFit, Unstable)
from .model import EffectiveParams, QuadraticModel, derive_effective
from .grid import Grid, WaveFunction, make_grid
from .moments import (MomentState, ParamSet, fit_constants, hes_analytic_1d, hes_rhs,
                      integrate_hes_numeric, moments_from_wavefunction)
from .closedform import (cauchy_matrix, exact_psi_nu, fock_state, ground_state, ladder_frame,
                         phase_rate)
from .symmetry import (displaced_solution, intertwiner_apply, ladder_symmetry_apply)
from .evolve import EvolutionConfig, compare_moments, residual, split_step_evolve

__all__ = [
    "ConfigError", "EdgeLeak", "NlgpeError", "NonOscillatoryRegime", "OverflowRisk",
    "SingularFit", "Unstable", "EffectiveParams", "QuadraticModel", "derive_effective",
    "Grid", "WaveFunction", "make_grid", "MomentState", "ParamSet", "fit_constants",
    "hes_analytic_1d", "hes_rhs", "integrate_hes_numeric", "moments_from_wavefunction",
    "cauchy_matrix", "exact_psi_nu", "fock_state", "ground_state", "ladder_frame", "phase_rate",
    "displaced_solution", "intertwiner_apply", "ladder_symmetry_apply", "EvolutionConfig",
    "compare_moments", "residual", "split_step_evolve",
]

__version__ = "0.1.0"
