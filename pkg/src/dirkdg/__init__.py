"""DIRK discontinuous Galerkin schemes for 1D conservation laws.

Implicit stages are solved by Jacobian-free Newton-Krylov with space limiters
frozen on a first-order implicit predictor; ``dirkdg.fourier`` holds the
dissipation/dispersion analysis of the fully discrete linear scheme.
"""

from .basis import DGState, Grid1D, LegendreBasis, eval_dg, eval_legendre, project
from .config import ConfigError, RunConfig
from .driver import (ConvergenceReport, SimulationError, SimulationResult, run_analysis,
                     run_convergence, run_simulation, simulate)
from .fourier import analyze, build_M, build_symbol, stability_scan
from .kernels import BACKEND
from .problems import ProblemSpec, make_problem
from .stepping import StepReport, dirk_dg_step, explicit_step
from .tableaux import SCHEMES, ButcherTableau, make_dirk22, make_dirk33, make_dirk43, scheme

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ButcherTableau", "ConfigError", "ConvergenceReport", "DGState", "Grid1D",
    "LegendreBasis", "ProblemSpec", "RunConfig", "SCHEMES", "SimulationError",
    "SimulationResult", "StepReport", "analyze", "build_M", "build_symbol", "dirk_dg_step",
    "eval_dg", "eval_legendre", "explicit_step", "make_dirk22", "make_dirk33", "make_dirk43",
    "make_problem", "project", "run_analysis", "run_convergence", "run_simulation", "scheme",
    "simulate", "stability_scan",
]
