"""Robust multivariable sliding-mode controller synthesis for polytopic systems.

The package assembles the matrix-inequality design conditions for the relay
(VSC) and unit-vector (UVC) laws, solves the resulting semidefinite
programs, recovers and independently certifies controller gains with
guaranteed finite reaching-time bounds, and validates designs by simulating
the discontinuous closed loops.
"""

from .errors import (InvalidInput, InvalidParameter, InvalidSimplexPoint,
                     NotPositiveDefinite, NumericalFailure, SimulationDiverged,
                     SmcSynthError, SynthesisInfeasible)
from .lmi import (AffineMatrixInequality, SdpProblem, Sense, VariableLayout,
                  assemble_uvc, assemble_vsc, dump_problem, evaluate,
                  to_standard_form)
from .matkernel import (SymMatrix, congruence, is_positive_definite,
                        lambda_max, lambda_min, solve_spd, sym_eigenvalues)
from .polytope import (PolytopicSystem, SimplexPoint, combine, rov_polytope,
                       sample_simplex, visual_servo_polytope)
from .sdp import SdpSolution, SolverOptions, SolverStatus, certify, solve
from .sim import (EmpiricalReport, SimConfig, SimTrace, empirical_vs_bound,
                  rhs_uvc, rhs_vsc, sample_omega, simulate)
from .synthesis import (Law, SweepPoint, UvcDesign, VscDesign,
                        certify_fixed_gain_uvc, certify_fixed_gain_vsc,
                        design_from_dict, design_to_json, in_omega,
                        in_omega_uvc, in_omega_vsc, reaching_bound,
                        reaching_bound_uvc, reaching_bound_vsc, sweep,
                        synth_uvc, synth_vsc, verify_uvc, verify_vsc)

__version__ = "0.1.0"

__all__ = [
    "AffineMatrixInequality", "EmpiricalReport", "InvalidInput",
    "InvalidParameter", "InvalidSimplexPoint", "Law", "NotPositiveDefinite",
    "NumericalFailure", "PolytopicSystem", "SdpProblem", "SdpSolution",
    "Sense", "SimConfig", "SimTrace", "SimplexPoint", "SimulationDiverged",
    "SmcSynthError", "SolverOptions", "SolverStatus", "SweepPoint",
    "SymMatrix", "SynthesisInfeasible", "UvcDesign", "VariableLayout",
    "VscDesign", "assemble_uvc", "assemble_vsc", "certify",
    "certify_fixed_gain_uvc", "certify_fixed_gain_vsc", "combine",
    "congruence", "design_from_dict", "design_to_json", "dump_problem",
    "empirical_vs_bound", "evaluate", "in_omega", "in_omega_uvc",
    "in_omega_vsc", "is_positive_definite", "lambda_max", "lambda_min",
    "reaching_bound", "reaching_bound_uvc", "reaching_bound_vsc",
    "rhs_uvc", "rhs_vsc", "rov_polytope", "sample_omega", "sample_simplex",
    "simulate", "solve", "solve_spd", "sweep", "sym_eigenvalues",
    "synth_uvc", "synth_vsc", "to_standard_form", "verify_uvc", "verify_vsc",
    "visual_servo_polytope",
]
