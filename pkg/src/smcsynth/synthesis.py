"""Controller synthesis and independent certification.

Turns solver output into certified designs: gain recovery K = Z X^-1,
Lyapunov certificates (P, Q), guaranteed reaching-time bounds, and the
guaranteed initial-condition sets.  `verify_*` recompute the closed-loop
analysis inequalities from scratch through the matkernel only, so a design
is never trusted on the solver's word.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import matkernel
from .errors import (InvalidInput, InvalidParameter, NumericalFailure,
                     SynthesisInfeasible)
from .defaults import STRICTNESS_MARGIN
from .lmi import assemble_uvc, assemble_vsc, to_standard_form
from .polytope import PolytopicSystem
from .sdp import SdpSolution, SolverOptions, SolverStatus, solve


class Law(Enum):
    VSC = "vsc"
    UVC = "uvc"


@dataclass
class VscDesign:
    """Relay-law design: u = K sgn(sigma), V(sigma) = sum_i p_i |sigma_i|."""

    K: np.ndarray
    P: np.ndarray          # diagonal positive definite
    Q: np.ndarray          # symmetric positive definite
    lambda_min_Q: float
    xi: float
    phi: float | None
    rho: float | None
    T_bound: float | None  # 2 * rho when rho is available
    margin: float          # max vertex analysis eigenvalue; certified iff < 0
    solver: SdpSolution | None = None

    law = Law.VSC

    def lyapunov(self, sigma) -> float:
        return float(np.sum(np.diag(self.P) * np.abs(np.asarray(sigma, float))))

    def to_dict(self) -> dict:
        return _design_dict(self, {"xi": self.xi})

    @classmethod
    def from_dict(cls, d: dict) -> "VscDesign":
        return cls(K=np.array(d["K"], float), P=np.array(d["P"], float),
                   Q=np.array(d["Q"], float),
                   lambda_min_Q=float(d["lambda_min_Q"]), xi=float(d["xi"]),
                   phi=_opt(d.get("phi")), rho=_opt(d.get("rho")),
                   T_bound=_opt(d.get("T_bound")), margin=float(d["margin"]))


@dataclass
class UvcDesign:
    """Unit-vector-law design: u = K sigma/||sigma||, U = sigma^T P sigma/||sigma||."""

    K: np.ndarray
    P: np.ndarray          # symmetric positive definite
    Q: np.ndarray
    lambda_min_Q: float
    mu: float
    phi: float | None
    rho: float | None
    T_bound: float | None  # rho when available
    margin: float
    solver: SdpSolution | None = None

    law = Law.UVC

    def lyapunov(self, sigma) -> float:
        s = np.asarray(sigma, dtype=float)
        nrm = float(np.linalg.norm(s))
        if nrm == 0.0:
            return 0.0
        return float(s @ self.P @ s) / nrm

    def to_dict(self) -> dict:
        return _design_dict(self, {"mu": self.mu})

    @classmethod
    def from_dict(cls, d: dict) -> "UvcDesign":
        return cls(K=np.array(d["K"], float), P=np.array(d["P"], float),
                   Q=np.array(d["Q"], float),
                   lambda_min_Q=float(d["lambda_min_Q"]), mu=float(d["mu"]),
                   phi=_opt(d.get("phi")), rho=_opt(d.get("rho")),
                   T_bound=_opt(d.get("T_bound")), margin=float(d["margin"]))


def _opt(v):
    return None if v is None else float(v)


def _design_dict(design, extra: dict) -> dict:
    d = {
        "law": design.law.value,
        "K": design.K.tolist(),
        "P": design.P.tolist(),
        "Q": design.Q.tolist(),
        "lambda_min_Q": design.lambda_min_Q,
        "phi": design.phi,
        "rho": design.rho,
        "T_bound": design.T_bound,
        "margin": design.margin,
    }
    d.update(extra)
    if design.solver is not None:
        d["solver"] = {
            "status": design.solver.status.value,
            "iterations": design.solver.iterations,
            "min_constraint_eig": design.solver.min_constraint_eig,
            "objective_value": design.solver.objective_value,
        }
    return d


def design_to_json(design) -> str:
    return json.dumps(design.to_dict(), indent=2)


def design_from_dict(d: dict):
    law = d.get("law")
    if law == Law.VSC.value:
        return VscDesign.from_dict(d)
    if law == Law.UVC.value:
        return UvcDesign.from_dict(d)
    raise InvalidInput(f"unknown design law {law!r}")


def _run_solver(problem, options) -> SdpSolution:
    sol = solve(to_standard_form(problem), options)
    if sol.status is SolverStatus.INFEASIBLE:
        raise SynthesisInfeasible(
            f"synthesis conditions infeasible: {sol.message}", sol)
    if not sol.ok:
        raise NumericalFailure(f"solver failed: {sol.message}", sol)
    return sol


def synth_vsc(sys: PolytopicSystem, xi: float, phi_vsc: float | None = None,
              optimize: bool = True, rho_fixed: float | None = None,
              options: SolverOptions | None = None,
              eps_strict: float = STRICTNESS_MARGIN) -> VscDesign:
    """Design a relay-law gain for the whole vertex family.

    Modes: optimize=True minimizes the reaching bound scale rho (T = 2 rho);
    rho_fixed runs the capped feasibility variant; with neither, the plain
    stability conditions are solved and no T bound is attached.
    """
    if optimize and rho_fixed is not None:
        raise InvalidParameter("choose either optimize or rho_fixed, not both")
    if (optimize or rho_fixed is not None) and phi_vsc is None:
        raise InvalidParameter("phi_vsc is required when bounding the reaching time")
    problem = assemble_vsc(sys, xi, optimize, phi_vsc if phi_vsc else 1.0,
                           rho_fixed=rho_fixed, eps_strict=eps_strict)
    sol = _run_solver(problem, options)
    v = problem.layout.unpack(sol.x)
    W, X, R = v["W"], v["X"], v["R"]
    xd = np.diag(X)
    if np.any(np.abs(xd) < 1e-14):
        raise NumericalFailure("scaling matrix X is numerically singular", sol)
    Xinv = np.diag(1.0 / xd)
    K = v["Z"] @ Xinv
    P = Xinv @ W @ Xinv
    Q = Xinv @ R @ Xinv
    rho = float(v["rho"]) if optimize else rho_fixed
    design = VscDesign(
        K=K, P=P, Q=0.5 * (Q + Q.T),
        lambda_min_Q=matkernel.lambda_min(Q),
        xi=xi, phi=phi_vsc if (optimize or rho_fixed is not None) else None,
        rho=rho, T_bound=2.0 * rho if rho is not None else None,
        margin=0.0, solver=sol)
    design.margin = verify_vsc(design, sys)
    if design.margin >= 0.0:
        raise NumericalFailure(
            f"recovered design failed independent verification "
            f"(margin {design.margin:.3e})", sol)
    return design


def synth_uvc(sys: PolytopicSystem, mu: float, phi_uvc: float | None = None,
              optimize: bool = True, rho_fixed: float | None = None,
              options: SolverOptions | None = None,
              eps_strict: float = STRICTNESS_MARGIN) -> UvcDesign:
    """Design a unit-vector-law gain; T = rho when rho is optimized or fixed."""
    if optimize and rho_fixed is not None:
        raise InvalidParameter("choose either optimize or rho_fixed, not both")
    if (optimize or rho_fixed is not None) and phi_uvc is None:
        raise InvalidParameter("phi_uvc is required when bounding the reaching time")
    problem = assemble_uvc(sys, mu, optimize, phi_uvc if phi_uvc else 1.0,
                           rho_fixed=rho_fixed, eps_strict=eps_strict)
    sol = _run_solver(problem, options)
    v = problem.layout.unpack(sol.x)
    X, R = v["X"], v["R"]
    P = matkernel.spd_inverse(X)
    K = v["Z"] @ P
    Q = P @ R @ P
    rho = float(v["rho"]) if optimize else rho_fixed
    design = UvcDesign(
        K=K, P=0.5 * (P + P.T), Q=0.5 * (Q + Q.T),
        lambda_min_Q=matkernel.lambda_min(Q),
        mu=mu, phi=phi_uvc if (optimize or rho_fixed is not None) else None,
        rho=rho, T_bound=float(rho) if rho is not None else None,
        margin=0.0, solver=sol)
    design.margin = verify_uvc(design, sys)
    if design.margin >= 0.0:
        raise NumericalFailure(
            f"recovered design failed independent verification "
            f"(margin {design.margin:.3e})", sol)
    return design


def certify_fixed_gain_vsc(sys: PolytopicSystem, K, xi: float,
                           options: SolverOptions | None = None,
                           eps_strict: float = STRICTNESS_MARGIN) -> VscDesign:
    """Find certificates (P, Q) for an externally supplied relay gain.

    Re-solves the synthesis conditions with Z eliminated by Z = K X, which
    keeps them linear in the remaining (W, X, R).
    """
    K = np.asarray(K, dtype=float)
    problem = assemble_vsc(sys, xi, False, 1.0, gain_fixed=K,
                           eps_strict=eps_strict)
    sol = _run_solver(problem, options)
    v = problem.layout.unpack(sol.x)
    xd = np.diag(v["X"])
    Xinv = np.diag(1.0 / xd)
    P = Xinv @ v["W"] @ Xinv
    Q = Xinv @ v["R"] @ Xinv
    design = VscDesign(K=K, P=P, Q=0.5 * (Q + Q.T),
                       lambda_min_Q=matkernel.lambda_min(Q), xi=xi, phi=None,
                       rho=None, T_bound=None, margin=0.0, solver=sol)
    design.margin = verify_vsc(design, sys)
    if design.margin >= 0.0:
        raise NumericalFailure(
            f"fixed gain could not be certified (margin {design.margin:.3e})", sol)
    return design


def certify_fixed_gain_uvc(sys: PolytopicSystem, K, mu: float,
                           options: SolverOptions | None = None,
                           eps_strict: float = STRICTNESS_MARGIN) -> UvcDesign:
    """Find certificates (P, Q) for an externally supplied unit-vector gain."""
    K = np.asarray(K, dtype=float)
    problem = assemble_uvc(sys, mu, False, 1.0, gain_fixed=K,
                           eps_strict=eps_strict)
    sol = _run_solver(problem, options)
    v = problem.layout.unpack(sol.x)
    P = matkernel.spd_inverse(v["X"])
    Q = P @ v["R"] @ P
    design = UvcDesign(K=K, P=0.5 * (P + P.T), Q=0.5 * (Q + Q.T),
                       lambda_min_Q=matkernel.lambda_min(Q), mu=mu, phi=None,
                       rho=None, T_bound=None, margin=0.0, solver=sol)
    design.margin = verify_uvc(design, sys)
    if design.margin >= 0.0:
        raise NumericalFailure(
            f"fixed gain could not be certified (margin {design.margin:.3e})", sol)
    return design


def verify_vsc(design: VscDesign, sys: PolytopicSystem) -> float:
    """Max over vertices of lambda_max(P B_i K + (P B_i K)^T + Q); < 0 certifies.

    Uses the matkernel only; no solver state enters.
    """
    _check_dims(design, sys)
    worst = -np.inf
    for B in sys.vertices:
        PBK = design.P @ B @ design.K
        worst = max(worst, matkernel.lambda_max(PBK + PBK.T + design.Q))
    return float(worst)


def verify_uvc(design: UvcDesign, sys: PolytopicSystem) -> float:
    """Max over vertices of lambda_max of the unit-vector analysis matrix.

    The matrix is (1/mu) K^T B^T B K + (mu/4) P^2 + P B K + K^T B^T P + Q;
    negative definiteness certifies the design at the synthesis mu.
    """
    _check_dims(design, sys)
    mu = design.mu
    worst = -np.inf
    for B in sys.vertices:
        BK = B @ design.K
        M = (BK.T @ BK) / mu + (mu / 4.0) * design.P @ design.P \
            + design.P @ BK + BK.T @ design.P + design.Q
        worst = max(worst, matkernel.lambda_max(M))
    return float(worst)


def _check_dims(design, sys):
    n, m = sys.n, sys.m
    if design.K.shape != (m, n):
        raise InvalidInput(f"gain shape {design.K.shape} does not match "
                           f"system ({m}, {n})")
    if design.P.shape != (n, n) or design.Q.shape != (n, n):
        raise InvalidInput("certificate shapes do not match the system")


def reaching_bound_vsc(design: VscDesign, sigma0) -> float:
    """Guaranteed reaching time 2 V(sigma0) / lambda_min(Q)."""
    return 2.0 * design.lyapunov(sigma0) / design.lambda_min_Q


def reaching_bound_uvc(design: UvcDesign, sigma0) -> float:
    """Guaranteed reaching time U(sigma0) / lambda_min(Q); sigma0 must be nonzero."""
    s = np.asarray(sigma0, dtype=float)
    if float(np.linalg.norm(s)) == 0.0:
        raise InvalidInput("reaching bound is undefined at sigma0 = 0 "
                           "(the surface is already reached)")
    return design.lyapunov(s) / design.lambda_min_Q


def in_omega_vsc(design: VscDesign, sigma) -> bool:
    """Membership in the guaranteed set {V(sigma) <= 1} (closed)."""
    return design.lyapunov(sigma) <= 1.0


def in_omega_uvc(design: UvcDesign, sigma) -> bool:
    """Membership in {U(sigma) <= 1}; the origin belongs by continuity."""
    return design.lyapunov(sigma) <= 1.0


def in_omega(design, sigma) -> bool:
    return design.lyapunov(sigma) <= 1.0


def reaching_bound(design, sigma0) -> float:
    if design.law is Law.VSC:
        return reaching_bound_vsc(design, sigma0)
    return reaching_bound_uvc(design, sigma0)


@dataclass
class SweepPoint:
    param: float
    T_bound: float | None
    status: str
    design: object | None = None


def sweep(sys: PolytopicSystem, law: Law, grid, phi: float,
          options: SolverOptions | None = None, jobs: int = 1) -> list:
    """Minimize the reaching bound at every grid value of xi (VSC) or mu (UVC).

    Infeasible or failed points are recorded with their status rather than
    dropped.  Grid points are independent; `jobs` > 1 fans them out to a
    thread pool and results are reported in grid order.
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise InvalidInput("grid must be nonempty")
    if any(g <= 0 for g in grid):
        raise InvalidInput("grid values must be positive")

    def solve_one(g):
        try:
            if law is Law.VSC:
                d = synth_vsc(sys, g, phi, optimize=True, options=options)
            else:
                d = synth_uvc(sys, g, phi, optimize=True, options=options)
            return SweepPoint(g, d.T_bound, "ok", d)
        except SynthesisInfeasible:
            return SweepPoint(g, None, "infeasible", None)
        except NumericalFailure:
            return SweepPoint(g, None, "numerical_failure", None)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(solve_one, grid))
    return [solve_one(g) for g in grid]
