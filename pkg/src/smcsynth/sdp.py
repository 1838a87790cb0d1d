"""Dense interior-point solver for small standard-form semidefinite programs.

A primal path-following barrier method with dense Newton systems: adequate
for the problem sizes produced here (tens of scalar variables, constraint
orders below ten).  Feasibility is bootstrapped by a phase-I program that
minimizes the uniform constraint shift s in G_k(x) + s I >= 0; because the
synthesis inequalities are nearly homogeneous, phase-I additionally boxes
every variable (|x_j| <= M_j, scale-aware) so the margin objective cannot
drift along feasible recession directions.

The a-posteriori check `certify` shares no state with the solver: it
re-evaluates every constraint and takes eigenvalues through the Jacobi
kernel only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import matkernel
from .defaults import (CERT_EIG_SLACK, SDP_BARRIER_MU, SDP_BOX_MULT,
                       SDP_FEAS_TARGET, SDP_FRACTION_TO_BOUNDARY, SDP_GAP_TOL,
                       SDP_INFEASIBLE_ABOVE, SDP_MAX_ITER)
from .errors import InvalidInput
from .lmi import AffineMatrixInequality, SdpProblem, Sense, evaluate, to_standard_form


class SolverStatus(Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass
class SolverOptions:
    tol: float = SDP_GAP_TOL
    max_iter: int = SDP_MAX_ITER
    feas_target: float = SDP_FEAS_TARGET
    box_mult: float = SDP_BOX_MULT
    barrier_mu: float = SDP_BARRIER_MU
    fraction_to_boundary: float = SDP_FRACTION_TO_BOUNDARY


@dataclass
class SdpSolution:
    status: SolverStatus
    x: np.ndarray
    objective_value: float | None
    min_constraint_eig: float
    iterations: int
    gap: float | None = None
    phase1_margin: float | None = None
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status in (SolverStatus.OPTIMAL, SolverStatus.FEASIBLE)


class _Cone:
    """One PSD constraint: constant C plus stacked coefficients A (p,d,d)."""

    __slots__ = ("C", "A", "d")

    def __init__(self, C, A):
        self.C = C
        self.A = A
        self.d = C.shape[0]

    def value(self, x):
        if self.A.size == 0:
            return self.C.copy()
        return self.C + np.einsum('j,jab->ab', x, self.A)


def _cones_from(p: SdpProblem) -> list:
    nvar = p.layout.total_scalars
    cones = []
    for c in p.constraints:
        if c.sense is not Sense.POSITIVE_SEMIDEFINITE:
            raise InvalidInput("problem must be in standard form (PSD senses only)")
        A = np.zeros((nvar, c.order, c.order))
        for j, M in c.coeffs.items():
            A[j] = M
        cones.append(_Cone(c.constant.copy(), A))
    return cones


def _chol(G):
    try:
        return np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        return None


def _barrier_path(c, cones, x0, opts: SolverOptions, *, gap_tol, t0=1.0,
                  inner_cap=50, stop_early=None):
    """Follow the central path of min c@x - (1/t) sum_k log det G_k(x).

    Returns (x, status, newton_iterations, gap).  `stop_early` is checked
    after every accepted step and short-circuits phase-I runs.
    """
    x = np.array(x0, dtype=float)
    p = len(c)
    nu = sum(K.d for K in cones)
    t = t0
    iters = 0
    ftb = opts.fraction_to_boundary

    def phi(xv, tv):
        tot = tv * float(c @ xv)
        for K in cones:
            L = _chol(K.value(xv))
            if L is None:
                return None
            tot -= 2.0 * float(np.sum(np.log(np.diag(L))))
        return tot

    if phi(x, t) is None:
        return x, "not_interior", 0, np.inf

    lam2 = np.inf
    while iters < opts.max_iter:
        centered = False
        for _ in range(inner_cap):
            if iters >= opts.max_iter:
                break
            Ls = [_chol(K.value(x)) for K in cones]
            if any(L is None for L in Ls):
                return x, "numerical", iters, nu / t
            grad = t * c.copy()
            H = np.zeros((p, p))
            for K, L in zip(cones, Ls):
                if K.A.size == 0:
                    continue
                Linv = np.linalg.inv(L)
                Ginv = Linv.T @ Linv
                N = np.einsum('ab,jbc->jac', Ginv, K.A)
                grad -= np.einsum('jaa->j', N)
                H += np.einsum('jab,lba->jl', N, N)
            H = 0.5 * (H + H.T)
            hmax = max(float(np.max(np.diag(H))), 1e-30)
            dscale = np.sqrt(np.maximum(np.diag(H), 1e-14 * hmax))
            Hs = H / dscale[:, None] / dscale[None, :]
            ridge = 1e-13
            while True:
                try:
                    Lh = np.linalg.cholesky(Hs + ridge * np.eye(p))
                    break
                except np.linalg.LinAlgError:
                    ridge *= 100.0
            y = np.linalg.solve(Lh.T, np.linalg.solve(Lh, -(grad / dscale)))
            delta = y / dscale
            lam2 = max(float(-grad @ delta), 0.0)
            iters += 1
            if lam2 <= 2e-9:
                centered = True
                break
            amax = 1.0
            for K, L in zip(cones, Ls):
                if K.A.size == 0:
                    continue
                dG = np.einsum('j,jab->ab', delta, K.A)
                W = np.linalg.solve(L, np.linalg.solve(L, dG).T).T
                wmin = float(np.linalg.eigvalsh(0.5 * (W + W.T))[0])
                if wmin < 0:
                    amax = min(amax, -ftb / wmin)
            alpha = min(1.0, amax)
            ph0 = phi(x, t)
            accepted = False
            while alpha > 1e-14:
                xn = x + alpha * delta
                phn = phi(xn, t)
                if phn is not None and phn <= ph0 - 0.25 * alpha * lam2:
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                break
            x = xn
            if stop_early is not None and stop_early(x):
                return x, "early", iters, nu / t
        gap = nu / t
        if gap <= gap_tol and (centered or lam2 <= 0.0625):
            return x, "optimal", iters, gap
        if t < 10.0 * nu / gap_tol:
            t *= opts.barrier_mu
    return x, "maxiter", iters, nu / t


def _phase1_cones(cones, p, box_mult):
    """Augment with the shift variable s and per-variable box cones."""
    cmax = max((float(np.max(np.abs(K.C))) for K in cones), default=1.0)
    out = []
    for K in cones:
        base = K.A if K.A.size else np.zeros((p, K.d, K.d))
        out.append(_Cone(K.C, np.concatenate([base, np.eye(K.d)[None]], axis=0)))
    for j in range(p):
        anorm = max((float(np.max(np.abs(K.A[j]))) for K in cones if K.A.size),
                    default=0.0)
        M = box_mult * (1.0 + cmax) / (anorm if anorm > 0 else 1.0)
        for sgn in (1.0, -1.0):
            A = np.zeros((p + 1, 1, 1))
            A[j, 0, 0] = sgn
            out.append(_Cone(np.array([[M]]), A))
    return out


def solve(p: SdpProblem, opts: SolverOptions | None = None) -> SdpSolution:
    """Solve a standard-form SDP; deterministic for identical inputs.

    Problems still carrying strict senses are normalized first.  Pure
    feasibility problems (zero objective) return the phase-I interior point;
    optimization problems continue with phase-II path-following.
    """
    opts = opts or SolverOptions()
    if any(c.sense is not Sense.POSITIVE_SEMIDEFINITE for c in p.constraints):
        p = to_standard_form(p)
    for c in p.constraints:
        if not np.all(np.isfinite(c.constant)) or \
                any(not np.all(np.isfinite(M)) for M in c.coeffs.values()):
            raise InvalidInput(f"constraint {c.name!r} contains non-finite data")
    if not np.all(np.isfinite(p.objective)):
        raise InvalidInput("objective contains non-finite entries")

    cones = _cones_from(p)
    c = p.objective.copy()
    nvar = p.layout.total_scalars
    x0 = np.zeros(nvar)
    total_iters = 0
    s_star = None

    minlam = min((float(np.linalg.eigvalsh(K.value(x0))[0]) for K in cones),
                 default=1.0)
    if minlam <= 1e-10:
        cones1 = _phase1_cones(cones, nvar, opts.box_mult)
        c1 = np.zeros(nvar + 1)
        c1[nvar] = 1.0
        cmax = max(float(np.max(np.abs(K.C))) for K in cones)
        s0 = -minlam + 1.0 + 1e-3 * cmax
        z0 = np.concatenate([x0, [s0]])
        target = -abs(opts.feas_target)
        xz, st, it1, _ = _barrier_path(
            c1, cones1, z0, opts, gap_tol=min(opts.tol, 1e-8),
            stop_early=lambda z: z[nvar] <= target)
        total_iters += it1
        s_star = float(xz[nvar])
        if s_star > SDP_INFEASIBLE_ABOVE and st == "optimal":
            return SdpSolution(
                SolverStatus.INFEASIBLE, xz[:nvar], None,
                certify(p, xz[:nvar]), total_iters, phase1_margin=s_star,
                message=f"phase-I optimum {s_star:.3e} exceeds "
                        f"{SDP_INFEASIBLE_ABOVE:.0e} (best attainable shift)")
        if s_star >= 0.0:
            return SdpSolution(
                SolverStatus.NUMERICAL_FAILURE, xz[:nvar], None,
                certify(p, xz[:nvar]), total_iters, phase1_margin=s_star,
                message=f"phase-I stopped at shift {s_star:.3e} ({st})")
        x0 = xz[:nvar]

    if not np.any(c):
        return SdpSolution(
            SolverStatus.FEASIBLE, x0, 0.0, certify(p, x0), total_iters,
            phase1_margin=s_star)

    budget = max(20, opts.max_iter - total_iters)
    phase2_opts = SolverOptions(**{**opts.__dict__, "max_iter": budget})
    x, st, it2, gap = _barrier_path(c, cones, x0, phase2_opts, gap_tol=opts.tol)
    total_iters += it2
    if st != "optimal":
        return SdpSolution(
            SolverStatus.NUMERICAL_FAILURE, x, float(c @ x), certify(p, x),
            total_iters, gap=gap, phase1_margin=s_star,
            message=f"phase-II ended with {st}")
    return SdpSolution(
        SolverStatus.OPTIMAL, x, float(c @ x), certify(p, x), total_iters,
        gap=gap, phase1_margin=s_star)


def certify(p: SdpProblem, x) -> float:
    """Smallest eigenvalue over all evaluated constraints, via the Jacobi kernel.

    Independent of solver internals; the trust anchor for every accepted
    solution (>= -CERT_EIG_SLACK for OPTIMAL/FEASIBLE statuses).
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (p.layout.total_scalars,):
        raise InvalidInput(
            f"decision vector has length {x.size}, "
            f"expected {p.layout.total_scalars}")
    worst = np.inf
    for c in p.constraints:
        lam = matkernel.lambda_min(evaluate(c, x))
        worst = min(worst, lam)
    return float(worst)


CERTIFY_SLACK = CERT_EIG_SLACK
