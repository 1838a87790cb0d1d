"""Closed-loop simulation of the discontinuous laws and bound validation.

The relay loop sigma' = B K sgn(sigma) and the unit-vector loop
sigma' = B K sigma/||sigma|| are integrated with fixed-step RK4 on a
boundary-layer regularization of the discontinuity.  The layer width used
inside the integrator is max(reg_eps, dt * ||B K||_2): the second term is a
CFL-style stability floor.  Without it, RK4 composed with a relay has open
sets of exact spurious equilibria at distance up to dt*||B K||/2 from the
switching surface (the four stage signs cancel), which parks trajectories
above any reach tolerance tighter than that; widening the layer to the
stability floor keeps the in-layer linear dynamics inside the RK4 stability
region, so trajectories settle to the true equilibrium at the origin.  The
public right-hand-side helpers apply the caller's reg_eps verbatim.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .defaults import (SIM_DT, SIM_HORIZON_OVER_BOUND, SIM_LAYER_CFL,
                       SIM_REACH_TOL, SIM_REG_EPS)
from .errors import InvalidInput, SimulationDiverged
from .polytope import PolytopicSystem, SimplexPoint, combine
from .synthesis import Law, in_omega, reaching_bound


@dataclass
class SimConfig:
    dt: float = SIM_DT
    horizon: float | None = None     # seconds; defaults to 4 * T_bound downstream
    reg_eps: float = SIM_REG_EPS
    reach_tol: float = SIM_REACH_TOL
    seed: int = 0

    def validate(self):
        if self.dt <= 0:
            raise InvalidInput("dt must be positive")
        if self.reg_eps <= 0:
            raise InvalidInput("reg_eps must be positive")
        if self.reach_tol <= 0:
            raise InvalidInput("reach_tol must be positive")
        if self.horizon is not None and self.horizon < self.dt:
            raise InvalidInput("horizon must be at least one step")


@dataclass
class SimTrace:
    """Sampled closed-loop trajectory with reach-detection results."""

    law: Law
    times: np.ndarray
    states: np.ndarray            # (steps+1, n)
    inputs: np.ndarray            # (steps+1, m)
    lyapunov: np.ndarray          # (steps+1,)
    reach_time: float | None
    reach_time_per_state: list | None   # per coordinate (relay law only)
    reach_tol: float
    effective_reg_eps: float

    def to_csv(self, path):
        n = self.states.shape[1]
        m = self.inputs.shape[1]
        header = "t," + ",".join(f"sigma_{i+1}" for i in range(n)) \
            + "," + ",".join(f"u_{j+1}" for j in range(m)) + ",lyap"
        data = np.column_stack([self.times, self.states, self.inputs,
                                self.lyapunov])
        np.savetxt(path, data, delimiter=",", header=header, comments="",
                   fmt="%.17g")

    def reach_dict(self) -> dict:
        return {
            "law": self.law.value,
            "reach_time": self.reach_time,
            "reach_time_per_state": self.reach_time_per_state,
            "reach_tol": self.reach_tol,
            "effective_reg_eps": self.effective_reg_eps,
        }

    def save_reach_json(self, path):
        with open(path, "w") as f:
            json.dump(self.reach_dict(), f, indent=2)


def saturated_sign(sigma, reg_eps: float) -> np.ndarray:
    """Element-wise sign, linear inside the +-reg_eps layer."""
    s = np.asarray(sigma, dtype=float)
    return s / np.maximum(np.abs(s), reg_eps)


def saturated_unit(sigma, reg_eps: float) -> np.ndarray:
    """sigma/||sigma||, linear inside the reg_eps ball."""
    s = np.asarray(sigma, dtype=float)
    return s / max(float(np.linalg.norm(s)), reg_eps)


def rhs_vsc(B, K, sigma, reg_eps: float) -> np.ndarray:
    """Relay closed-loop right-hand side B K s(sigma) with saturated sign."""
    return np.asarray(B) @ (np.asarray(K) @ saturated_sign(sigma, reg_eps))


def rhs_uvc(B, K, sigma, reg_eps: float) -> np.ndarray:
    """Unit-vector closed-loop right-hand side B K sigma/max(||sigma||, eps)."""
    return np.asarray(B) @ (np.asarray(K) @ saturated_unit(sigma, reg_eps))


def _spectral_norm(M) -> float:
    return float(np.linalg.norm(M, 2))


def _persistent_reach_index(metric: np.ndarray, tol: float):
    """First sample index from which the metric stays <= tol; None if never."""
    above = np.nonzero(metric > tol)[0]
    if above.size == 0:
        return 0
    idx = int(above[-1]) + 1
    return idx if idx < metric.size else None


def _integrate_batch(law: Law, A, sigma0, dt, steps, eps_layer,
                     store_every=True):
    """Vectorized RK4 over a batch of closed loops sigma' = A_b f(sigma_b).

    A: (batch, n, n) effective closed-loop matrices (B K); sigma0: (batch, n);
    eps_layer: (batch,) layer widths.  Returns states (batch, steps+1, n).
    """
    batch, n = sigma0.shape
    sig = sigma0.copy()
    out = np.empty((batch, steps + 1, n)) if store_every else None
    if store_every:
        out[:, 0] = sig
    eps_col = eps_layer[:, None]

    if law is Law.VSC:
        def f(s):
            u = s / np.maximum(np.abs(s), eps_col)
            return np.einsum('bij,bj->bi', A, u)
    else:
        def f(s):
            nrm = np.linalg.norm(s, axis=1, keepdims=True)
            u = s / np.maximum(nrm, eps_col)
            return np.einsum('bij,bj->bi', A, u)

    half = 0.5 * dt
    sixth = dt / 6.0
    for k in range(steps):
        k1 = f(sig)
        k2 = f(sig + half * k1)
        k3 = f(sig + half * k2)
        k4 = f(sig + dt * k3)
        sig = sig + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if store_every:
            out[:, k + 1] = sig
    if not np.all(np.isfinite(sig)):
        raise SimulationDiverged("non-finite state during batch integration",
                                 out)
    return out


def simulate(law: Law, B, K, sigma0, cfg: SimConfig,
             P=None) -> SimTrace:
    """Integrate one closed loop and detect reaching.

    Reaching is persistent: the reported time is the first sample after
    which the detection metric (max_i |sigma_i| for the relay law, the
    Euclidean norm for the unit-vector law) stays at or below reach_tol for
    the remainder of the horizon.  Per-coordinate times are reported for the
    relay law, whose coordinates can reach the surface independently.  The
    Lyapunov channel uses the certificate P when given (identity otherwise).
    """
    cfg.validate()
    if cfg.horizon is None:
        raise InvalidInput("cfg.horizon is required")
    B = np.asarray(B, dtype=float)
    K = np.asarray(K, dtype=float)
    s0 = np.asarray(sigma0, dtype=float)
    if not (np.all(np.isfinite(B)) and np.all(np.isfinite(K))
            and np.all(np.isfinite(s0))):
        raise InvalidInput("non-finite simulation inputs")
    n = B.shape[0]
    m = B.shape[1]
    if K.shape != (m, n) or s0.shape != (n,):
        raise InvalidInput("B, K and sigma0 dimensions do not conform")

    A = B @ K
    eps_layer = max(cfg.reg_eps, SIM_LAYER_CFL * cfg.dt * _spectral_norm(A))
    steps = int(round(cfg.horizon / cfg.dt))
    states = _integrate_batch(law, A[None], s0[None], cfg.dt, steps,
                              np.array([eps_layer]))[0]
    times = np.arange(steps + 1) * cfg.dt

    if law is Law.VSC:
        u = states / np.maximum(np.abs(states), eps_layer)
        metric = np.max(np.abs(states), axis=1)
    else:
        nrm = np.linalg.norm(states, axis=1, keepdims=True)
        u = states / np.maximum(nrm, eps_layer)
        metric = np.linalg.norm(states, axis=1)
    inputs = u @ K.T

    if P is None:
        Pmat = np.eye(n)
    else:
        Pmat = np.asarray(P, dtype=float)
    if law is Law.VSC:
        lyap = np.abs(states) @ np.diag(Pmat)
    else:
        quad = np.einsum('ti,ij,tj->t', states, Pmat, states)
        nrm1 = np.linalg.norm(states, axis=1)
        lyap = np.divide(quad, nrm1, out=np.zeros_like(quad),
                         where=nrm1 > 0.0)

    ridx = _persistent_reach_index(metric, cfg.reach_tol)
    reach_time = None if ridx is None else float(times[ridx])
    per_state = None
    if law is Law.VSC:
        per_state = []
        for i in range(n):
            idx = _persistent_reach_index(np.abs(states[:, i]), cfg.reach_tol)
            per_state.append(None if idx is None else float(times[idx]))

    return SimTrace(law=law, times=times, states=states, inputs=inputs,
                    lyapunov=lyap, reach_time=reach_time,
                    reach_time_per_state=per_state, reach_tol=cfg.reach_tol,
                    effective_reg_eps=eps_layer)


def sample_omega(design, rng, max_tries: int = 10000) -> np.ndarray:
    """Rejection-sample a nonzero initial state from the guaranteed set."""
    n = design.P.shape[0]
    if design.law is Law.VSC:
        p = np.diag(design.P)
        box = 1.0 / p
    else:
        lam = float(np.linalg.eigvalsh(design.P)[0])
        box = np.full(n, 1.0 / lam)
    for _ in range(max_tries):
        sigma = rng.uniform(-box, box)
        if in_omega(design, sigma) and float(np.linalg.norm(sigma)) > 1e-9:
            return sigma
    raise InvalidInput("rejection sampling failed to hit the guaranteed set")


@dataclass
class EmpiricalReport:
    """Monte-Carlo comparison of simulated reach times against the bounds."""

    trials: int
    reach_times: list = field(default_factory=list)
    bounds: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    max_ratio: float | None = None
    # per-trial channels kept for downstream property checks
    times: np.ndarray | None = None
    lyapunov: np.ndarray | None = None      # (trials, steps+1)
    layer_metric: np.ndarray | None = None  # (trials, steps+1)
    effective_reg_eps: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "reach_times": self.reach_times,
            "bounds": self.bounds,
            "max_ratio": self.max_ratio,
            "violations": self.violations,
        }


def empirical_vs_bound(design, sys: PolytopicSystem, trials: int,
                       cfg: SimConfig, seed: int | None = None) -> EmpiricalReport:
    """Simulate random (alpha, sigma0) pairs and compare against the bounds.

    sigma0 is rejection-sampled from the guaranteed set, alpha uniformly
    from the simplex; every trial must reach within its analytic bound (and
    within T_bound when available).  Violations are reported as data, not
    raised: they indicate discretization artifacts worth inspecting.
    """
    cfg.validate()
    report = EmpiricalReport(trials=trials)
    if trials == 0:
        return report
    law = design.law
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    n = sys.n
    N = sys.num_vertices

    sigmas = np.empty((trials, n))
    As = np.empty((trials, n, n))
    bounds = np.empty(trials)
    for t in range(trials):
        w = rng.exponential(1.0, size=N)
        alpha = SimplexPoint(w / np.sum(w))
        B = combine(sys, alpha)
        sigmas[t] = sample_omega(design, rng)
        As[t] = B @ design.K
        bounds[t] = reaching_bound(design, sigmas[t])

    if cfg.horizon is not None:
        horizon = cfg.horizon
    elif design.T_bound is not None:
        horizon = SIM_HORIZON_OVER_BOUND * design.T_bound
    else:
        horizon = SIM_HORIZON_OVER_BOUND * float(np.max(bounds))
    steps = int(round(horizon / cfg.dt))
    eps_layer = np.maximum(
        cfg.reg_eps,
        SIM_LAYER_CFL * cfg.dt * np.array([_spectral_norm(A) for A in As]))

    states = _integrate_batch(law, As, sigmas, cfg.dt, steps, eps_layer)
    times = np.arange(steps + 1) * cfg.dt

    if law is Law.VSC:
        metric = np.max(np.abs(states), axis=2)
        layer_metric = np.min(np.abs(states), axis=2)
        lyap = np.abs(states) @ np.diag(design.P)
    else:
        metric = np.linalg.norm(states, axis=2)
        layer_metric = metric
        quad = np.einsum('bti,ij,btj->bt', states, design.P, states)
        lyap = np.divide(quad, metric, out=np.zeros_like(quad),
                         where=metric > 0.0)

    for t in range(trials):
        ridx = _persistent_reach_index(metric[t], cfg.reach_tol)
        rt = None if ridx is None else float(times[ridx])
        report.reach_times.append(rt)
        report.bounds.append(float(bounds[t]))
        entry = {"trial": t, "sigma0": sigmas[t].tolist(),
                 "bound": float(bounds[t]), "reach_time": rt}
        if rt is None:
            report.violations.append({**entry, "reason": "never reached"})
            continue
        report.ratios.append(rt / bounds[t])
        if rt > bounds[t]:
            report.violations.append({**entry, "reason": "bound exceeded"})
        elif design.T_bound is not None and rt > design.T_bound:
            report.violations.append({**entry, "reason": "T_bound exceeded"})
    report.max_ratio = max(report.ratios) if report.ratios else None
    report.times = times
    report.lyapunov = lyap
    report.layer_metric = layer_metric
    report.effective_reg_eps = eps_layer
    return report
