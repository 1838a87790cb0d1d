"""Polytopic input-matrix uncertainty: B = sum_i alpha_i B_i, alpha in the simplex.

Also builds the two worked example polytopes: a planar visual-servo system
with an uncertain camera rotation, and an over-actuated underwater ROV with
uncertain actuator gains.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, InvalidSimplexPoint

SIMPLEX_SUM_TOL = 1e-12


@dataclass(frozen=True)
class PolytopicSystem:
    """Vertex representation of the uncertain n x m input matrix."""

    n: int
    m: int
    vertices: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise InvalidInput("state and input dimensions must be at least 1")
        verts = tuple(np.array(v, dtype=float) for v in self.vertices)
        if len(verts) < 1:
            raise InvalidInput("at least one vertex is required")
        for v in verts:
            if v.shape != (self.n, self.m):
                raise InvalidInput(
                    f"vertex shape {v.shape} does not match ({self.n}, {self.m})")
            if not np.all(np.isfinite(v)):
                raise InvalidInput("vertex entries must be finite")
        object.__setattr__(self, "vertices", verts)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m,
                "vertices": [v.tolist() for v in self.vertices]}

    @classmethod
    def from_dict(cls, d: dict) -> "PolytopicSystem":
        try:
            return cls(int(d["n"]), int(d["m"]), tuple(d["vertices"]))
        except KeyError as e:
            raise InvalidInput(f"missing system field {e}") from e


@dataclass(frozen=True)
class SimplexPoint:
    """Convex-combination weights: nonnegative, summing to one."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise InvalidSimplexPoint("weights must be a nonempty vector")
        if not np.all(np.isfinite(w)):
            raise InvalidSimplexPoint("weights must be finite")
        if np.any(w < -SIMPLEX_SUM_TOL):
            raise InvalidSimplexPoint("weights must be nonnegative")
        if abs(float(np.sum(w)) - 1.0) > SIMPLEX_SUM_TOL:
            raise InvalidSimplexPoint(f"weights sum to {np.sum(w)}, expected 1")
        object.__setattr__(self, "weights", np.maximum(w, 0.0))

    def __len__(self):
        return self.weights.size


def combine(sys: PolytopicSystem, alpha) -> np.ndarray:
    """Evaluate B(alpha) = sum_i alpha_i B_i."""
    point = alpha if isinstance(alpha, SimplexPoint) else SimplexPoint(np.asarray(alpha))
    if len(point) != sys.num_vertices:
        raise InvalidInput(
            f"{len(point)} weights given for {sys.num_vertices} vertices")
    out = np.zeros((sys.n, sys.m))
    for w, v in zip(point.weights, sys.vertices):
        out += w * v
    return out


def sample_simplex(N: int, seed: int) -> SimplexPoint:
    """Uniform simplex sample from normalized exponential draws; seed-deterministic."""
    if N < 1:
        raise InvalidInput("N must be at least 1")
    rng = np.random.default_rng(seed)
    e = rng.exponential(1.0, size=N)
    return SimplexPoint(e / np.sum(e))


def rotation(c: float, s: float) -> np.ndarray:
    """Rotation-patterned matrix [[c, s], [-s, c]] (orthogonal when c^2+s^2=1)."""
    return np.array([[c, s], [-s, c]])


def visual_servo_polytope(phi_bar: float, delta_bar: float) -> PolytopicSystem:
    """Planar visual-servo polytope for an uncertain camera rotation angle.

    The uncertain matrix is B(phi) = B(dphi) B(phi_bar) with |dphi| bounded
    by delta_bar.  The pair (cos dphi, sin dphi) is overbounded by the
    axis-aligned box with corners c in {cos delta_bar, 1}, s in
    {-sin delta_bar, +sin delta_bar}, which is the tightest four-vertex box
    containing the arc; valid for 0 <= delta_bar <= pi/2.
    """
    if not np.isfinite(phi_bar):
        raise InvalidInput("phi_bar must be finite")
    if not (0.0 <= delta_bar <= np.pi / 2):
        raise InvalidInput("delta_bar must lie in [0, pi/2]")
    base = rotation(np.cos(phi_bar), np.sin(phi_bar))
    cd, sd = np.cos(delta_bar), np.sin(delta_bar)
    verts = [rotation(c, s) @ base
             for c in (cd, 1.0) for s in (-sd, sd)]
    return PolytopicSystem(2, 2, tuple(verts))


def rov_polytope(m0: float, Iz: float, psi1: float, psi2: float,
                 g_lo: float, g_hi: float) -> PolytopicSystem:
    """Simplified ROV input polytope B(g) = M^-1 Psi Pi(g).

    M = diag(m0, m0, Iz) collects mass/inertia, Psi maps the four propeller
    thrusts to body forces, and Pi(g) = diag(g1, 1, g3, 1) carries the two
    uncertain actuator gains; vertices are the four (g1, g3) corners.
    """
    if m0 <= 0 or Iz <= 0:
        raise InvalidInput("mass and inertia must be positive")
    if g_lo > g_hi:
        raise InvalidInput("g_lo must not exceed g_hi")
    Minv = np.diag([1.0 / m0, 1.0 / m0, 1.0 / Iz])
    Psi = np.array([[psi1, psi1, psi1, psi1],
                    [psi1, -psi1, -psi1, psi1],
                    [-psi2, psi2, -psi2, psi2]])
    verts = [Minv @ Psi @ np.diag([g1, 1.0, g3, 1.0])
             for g1 in (g_lo, g_hi) for g3 in (g_lo, g_hi)]
    return PolytopicSystem(3, 4, tuple(verts))
