"""Matrix-inequality assembly.

Builds the two controller-synthesis condition sets as block matrices affine
in a flat decision vector, and lowers them to standard semidefinite form
(linear objective, PSD constraints).  Strict inequalities are converted to
closed ones with a fixed margin: M < 0 becomes -M - margin*I >= 0.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .defaults import STRICTNESS_MARGIN
from .errors import InvalidInput, InvalidParameter
from .polytope import PolytopicSystem

DIAGONAL = "diagonal"
SYMMETRIC = "symmetric"
FULL = "full"
SCALAR = "scalar"


def _block_size(structure, dims) -> int:
    if structure == DIAGONAL:
        return dims
    if structure == SYMMETRIC:
        return dims * (dims + 1) // 2
    if structure == FULL:
        return dims[0] * dims[1]
    if structure == SCALAR:
        return 1
    raise InvalidInput(f"unknown block structure {structure!r}")


class VariableLayout:
    """Ordered map from named matrix blocks to slices of the flat vector."""

    def __init__(self, blocks):
        self.blocks = list(blocks)
        names = [b[0] for b in self.blocks]
        if len(set(names)) != len(names):
            raise InvalidInput("block names must be unique")
        self._slices = {}
        offset = 0
        for name, structure, dims in self.blocks:
            size = _block_size(structure, dims)
            self._slices[name] = (slice(offset, offset + size), structure, dims)
            offset += size
        self.total_scalars = offset

    def slice_of(self, name):
        return self._slices[name][0]

    def unpack(self, x) -> dict:
        """Flat vector -> dict of matrices (scalars come back as floats)."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.total_scalars,):
            raise InvalidInput(
                f"decision vector has length {x.size}, expected {self.total_scalars}")
        out = {}
        for name, structure, dims in self.blocks:
            s = self._slices[name][0]
            v = x[s]
            if structure == DIAGONAL:
                out[name] = np.diag(v)
            elif structure == SYMMETRIC:
                M = np.zeros((dims, dims))
                k = 0
                for i in range(dims):
                    for j in range(i, dims):
                        M[i, j] = M[j, i] = v[k]
                        k += 1
                out[name] = M
            elif structure == FULL:
                out[name] = v.reshape(dims)
            else:
                out[name] = float(v[0])
        return out

    def pack(self, values: dict) -> np.ndarray:
        """Dict of matrices -> flat vector; inverse of unpack."""
        x = np.zeros(self.total_scalars)
        for name, structure, dims in self.blocks:
            s = self._slices[name][0]
            v = values[name]
            if structure == DIAGONAL:
                x[s] = np.diag(np.asarray(v, dtype=float))
            elif structure == SYMMETRIC:
                M = np.asarray(v, dtype=float)
                x[s] = np.array([M[i, j] for i in range(dims)
                                 for j in range(i, dims)])
            elif structure == FULL:
                x[s] = np.asarray(v, dtype=float).ravel()
            else:
                x[s] = float(v)
        return x


class Sense(Enum):
    NEGATIVE_DEFINITE = "negative_definite"
    POSITIVE_SEMIDEFINITE = "positive_semidefinite"


@dataclass
class AffineMatrixInequality:
    """Symmetric block matrix affine in the decision vector.

    Evaluation at x is constant + sum_j x_j * coeffs[j]; the sense says
    whether that matrix is required negative definite (strict, carries the
    margin) or positive semidefinite.
    """

    order: int
    constant: np.ndarray
    coeffs: dict
    sense: Sense
    strictness_margin: float = 0.0
    name: str = ""

    def __post_init__(self):
        self.constant = 0.5 * (self.constant + self.constant.T)
        for j, M in self.coeffs.items():
            if M.shape != (self.order, self.order):
                raise InvalidInput(
                    f"coefficient {j} of {self.name!r} has shape {M.shape}")
            self.coeffs[j] = 0.5 * (M + M.T)


def evaluate(ami: AffineMatrixInequality, x) -> np.ndarray:
    """constant + sum_j x_j coeffs[j] as a dense symmetric matrix."""
    x = np.asarray(x, dtype=float)
    out = ami.constant.copy()
    for j, M in ami.coeffs.items():
        if j >= x.size:
            raise InvalidInput(
                f"constraint {ami.name!r} references variable {j}, "
                f"vector has length {x.size}")
        out += x[j] * M
    return out


@dataclass
class SdpProblem:
    """min objective @ x subject to every AffineMatrixInequality."""

    layout: VariableLayout
    objective: np.ndarray
    constraints: list = field(default_factory=list)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        if self.objective.shape != (self.layout.total_scalars,):
            raise InvalidInput("objective length must match layout scalars")


def to_standard_form(p: SdpProblem) -> SdpProblem:
    """All constraints in PSD sense; strict margins folded into constants."""
    out = []
    for c in p.constraints:
        if c.sense is Sense.POSITIVE_SEMIDEFINITE:
            out.append(AffineMatrixInequality(
                c.order, c.constant.copy(),
                {j: M.copy() for j, M in c.coeffs.items()},
                Sense.POSITIVE_SEMIDEFINITE, 0.0, c.name))
        else:
            const = -c.constant - c.strictness_margin * np.eye(c.order)
            out.append(AffineMatrixInequality(
                c.order, const,
                {j: -M for j, M in c.coeffs.items()},
                Sense.POSITIVE_SEMIDEFINITE, 0.0, c.name))
    return SdpProblem(p.layout, p.objective.copy(), out)


def _probe_affine(layout: VariableLayout, builder, names, senses, margins):
    """Extract constants/coefficients of an affine block builder by probing.

    builder maps an unpacked variable dict to a list of square blocks; it is
    evaluated at the zero vector and at each unit vector, which pins down the
    affine representation exactly.
    """
    p = layout.total_scalars
    base = builder(layout.unpack(np.zeros(p)))
    amis = []
    for k, blk in enumerate(base):
        amis.append(AffineMatrixInequality(
            blk.shape[0], np.array(blk), {}, senses[k], margins[k], names[k]))
    for j in range(p):
        e = np.zeros(p)
        e[j] = 1.0
        blocks = builder(layout.unpack(e))
        for k, blk in enumerate(blocks):
            coeff = blk - base[k]
            if np.any(coeff != 0.0):
                amis[k].coeffs[j] = 0.5 * (coeff + coeff.T)
    return amis


def _dedup_vertices(vertices):
    """Drop exact duplicates, preserving first-seen order."""
    unique = []
    for v in vertices:
        if not any(np.array_equal(v, u) for u in unique):
            unique.append(v)
    return unique


def assemble_vsc(sys: PolytopicSystem, xi: float, include_opt: bool,
                 phi_vsc: float, rho_fixed: float | None = None,
                 gain_fixed: np.ndarray | None = None,
                 eps_strict: float = STRICTNESS_MARGIN) -> SdpProblem:
    """Relay-law synthesis conditions as an SDP.

    Decision blocks: diagonal W and X, symmetric R, full Z (omitted when a
    fixed gain is certified, in which case Z is eliminated by Z = K X), and
    a scalar rho when the reaching-rate bound is minimized.  Per unique
    vertex B_i, the strict 2n x 2n block

        [ B_i Z + Z^T B_i^T + R    W - X + xi Z^T B_i^T ]
        [        (sym)                   -2 xi X        ]  < 0

    together with W > 0, R > 0.  With include_opt or a fixed rho, the two
    Schur-complement couplers [R X; X rho I] >= 0 and
    [phi I, I; I, 2X - W] >= 0 are appended; minimizing rho then maximizes
    the decay rate lower bound on Q.
    """
    if xi <= 0:
        raise InvalidParameter("xi must be positive")
    if include_opt and rho_fixed is not None:
        raise InvalidParameter("cannot both optimize rho and fix it")
    if (include_opt or rho_fixed is not None) and phi_vsc <= 0:
        raise InvalidParameter("phi must be positive")
    n, m = sys.n, sys.m
    verts = _dedup_vertices(sys.vertices)
    if gain_fixed is not None:
        gain_fixed = np.asarray(gain_fixed, dtype=float)
        if gain_fixed.shape != (m, n):
            raise InvalidInput(f"fixed gain must be {m}x{n}")
    blocks = [("W", DIAGONAL, n), ("X", DIAGONAL, n), ("R", SYMMETRIC, n)]
    if gain_fixed is None:
        blocks.append(("Z", FULL, (m, n)))
    if include_opt:
        blocks.append(("rho", SCALAR, None))
    layout = VariableLayout(blocks)

    In = np.eye(n)
    with_opt = include_opt or rho_fixed is not None

    # strict blocks are stored in their "must be negative definite" form,
    # so positivity requirements enter negated (-W < 0 means W > 0)
    def signed_builder(v):
        W, X, R = v["W"], v["X"], v["R"]
        Z = gain_fixed @ X if gain_fixed is not None else v["Z"]
        rho = v["rho"] if include_opt else rho_fixed
        out = [-W, -R]
        for B in verts:
            BZ = B @ Z
            off = W - X + xi * BZ.T
            out.append(np.block([[BZ + BZ.T + R, off],
                                 [off.T, -2.0 * xi * X]]))
        if with_opt:
            out.append(np.block([[R, X], [X, rho * In]]))
            out.append(np.block([[phi_vsc * In, In], [In, 2.0 * X - W]]))
        return out

    names = ["W_pd", "R_pd"] + [f"vertex_{i + 1}" for i in range(len(verts))]
    senses = [Sense.NEGATIVE_DEFINITE] * (2 + len(verts))
    margins = [eps_strict] * (2 + len(verts))
    if with_opt:
        names += ["decay_coupler", "initial_set_coupler"]
        senses += [Sense.POSITIVE_SEMIDEFINITE] * 2
        margins += [0.0, 0.0]

    amis = _probe_affine(layout, signed_builder, names, senses, margins)
    objective = np.zeros(layout.total_scalars)
    if include_opt:
        objective[layout.slice_of("rho")] = 1.0
    return SdpProblem(layout, objective, amis)


def assemble_uvc(sys: PolytopicSystem, mu: float, include_opt: bool,
                 phi_uvc: float, rho_fixed: float | None = None,
                 gain_fixed: np.ndarray | None = None,
                 eps_strict: float = STRICTNESS_MARGIN) -> SdpProblem:
    """Unit-vector-law synthesis conditions as an SDP.

    Decision blocks: symmetric X and R, full Z (eliminated when certifying a
    fixed gain), scalar rho when optimizing.  Per unique vertex the strict
    2n x 2n block

        [ B_i Z + Z^T B_i^T + (mu/4) I + R    Z^T B_i^T ]
        [            B_i Z                      -mu I   ]  < 0

    with X > 0, R > 0, plus the same decay coupler and the initial-set
    coupler [phi I, I; I, X] >= 0 when optimizing or rho is fixed.
    """
    if mu <= 0:
        raise InvalidParameter("mu must be positive")
    if include_opt and rho_fixed is not None:
        raise InvalidParameter("cannot both optimize rho and fix it")
    if (include_opt or rho_fixed is not None) and phi_uvc <= 0:
        raise InvalidParameter("phi must be positive")
    n, m = sys.n, sys.m
    verts = _dedup_vertices(sys.vertices)
    if gain_fixed is not None:
        gain_fixed = np.asarray(gain_fixed, dtype=float)
        if gain_fixed.shape != (m, n):
            raise InvalidInput(f"fixed gain must be {m}x{n}")
    blocks = [("X", SYMMETRIC, n), ("R", SYMMETRIC, n)]
    if gain_fixed is None:
        blocks.append(("Z", FULL, (m, n)))
    if include_opt:
        blocks.append(("rho", SCALAR, None))
    layout = VariableLayout(blocks)

    In = np.eye(n)
    with_opt = include_opt or rho_fixed is not None

    def signed_builder(v):
        X, R = v["X"], v["R"]
        Z = gain_fixed @ X if gain_fixed is not None else v["Z"]
        rho = v["rho"] if include_opt else rho_fixed
        out = [-X, -R]
        for B in verts:
            BZ = B @ Z
            M = np.block([[BZ + BZ.T + (mu / 4.0) * In + R, BZ.T],
                          [BZ, -mu * In]])
            out.append(M)
        if with_opt:
            out.append(np.block([[R, X], [X, rho * In]]))
            out.append(np.block([[phi_uvc * In, In], [In, X]]))
        return out

    names = ["X_pd", "R_pd"] + [f"vertex_{i + 1}" for i in range(len(verts))]
    senses = [Sense.NEGATIVE_DEFINITE] * (2 + len(verts))
    margins = [eps_strict] * (2 + len(verts))
    if with_opt:
        names += ["decay_coupler", "initial_set_coupler"]
        senses += [Sense.POSITIVE_SEMIDEFINITE] * 2
        margins += [0.0, 0.0]

    amis = _probe_affine(layout, signed_builder, names, senses, margins)
    objective = np.zeros(layout.total_scalars)
    if include_opt:
        objective[layout.slice_of("rho")] = 1.0
    return SdpProblem(layout, objective, amis)


def dump_problem(p: SdpProblem) -> str:
    """Debug dump (layout + dense matrices) for cross-checks against other solvers."""
    doc = {
        "blocks": [{"name": n, "structure": s,
                    "dims": list(d) if isinstance(d, tuple) else d}
                   for n, s, d in p.layout.blocks],
        "total_scalars": p.layout.total_scalars,
        "objective": p.objective.tolist(),
        "constraints": [{
            "name": c.name,
            "order": c.order,
            "sense": c.sense.value,
            "strictness_margin": c.strictness_margin,
            "constant": c.constant.tolist(),
            "coeffs": {str(j): M.tolist() for j, M in sorted(c.coeffs.items())},
        } for c in p.constraints],
    }
    return json.dumps(doc, indent=2)
