"""Dense kernel for small symmetric matrices.

Everything downstream (LMI assembly, solver certification, controller
recovery) funnels through the handful of routines here.  Matrices are kept
small (order <= ~50), so a cyclic Jacobi eigensolver and an unblocked
Cholesky are both adequate and easy to trust.
"""
from __future__ import annotations

import numpy as np

from .defaults import JACOBI_OFFDIAG_REL
from .errors import InvalidInput, NotPositiveDefinite


class SymMatrix:
    """Symmetric real matrix; symmetrized as (A + A^T)/2 on construction."""

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidInput(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise InvalidInput("order must be at least 1")
        if not np.all(np.isfinite(a)):
            raise InvalidInput("matrix entries must be finite")
        self.mat = 0.5 * (a + a.T)

    @property
    def order(self) -> int:
        return self.mat.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.mat, dtype=dtype)

    def __repr__(self):
        return f"SymMatrix(order={self.order})"


def _as_sym(S) -> np.ndarray:
    if isinstance(S, SymMatrix):
        return S.mat
    return SymMatrix(S).mat


def sym_eigenvalues(S) -> np.ndarray:
    """All eigenvalues of the symmetrized input, ascending.

    Cyclic Jacobi iteration; sweeps until the off-diagonal Frobenius norm
    drops below JACOBI_OFFDIAG_REL times the matrix Frobenius norm.
    """
    A = _as_sym(S).copy()
    n = A.shape[0]
    if n == 1:
        return A[0, :1].copy()
    fro = np.linalg.norm(A)
    if fro == 0.0:
        return np.zeros(n)
    tol = JACOBI_OFFDIAG_REL * fro
    for _sweep in range(60):
        off = np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= tol / (n * n):
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0 else 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
    return np.sort(np.diag(A))


def cholesky_factor(S) -> np.ndarray:
    """Lower-triangular L with L L^T = S; NotPositiveDefinite on breakdown."""
    A = _as_sym(S)
    n = A.shape[0]
    L = np.zeros_like(A)
    for j in range(n):
        d = A[j, j] - L[j, :j] @ L[j, :j]
        if d <= 0.0 or not np.isfinite(d):
            raise NotPositiveDefinite(f"pivot {j} is {d:.3e}")
        L[j, j] = np.sqrt(d)
        if j + 1 < n:
            L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def is_positive_definite(S, margin: float = 0.0) -> bool:
    """True iff lambda_min(S) > margin, decided by Cholesky of S - margin*I."""
    if margin < 0:
        raise InvalidInput("margin must be nonnegative")
    A = _as_sym(S)
    try:
        cholesky_factor(A - margin * np.eye(A.shape[0]))
        return True
    except NotPositiveDefinite:
        return False


def solve_spd(S, rhs) -> np.ndarray:
    """Solve S X = rhs for symmetric positive definite S via Cholesky."""
    A = _as_sym(S)
    b = np.asarray(rhs, dtype=float)
    vector_rhs = b.ndim == 1
    if vector_rhs:
        b = b[:, None]
    if b.shape[0] != A.shape[0]:
        raise InvalidInput(f"rhs has {b.shape[0]} rows, matrix has order {A.shape[0]}")
    L = cholesky_factor(A)
    n = A.shape[0]
    # forward then backward substitution
    y = np.zeros_like(b)
    for i in range(n):
        y[i] = (b[i] - L[i, :i] @ y[:i]) / L[i, i]
    x = np.zeros_like(b)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - L[i + 1:, i] @ x[i + 1:]) / L[i, i]
    return x[:, 0] if vector_rhs else x


def spd_inverse(S) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix."""
    A = _as_sym(S)
    return solve_spd(A, np.eye(A.shape[0]))


def congruence(S, T) -> SymMatrix:
    """Congruence transform T^T S T; preserves definiteness for nonsingular T."""
    A = _as_sym(S)
    Tm = np.asarray(T, dtype=float)
    if Tm.ndim != 2 or Tm.shape[0] != A.shape[0]:
        raise InvalidInput(
            f"transform shape {Tm.shape} does not conform with order {A.shape[0]}")
    if not np.all(np.isfinite(Tm)):
        raise InvalidInput("transform entries must be finite")
    return SymMatrix(Tm.T @ A @ Tm)


def lambda_min(S) -> float:
    return float(sym_eigenvalues(S)[0])


def lambda_max(S) -> float:
    return float(sym_eigenvalues(S)[-1])
