"""Dense linear-algebra kernels.

Schur, Lyapunov, matrix exponential and eigenvalues delegate to scipy's
LAPACK-backed routines (real Schur + quasi-triangular Sylvester solves,
scaling-and-squaring Pade for expm); the contracts asserted by the test
suite are the interface. The reduced QR is hand-rolled because it owns
the deflation semantics the Arnoldi iteration depends on.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import IllConditionedSpectrum, NoConvergence, SingularShift

# A column survives orthogonalization if its residual norm stays above
# DEFLATION_TOL times its original norm (floored by eps times the panel norm).
DEFLATION_TOL = 1e-12


@dataclass(frozen=True)
class SchurForm:
    """Real Schur decomposition A = Q T Q^T with quasi-triangular T."""

    Q: np.ndarray
    T: np.ndarray


def schur_form(A):
    T, Q = sla.schur(np.asarray(A, dtype=float), output="real")
    return SchurForm(Q=Q, T=T)


def solve_lyapunov_dense(A, W):
    """Solve A X + X A^T + W = 0 for symmetric W; X is symmetrized on output.

    Requires that no two eigenvalues of A sum to zero (guaranteed when A
    is Hurwitz).
    """
    A = np.asarray(A, dtype=float)
    W = np.asarray(W, dtype=float)
    try:
        with warnings.catch_warnings():
            # scipy downgrades a singular Sylvester block to a warning and
            # perturbs; a non-unique solution is an error for our callers.
            warnings.filterwarnings(
                "error", message=".*eigenvalue pair.*", category=RuntimeWarning
            )
            X = sla.solve_continuous_lyapunov(A, -W)
    except (np.linalg.LinAlgError, RuntimeWarning) as exc:
        raise IllConditionedSpectrum(str(exc)) from exc
    X = 0.5 * (X + X.T)
    scale = sla.norm(A) * sla.norm(X) + sla.norm(W)
    residual = sla.norm(A @ X + X @ A.T + W)
    if not np.isfinite(residual) or residual > 1e-8 * max(scale, np.finfo(float).tiny):
        raise IllConditionedSpectrum(
            f"Lyapunov residual {residual:.3e} exceeds 1e-8 * {scale:.3e}"
        )
    return X


def matrix_exponential(A):
    """exp(A) by scaling-and-squaring with diagonal Pade approximants."""
    return sla.expm(np.asarray(A, dtype=float))


def reduced_qr(M):
    """Reduced QR with column deflation.

    Classical Gram-Schmidt with one reorthogonalization pass per column.
    Columns whose residual falls below the deflation threshold are dropped
    from Q but keep their coefficient column in R, so Q @ R still
    reconstructs M. Diagonal entries of R are nonnegative.

    Returns (Q, R, dropped) where Q is d x c', R is c' x c and dropped
    flags the input columns that were deflated.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    d, c = M.shape
    panel_norm = sla.norm(M) if M.size else 0.0
    floor = np.finfo(float).eps * panel_norm
    q_cols = []
    r_cols = []
    dropped = []
    for j in range(c):
        v = M[:, j].copy()
        orig = np.linalg.norm(v)
        coeff = np.zeros(len(q_cols))
        for _ in range(2):
            for i, q in enumerate(q_cols):
                h = q @ v
                coeff[i] += h
                v -= h * q
        norm = np.linalg.norm(v)
        tol = DEFLATION_TOL * max(orig, floor)
        if norm <= tol:
            dropped.append(True)
            r_cols.append((coeff, 0.0))
        else:
            dropped.append(False)
            q_cols.append(v / norm)
            r_cols.append((coeff, norm))
    cp = len(q_cols)
    Q = np.column_stack(q_cols) if cp else np.zeros((d, 0))
    R = np.zeros((cp, c))
    row = 0
    for j, (coeff, diag) in enumerate(r_cols):
        R[: len(coeff), j] = coeff
        if not dropped[j]:
            R[row, j] = diag
            row += 1
    return Q, R, dropped


def eigenvalues(A):
    """Full spectrum via the QR algorithm (backward stable)."""
    try:
        return sla.eigvals(np.asarray(A, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


def guarded_solve(M, B, what):
    """Shifted solve that treats a numerically singular matrix as an error.

    LU is backward stable, so singularity shows up as solution blowup
    rather than a large residual; the norm-growth ratio is a cheap
    condition proxy.
    """
    try:
        X = np.linalg.solve(M, B)
    except np.linalg.LinAlgError as exc:
        raise SingularShift(what) from exc
    growth = (
        np.linalg.norm(X)
        * np.linalg.norm(M, 1)
        / max(np.linalg.norm(B), np.finfo(float).tiny)
    )
    if not np.all(np.isfinite(X)) or growth > 1e14:
        raise SingularShift(what)
    return X
