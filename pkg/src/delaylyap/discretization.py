"""Dense spectral discretization: the oracle-grade reference path.

Collocating the history segment on the Chebyshev-type mesh turns the delay
system into an ODE of dimension (N+1)n. Everything here is dense and
intentionally capped in size; the production path for large problems is
the structured pencil plus Krylov projection.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .chebyshev import build_mesh, diff_matrix, lagrange_eval_weights
from .errors import CapacityExceeded, NotHurwitz
from .kernels import guarded_solve, matrix_exponential, solve_lyapunov_dense
from .model import to_dense

DENSE_DIM_LIMIT = 3000
EXPM_DIM_LIMIT = 1000
HURWITZ_MARGIN = 1e-10


@dataclass(frozen=True)
class DenseReference:
    """Discretized state-space model (A_N, B_N, C_N) with the selector E_N."""

    system: object
    N: int
    A_N: np.ndarray
    B_N: np.ndarray
    C_N: np.ndarray
    E_N: np.ndarray

    @property
    def dim(self):
        return self.A_N.shape[0]


def build_discretization(system, N):
    """Assemble the (N+1)n-dimensional collocation ODE.

    The top N block rows are differentiation-matrix rows Kronecker the
    identity; the bottom block row carries the system matrices weighted by
    the Lagrange basis evaluated at 0 and at the negated delays.
    """
    system.require_valid()
    n = system.n
    if (N + 1) * n > DENSE_DIM_LIMIT:
        raise CapacityExceeded(
            f"dense reference refuses (N+1)n = {(N + 1) * n} > {DENSE_DIM_LIMIT}"
        )
    mesh = build_mesh(N, system.tau_max)
    D = diff_matrix(mesh)
    dim = (N + 1) * n
    A_N = np.zeros((dim, dim))
    A_N[: N * n] = np.kron(D[:N], np.eye(n))
    w0 = lagrange_eval_weights(mesh, 0.0)
    weights = [lagrange_eval_weights(mesh, -tau) for tau in system.taus]
    dense_A = [to_dense(Ai) for Ai in system.A]
    for k in range(N + 1):
        block = w0[k] * dense_A[0]
        for Ai, w in zip(dense_A[1:], weights):
            block = block + w[k] * Ai
        A_N[N * n :, k * n : (k + 1) * n] = block
    B_N = np.zeros((dim, system.r))
    B_N[N * n :] = to_dense(system.B)
    C_N = np.zeros((system.s, dim))
    C_N[:, N * n :] = to_dense(system.C)
    E_N = np.zeros((dim, n))
    E_N[N * n :] = np.eye(n)
    return DenseReference(system=system, N=N, A_N=A_N, B_N=B_N, C_N=C_N, E_N=E_N)


def _require_hurwitz(A_N):
    eig = np.linalg.eigvals(A_N)
    margin = -HURWITZ_MARGIN * sla.norm(A_N)
    worst = float(np.max(eig.real))
    if worst >= margin:
        raise NotHurwitz(
            f"discretized matrix has an eigenvalue with real part {worst:.3e}; "
            "the delay system (or its discretization at this N) is not stable"
        )
    return eig


def reference_lyapunov(ref):
    """P_N solving A_N P_N + P_N A_N^T + B_N B_N^T = 0 (symmetric PSD)."""
    _require_hurwitz(ref.A_N)
    return solve_lyapunov_dense(ref.A_N, ref.B_N @ ref.B_N.T)


def reference_P_of_t(ref, P_N, t):
    """Evaluate the n x n reference Lyapunov matrix E_N^T P_N exp(A_N^T t) E_N."""
    if t < 0:
        raise ValueError("t must be nonnegative; use P(-t) = P(t)^T")
    left = ref.E_N.T @ P_N
    if t == 0:
        return left @ ref.E_N
    if ref.dim > EXPM_DIM_LIMIT:
        raise CapacityExceeded(
            f"matrix exponential refused for dimension {ref.dim} > {EXPM_DIM_LIMIT}"
        )
    return left @ matrix_exponential(ref.A_N.T * t) @ ref.E_N


def reference_P_grid(ref, P_N, ts):
    """Evaluate the reference Lyapunov matrix on a uniform time grid.

    Advances exp(A_N^T t) E_N by one precomputed step operator per grid
    point instead of one matrix exponential per time.
    """
    ts = np.asarray(ts, dtype=float)
    steps = np.diff(ts)
    if ts.size > 2 and not np.allclose(steps, steps[0], rtol=1e-12, atol=0):
        return np.stack([reference_P_of_t(ref, P_N, t) for t in ts])
    if np.any(ts < 0):
        raise ValueError("times must be nonnegative; use P(-t) = P(t)^T")
    if ref.dim > EXPM_DIM_LIMIT and (ts.size > 1 or ts[0] > 0):
        raise CapacityExceeded(
            f"matrix exponential refused for dimension {ref.dim} > {EXPM_DIM_LIMIT}"
        )
    left = ref.E_N.T @ P_N
    Z = ref.E_N.copy()
    if ts[0] > 0:
        Z = matrix_exponential(ref.A_N.T * ts[0]) @ Z
    if ts.size > 1:
        step_op = matrix_exponential(ref.A_N.T * steps[0])
    out = np.empty((ts.size, ref.E_N.shape[1], ref.E_N.shape[1]))
    for idx in range(ts.size):
        if idx:
            Z = step_op @ Z
        out[idx] = left @ Z
    return out


def transfer_delay(system, s):
    """Transfer function of the delay system at a complex point s."""
    s = complex(s)
    M = s * np.eye(system.n) - to_dense(system.A[0]).astype(complex)
    for Ai, tau in zip(system.A[1:], system.taus):
        M -= to_dense(Ai) * np.exp(-s * tau)
    X = guarded_solve(M, to_dense(system.B).astype(complex),
                       f"characteristic matrix singular at s = {s}")
    return to_dense(system.C) @ X


def transfer_discretized(ref, s):
    """Transfer function of the discretized ODE at a complex point s."""
    s = complex(s)
    M = s * np.eye(ref.dim) - ref.A_N
    X = guarded_solve(M, ref.B_N.astype(complex),
                       f"s = {s} is an eigenvalue of the discretization")
    return ref.C_N @ X


def discretized_h2(ref):
    """sqrt(tr(C P_N(0) C^T)) from the dense reference path."""
    P_N = reference_lyapunov(ref)
    P0 = ref.E_N.T @ P_N @ ref.E_N
    C = to_dense(ref.system.C)
    value = float(np.trace(C @ P0 @ C.T))
    return float(np.sqrt(max(value, 0.0)))
