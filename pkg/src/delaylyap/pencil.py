"""Structured pencil behind the discretized system.

The discretization is similar to G = Sigma^{-1} Pi, where Sigma carries the
coefficient blocks R_i on its first block row and Pi is the (scaled)
Chebyshev integration stencil. Only leading submatrices of these operators
are ever needed: applying G to a vector with j active blocks touches
R_0 .. R_j and returns a vector with j+1 active blocks, so the iteration
never commits to a truncation order. All solves against R_0 reuse one LU
factorization computed at construction.

Dense assembly of Sigma/Pi/G/H/F is provided for small instances; tests and
the acceptance suite use it as the ground truth for the matrix-free path.
"""

import threading

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .chebyshev import cheb_t
from .errors import SingularR0
from .model import BlockVector, to_dense

COND_LIMIT = 1e14


def _combine(mats, coeffs):
    """sum(c_i * M_i) keeping sparse storage only when every term is sparse."""
    if all(sp.issparse(M) for M in mats):
        out = coeffs[0] * mats[0]
        for M, c in zip(mats[1:], coeffs[1:]):
            out = out + c * M
        out = out.tocsr()
        out.sort_indices()
        return out
    out = coeffs[0] * to_dense(mats[0])
    for M, c in zip(mats[1:], coeffs[1:]):
        out = out + c * to_dense(M)
    return out


class PencilContext:
    """Reusable state: the R_i cache and the factorization of R_0 = sum(A_i)."""

    def __init__(self, system):
        system.require_valid()
        self.system = system
        self.n = system.n
        self.tau_max = system.tau_max
        self._lock = threading.Lock()
        # T_i(1) = 1 for the delay-free block; the delayed blocks are
        # evaluated at xi_k = 1 - 2 tau_k / tau_max in [-1, 1).
        self._xi = np.array([1.0 - 2.0 * t / self.tau_max for t in system.taus])
        R0 = _combine(system.A, [1.0] * len(system.A))
        self._R = [R0]
        self.solve_count = 0
        self._solve = None
        if sp.issparse(R0):
            try:
                self._lu = spla.splu(R0.tocsc())
            except RuntimeError as exc:
                raise SingularR0(f"R0 is singular: {exc}") from exc
            self._solve = self._lu.solve
            inv_op = spla.LinearOperator(
                R0.shape,
                matvec=lambda b: self._lu.solve(b),
                rmatvec=lambda b: self._lu.solve(b, trans="T"),
            )
            cond = spla.onenormest(R0) * spla.onenormest(inv_op)
        else:
            try:
                cond = np.linalg.cond(R0, 1)
            except np.linalg.LinAlgError:
                cond = np.inf
            if np.isfinite(cond) and cond <= COND_LIMIT:
                lu_piv = sla.lu_factor(R0)
                self._solve = lambda b: sla.lu_solve(lu_piv, b)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise SingularR0(
                f"R0 condition estimate {cond:.3e} exceeds {COND_LIMIT:.0e}; "
                "zero is (numerically) a characteristic root"
            )
        self.r0_cond = cond

    def solve_R0(self, rhs):
        """One backward/forward substitution against the stored factorization."""
        self.solve_count += 1
        return self._solve(np.asarray(rhs, dtype=float))

    def get_R(self, i):
        """R_i = A_0 T_i(1) + sum_k A_k T_i(xi_k), cached and immutable once built."""
        if i < 0:
            raise ValueError("index must be nonnegative")
        if i >= len(self._R):
            with self._lock:
                while len(self._R) <= i:
                    j = len(self._R)
                    coeffs = [1.0] + [cheb_t(j, xi) for xi in self._xi]
                    self._R.append(_combine(list(self.system.A), coeffs))
        return self._R[i]

    def starting_block(self):
        """x_0 = R_0^{-1} B, the Arnoldi starting block."""
        return self.solve_R0(to_dense(self.system.B))

    def build_H_blocks(self):
        """The two nonzero blocks of H, independent of any truncation order."""
        x0 = self.starting_block()
        half = 0.5 * self.tau_max
        top = self.solve_R0(x0 - half * (self.get_R(1) @ x0))
        return BlockVector(np.vstack([top, half * x0]), self.n)

    def apply_G(self, x):
        """y = Sigma^{-1} Pi x for a block vector with j active blocks.

        The shift structure gives y exactly j+1 active blocks; the only
        linear solve is the one against R_0 for the first block.
        """
        j = x.active
        if j < 1:
            raise ValueError("input must have at least one active block")
        n, w = self.n, x.width
        if w == 0:
            return BlockVector(np.zeros(((j + 1) * n, 0)), n)
        X = x.data.reshape(j, n, w)
        c = 0.25 * self.tau_max
        W = np.empty((j + 1, n, w))
        W[0] = X.sum(axis=0)
        W[1] = c * (2.0 * X[0] - (X[2] if j >= 3 else 0.0))
        for q in range(2, j + 1):
            upper = X[q + 1] if q + 1 <= j - 1 else 0.0
            W[q] = (c / q) * (X[q - 1] - upper)
        acc = W[0].copy()
        for p in range(1, j + 1):
            acc -= self.get_R(p) @ W[p]
        Y = np.vstack([self.solve_R0(acc)] + [W[p] for p in range(1, j + 1)])
        return BlockVector(Y, n)

    def apply_F(self, V, k_blocks):
        """[R_0 ... R_{k-1}] @ V without materializing the row of blocks."""
        V = np.asarray(V, dtype=float)
        if V.shape[0] != k_blocks * self.n:
            raise ValueError("V must stack k_blocks blocks of height n")
        out = np.zeros((self.n, V.shape[1]))
        for p in range(k_blocks):
            out += self.get_R(p) @ V[p * self.n : (p + 1) * self.n]
        return out


def dense_pi(N, tau_max, n=1):
    """Dense Pi truncated to N+1 block rows/columns (test-scale only)."""
    M = np.zeros((N + 1, N + 1))
    M[0, :] = 4.0 / tau_max
    M[1, 0] = 2.0
    if N >= 2:
        M[1, 2] = -1.0
    for q in range(2, N + 1):
        M[q, q - 1] = 1.0 / q
        if q + 1 <= N:
            M[q, q + 1] = -1.0 / q
    M *= 0.25 * tau_max
    return np.kron(M, np.eye(n))


def dense_sigma(ctx, N):
    n = ctx.n
    S = np.eye((N + 1) * n)
    for i in range(N + 1):
        S[:n, i * n : (i + 1) * n] = to_dense(ctx.get_R(i))
    return S


def dense_G(ctx, N):
    return np.linalg.solve(dense_sigma(ctx, N), dense_pi(N, ctx.tau_max, ctx.n))


def dense_H(ctx, N):
    H = np.zeros(((N + 1) * ctx.n, ctx.system.r))
    blocks = ctx.build_H_blocks()
    H[: blocks.data.shape[0]] = blocks.data
    return H


def dense_F(ctx, N):
    return np.hstack([to_dense(ctx.get_R(i)) for i in range(N + 1)])
