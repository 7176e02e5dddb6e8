"""Delay system data model, validation and the dual-system transformation.

Matrices are plain numpy arrays or scipy CSR matrices. The storage policy
keeps a matrix dense when it is small (n <= 200) or at least 25% filled;
anything larger and sparser is converted to CSR with sorted indices.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidSystem

DENSE_SIDE_LIMIT = 200
DENSE_DENSITY = 0.25

# Column deflation threshold, shared with the Arnoldi QR so validation and
# runtime agree on what counts as rank deficient.
RANK_TOL = 1e-12


def coerce_matrix(M):
    """Normalize to float64 and apply the dense/sparse storage policy."""
    if sp.issparse(M):
        M = M.tocsr().astype(float)
        n = max(M.shape)
        density = M.nnz / max(1, M.shape[0] * M.shape[1])
        if n <= DENSE_SIDE_LIMIT or density >= DENSE_DENSITY:
            return M.toarray()
        M.sort_indices()
        return M
    A = np.atleast_2d(np.asarray(M, dtype=float))
    n = max(A.shape)
    if n > DENSE_SIDE_LIMIT:
        density = np.count_nonzero(A) / A.size
        if density < DENSE_DENSITY:
            S = sp.csr_matrix(A)
            S.sort_indices()
            return S
    return A


def to_dense(M):
    return M.toarray() if sp.issparse(M) else np.asarray(M)


def matrix_finite(M):
    data = M.data if sp.issparse(M) else M
    return bool(np.all(np.isfinite(data)))


@dataclass(frozen=True)
class DelaySystem:
    """The tuple (A_0 .. A_m, tau_1 .. tau_m, B, C).

    A[0] is the delay-free coefficient; A[i] acts on the state delayed by
    taus[i-1]. Construction only coerces storage; call :func:`validate`
    for the full structural report. Instances are treated as read-only
    by every downstream operation.
    """

    A: tuple
    taus: tuple
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(coerce_matrix(Ai) for Ai in self.A))
        object.__setattr__(self, "taus", tuple(float(t) for t in self.taus))
        object.__setattr__(self, "B", np.atleast_2d(np.asarray(self.B, dtype=float)))
        object.__setattr__(self, "C", np.atleast_2d(np.asarray(self.C, dtype=float)))

    @property
    def n(self):
        return self.A[0].shape[0]

    @property
    def m(self):
        return len(self.taus)

    @property
    def r(self):
        return self.B.shape[1]

    @property
    def s(self):
        return self.C.shape[0]

    @property
    def tau_max(self):
        return self.taus[-1]

    def require_valid(self):
        report = validate(self)
        if not report.ok:
            raise InvalidSystem(report)
        return self


@dataclass
class ValidationReport:
    issues: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.issues

    def add(self, message):
        self.issues.append(message)


def validate(system):
    """Structural validation: dimensions, delay ordering, rank of B, finiteness.

    Returns a report rather than raising, so callers can surface every
    problem at once. A valid system yields an empty report.
    """
    rep = ValidationReport()
    n = system.A[0].shape[0]
    if len(system.A) != len(system.taus) + 1:
        rep.add(
            f"expected {len(system.taus) + 1} coefficient matrices for "
            f"{len(system.taus)} delays, got {len(system.A)}"
        )
    for i, Ai in enumerate(system.A):
        if Ai.shape != (n, n):
            rep.add(f"A{i} has shape {Ai.shape}, expected ({n}, {n})")
        if not matrix_finite(Ai):
            rep.add(f"A{i} contains non-finite entries")
    if len(system.taus) == 0:
        rep.add("at least one delay is required (use a zero A1 for delay-free systems)")
    prev = 0.0
    for i, tau in enumerate(system.taus):
        if tau <= prev:
            rep.add(f"delays must be strictly increasing and positive: tau_{i + 1} = {tau}")
        prev = tau
    if system.B.shape[0] != n:
        rep.add(f"B has {system.B.shape[0]} rows, expected {n}")
    if system.C.shape[1] != n:
        rep.add(f"C has {system.C.shape[1]} columns, expected {n}")
    if not matrix_finite(system.B):
        rep.add("B contains non-finite entries")
    if not matrix_finite(system.C):
        rep.add("C contains non-finite entries")
    if system.B.shape[0] == n and system.B.size:
        from .kernels import reduced_qr

        _, _, dropped = reduced_qr(system.B)
        if any(dropped):
            bad = [j for j, d in enumerate(dropped) if d]
            rep.add(f"B is rank deficient: columns {bad} are dependent at tolerance {RANK_TOL:g}")
    return rep


def transpose_system(system):
    """System whose Lyapunov matrix P(t) is the dual Q(t) of the input.

    Substitutes A_i <- A_i^T, B <- C^T, C <- B^T; delays unchanged. Raises
    if C^T is rank deficient, since it becomes the new input factor.
    """
    dual = DelaySystem(
        A=tuple(Ai.T for Ai in system.A),
        taus=system.taus,
        B=to_dense(system.C).T.copy(),
        C=to_dense(system.B).T.copy(),
    )
    return dual.require_valid()


class BlockVector:
    """Tall matrix split into blocks of n rows, only the leading `active` stored.

    The stored data has shape (active * n, width); blocks past `active`
    are identically zero by construction and never materialized.
    """

    __slots__ = ("data", "n", "width", "active")

    def __init__(self, data, n):
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[0] % n:
            raise ValueError("data must stack an integer number of n-row blocks")
        self.data = data
        self.n = n
        self.width = data.shape[1]
        self.active = data.shape[0] // n

    def block(self, i):
        """View of block i (zero matrix for i >= active)."""
        if i >= self.active:
            return np.zeros((self.n, self.width))
        return self.data[i * self.n : (i + 1) * self.n]

    def padded(self, num_blocks):
        """Dense copy with trailing zero blocks up to num_blocks."""
        if num_blocks < self.active:
            raise ValueError("cannot truncate active blocks")
        out = np.zeros((num_blocks * self.n, self.width))
        out[: self.data.shape[0]] = self.data
        return out
