"""Structure-exploiting block Arnoldi iteration on the pencil operator G.

Block column j of the basis has exactly j+1 nonzero blocks of n rows
(applying G extends the active range by one block), so the basis is stored
as a list of trapezoidal panels and the iteration never fixes a truncation
order up front. The iteration is resumable: stepping a returned state
further is bitwise identical to having asked for more steps initially.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ZeroStart
from .kernels import reduced_qr
from .model import BlockVector


@dataclass
class ArnoldiState:
    """Basis panels, rectangular block Hessenberg and deflation bookkeeping.

    After k steps there are k+1 panels; panel j has shape ((j+1) n, w_j).
    ``H`` holds the rectangular block Hessenberg: block row j spans
    ``offsets[j]:offsets[j+1]`` and block column i (for step i+1) has the
    width of the panel it propagated.
    """

    ctx: object
    k: int
    panels: list
    widths: list
    H: np.ndarray
    R0_tilde: np.ndarray
    deflation_log: list = field(default_factory=list)

    @property
    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.widths)])

    def hess_rect(self, k=None):
        """The rectangular block Hessenberg for the leading k steps."""
        k = self.k if k is None else k
        off = self.offsets
        return self.H[: off[k + 1], : off[k]]

    def hess_square(self, k=None):
        """The square projection matrix for the leading k steps."""
        k = self.k if k is None else k
        off = self.offsets
        return self.H[: off[k], : off[k]]

    def stacked_basis(self, num_panels=None):
        """Dense (num_panels * n) x cols basis matrix, zeros included."""
        num_panels = len(self.panels) if num_panels is None else num_panels
        n = self.ctx.n
        off = self.offsets
        V = np.zeros((num_panels * n, off[num_panels]))
        for j in range(num_panels):
            P = self.panels[j]
            V[: P.shape[0], off[j] : off[j + 1]] = P
        return V

    def project_blocks(self, bv, num_panels):
        """V_k^T bv for a block vector, touching only overlapping rows."""
        out = []
        for j in range(num_panels):
            P = self.panels[j]
            rows = min(P.shape[0], bv.data.shape[0])
            out.append(P[:rows].T @ bv.data[:rows])
        return np.vstack(out)


def arnoldi_init(ctx):
    """Panel 0 from the reduced QR of the starting block x_0 = R_0^{-1} B."""
    x0 = ctx.starting_block()
    Q0, R0t, dropped = reduced_qr(x0)
    if Q0.shape[1] == 0:
        raise ZeroStart("starting block deflated to zero columns")
    log = []
    if any(dropped):
        log.append((0, [j for j, d in enumerate(dropped) if d]))
    return ArnoldiState(
        ctx=ctx,
        k=0,
        panels=[Q0],
        widths=[Q0.shape[1]],
        H=np.zeros((Q0.shape[1], 0)),
        R0_tilde=R0t,
        deflation_log=log,
    )


def arnoldi_step(state):
    """One iteration: propagate the newest panel through G, orthogonalize,
    normalize, and extend the block Hessenberg. Mutates and returns state.

    Orthogonalization is classical Gram-Schmidt applied twice, which keeps
    the basis orthonormal to near machine precision. A step whose panel
    deflates entirely appends a zero-width column and is logged; the
    iteration stays well defined with narrower blocks.
    """
    ctx = state.ctx
    i = state.k + 1
    newest = state.panels[-1]
    W = ctx.apply_G(BlockVector(newest, ctx.n))
    Wd = W.data
    w_in = Wd.shape[1]
    coeffs = [np.zeros((w, w_in)) for w in state.widths]
    for _ in range(2):
        hs = []
        for P in state.panels:
            rows = P.shape[0]
            hs.append(P.T @ Wd[:rows])
        for P, h in zip(state.panels, hs):
            Wd[: P.shape[0]] -= P @ h
        for c, h in zip(coeffs, hs):
            c += h
    Qi, Ri, dropped = reduced_qr(Wd)
    if any(dropped):
        state.deflation_log.append((i, [j for j, d in enumerate(dropped) if d]))
    w_new = Qi.shape[1]
    old_rows, old_cols = state.H.shape
    H = np.zeros((old_rows + w_new, old_cols + w_in))
    H[:old_rows, :old_cols] = state.H
    if coeffs:
        H[:old_rows, old_cols:] = np.vstack(coeffs)
    H[old_rows:, old_cols:] = Ri
    state.H = H
    state.panels.append(Qi)
    state.widths.append(w_new)
    state.k = i
    return state


def arnoldi_run(ctx, k):
    """k steps from a fresh start."""
    if k < 1:
        raise ValueError("k must be at least 1")
    state = arnoldi_init(ctx)
    for _ in range(k):
        arnoldi_step(state)
    return state
