"""Low-rank delay Lyapunov matrices, H2 norms and root certificates.

The Arnoldi basis from :mod:`.arnoldi` turns the large structured Lyapunov
equation into a small projected one. With 2k iterations available, the
rank <= 2kr evaluation

    P_k(t) = L_k [I; 0] Q_k [I 0] exp(t G_{2k}^{-T}) L_k^T

needs only the n x 2kr factor L_k, the kr x kr solution Q_k of the
projected equation and the small projection matrix G_{2k}. Everything is
independent of the discretization order by construction.
"""

import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .arnoldi import arnoldi_init, arnoldi_run, arnoldi_step
from .errors import BudgetExhausted, ProjectedUnstable, SingularProjection
from .kernels import eigenvalues, guarded_solve, matrix_exponential, solve_lyapunov_dense
from .model import to_dense
from .pencil import PencilContext

RESIDUAL_CHECK_STRIDE = 5


@dataclass
class SolveOptions:
    """Either a fixed projection size k, or a residual tolerance with a cap.

    residual_tol is relative to the norm of the projected right-hand side
    H_k H_k^T; the dynamic mode checks it every few steps and stops at the
    first k that satisfies it.
    """

    k: int = None
    residual_tol: float = 1e-8
    max_k: int = 200
    t_grid: object = None

    def __post_init__(self):
        if self.k is None and self.residual_tol <= 0:
            raise ValueError("residual_tol must be positive")
        if self.max_k < 1:
            raise ValueError("max_k must be at least 1")


@dataclass
class LyapApprox:
    """Everything needed to evaluate P_k(t) and the H2 norm."""

    k: int
    L: np.ndarray
    Qk: np.ndarray
    G2k: np.ndarray
    Fk_out: np.ndarray
    Hk: np.ndarray
    residual_norm: float
    stable: bool
    split: int
    timings: dict = None

    def __post_init__(self):
        self._expm_cache = {}
        self._GinvT = None

    def _g_inv_t(self):
        if self._GinvT is None:
            try:
                self._GinvT = np.linalg.inv(self.G2k).T
            except np.linalg.LinAlgError as exc:
                raise SingularProjection("projection matrix is singular") from exc
        return self._GinvT


class RootEstimates(NamedTuple):
    roots: np.ndarray
    stable: bool


def _hk_blocks(state, k):
    """H_k = V_k^T H from the two nonzero blocks of H."""
    Hbv = state.ctx.build_H_blocks()
    return state.project_blocks(Hbv, k)


def _left_factor(state, num_panels):
    """[R_0 ... R_{p-1}] V_p assembled panel by panel (n x cols)."""
    ctx = state.ctx
    cols = []
    for j in range(num_panels):
        P = state.panels[j]
        cols.append(ctx.apply_F(P, j + 1))
    return np.hstack(cols)


def _certify(Gk, state):
    lam = eigenvalues(Gk)
    finite = np.abs(lam) > 1e3 * np.finfo(float).eps * max(np.max(np.abs(lam)), 1.0)
    if not np.all(finite) or np.any(lam.real >= 0.0):
        with np.errstate(divide="ignore", invalid="ignore"):
            roots = np.where(finite, 1.0 / lam, np.inf)
        raise ProjectedUnstable(
            "projected spectrum maps into the closed right half plane: the delay "
            "system is not exponentially stable or the projection has a spurious root",
            state=state,
            roots=roots[np.argsort(-roots.real)],
        )


def approx_from_state(state, k):
    """Build the rank <= 2kr approximation from a state with >= 2k steps."""
    if 2 * k > state.k:
        raise ValueError(f"need at least {2 * k} completed steps, have {state.k}")
    off = state.offsets
    split = int(off[k])
    G2k = np.array(state.hess_square(2 * k))
    Gk = G2k[:split, :split]
    _certify(Gk, state)
    Hk = _hk_blocks(state, k)
    Qk = solve_lyapunov_dense(Gk, Hk @ Hk.T)
    L = _left_factor(state, 2 * k)
    C = to_dense(state.ctx.system.C)
    Fk_out = C @ L[:, :split]
    residual = lyap_residual_norm(state, Qk, Hk)
    return LyapApprox(
        k=k,
        L=L,
        Qk=Qk,
        G2k=G2k,
        Fk_out=Fk_out,
        Hk=Hk,
        residual_norm=residual,
        stable=True,
        split=split,
        timings={},
    )


def low_rank_delay_lyapunov(system, opts=None):
    """Run the dynamic projection and return a :class:`LyapApprox`.

    With ``opts.k`` set, performs exactly 2k Arnoldi steps. Otherwise the
    iteration grows in increments, solving the projected equation and
    checking the Lyapunov residual until ``opts.residual_tol`` is met or
    ``opts.max_k`` exhausted.
    """
    opts = opts or SolveOptions()
    timings = {}
    t0 = time.perf_counter()
    ctx = PencilContext(system)
    timings["factorization_ms"] = 1e3 * (time.perf_counter() - t0)

    t0 = time.perf_counter()
    history = []
    if opts.k is not None:
        k = int(opts.k)
        if k < 1:
            raise ValueError("k must be at least 1")
        state = arnoldi_run(ctx, 2 * k)
    else:
        state = arnoldi_init(ctx)
        k = None
        while True:
            for _ in range(RESIDUAL_CHECK_STRIDE):
                arnoldi_step(state)
            cand = state.k
            Gc = np.array(state.hess_square(cand))
            _certify(Gc, state)
            Hc = _hk_blocks(state, cand)
            Qc = solve_lyapunov_dense(Gc, Hc @ Hc.T)
            res = lyap_residual_norm(state, Qc, Hc)
            scale = np.linalg.norm(Hc @ Hc.T, 2)
            history.append((cand, res))
            if res <= opts.residual_tol * scale:
                k = cand
                break
            if cand >= opts.max_k:
                raise BudgetExhausted(
                    f"residual {res:.3e} above {opts.residual_tol:.1e} * {scale:.3e} "
                    f"at the iteration cap k = {cand}",
                    residual=res,
                    k=cand,
                )
        while state.k < 2 * k:
            arnoldi_step(state)
    timings["arnoldi_ms"] = 1e3 * (time.perf_counter() - t0)

    t0 = time.perf_counter()
    approx = approx_from_state(state, k)
    timings["lyapunov_ms"] = 1e3 * (time.perf_counter() - t0)
    approx.timings = timings
    approx.timings["residual_history"] = history
    return approx


def eval_P(approx, t):
    """Evaluate the low-rank delay Lyapunov matrix at a time t >= 0."""
    if t < 0:
        raise ValueError("t must be nonnegative; use P(-t) = P(t)^T")
    L1 = approx.L[:, : approx.split]
    if t == 0:
        return L1 @ approx.Qk @ L1.T
    t = float(t)
    E = approx._expm_cache.get(t)
    if E is None:
        E = matrix_exponential(t * approx._g_inv_t())
        approx._expm_cache[t] = E
    right = E[: approx.split] @ approx.L.T
    return L1 @ (approx.Qk @ right)


def eval_P_grid(approx, ts):
    """Evaluate P_k on a whole time grid.

    For a uniformly spaced grid the semigroup is advanced by repeated
    application of the one-step operator exp(dt G_{2k}^{-T}) to the narrow
    right factor, needing a single matrix exponential overall. Non-uniform
    grids fall back to one exponential per distinct time.
    """
    ts = np.asarray(ts, dtype=float)
    if ts.ndim != 1 or ts.size == 0:
        raise ValueError("ts must be a nonempty 1-D array")
    if np.any(ts < 0):
        raise ValueError("times must be nonnegative; use P(-t) = P(t)^T")
    steps = np.diff(ts)
    uniform = ts.size > 2 and steps.size and np.allclose(steps, steps[0], rtol=1e-12, atol=0)
    if not uniform:
        return np.stack([eval_P(approx, t) for t in ts])
    L1 = approx.L[:, : approx.split]
    left = L1 @ approx.Qk
    n = L1.shape[0]
    Z = approx.L.T.copy()
    if ts[0] > 0:
        Z = matrix_exponential(ts[0] * approx._g_inv_t()) @ Z
    step_op = matrix_exponential(steps[0] * approx._g_inv_t())
    out = np.empty((len(ts), n, n))
    for idx, t in enumerate(ts):
        if idx:
            Z = step_op @ Z
        if t == 0:
            out[idx] = left @ L1.T
        else:
            out[idx] = left @ Z[: approx.split]
    return out


def h2_norm(approx):
    """H2 norm from the projected trace formula sqrt(tr(F_k Q_k F_k^T))."""
    if not approx.stable:
        raise ProjectedUnstable("no stability certificate for this approximation")
    value = float(np.trace(approx.Fk_out @ approx.Qk @ approx.Fk_out.T))
    return float(np.sqrt(max(value, 0.0)))


def _reduced_matrices(obj):
    if isinstance(obj, LyapApprox):
        return obj.Fk_out, obj.G2k[: obj.split, : obj.split], obj.Hk
    # An Arnoldi state: use every completed step as the projection size.
    k = obj.k
    Gk = np.array(obj.hess_square(k))
    Hk = _hk_blocks(obj, k)
    C = to_dense(obj.ctx.system.C)
    Fk = C @ _left_factor(obj, k)
    return Fk, Gk, Hk


def reduced_transfer(obj, s):
    """Reduced transfer function F_k (s G_k - I)^{-1} H_k at a complex s."""
    Fk, Gk, Hk = _reduced_matrices(obj)
    s = complex(s)
    M = s * Gk - np.eye(Gk.shape[0])
    X = guarded_solve(M.astype(complex), Hk.astype(complex), f"s G_k - I singular at s = {s}")
    return Fk @ X


def lyap_residual_norm(state, Qk, Hk):
    """Spectral norm of the structured-equation residual, from projected data.

    The residual of the full Lyapunov equation in G lies in the range of
    the k+1 leading basis panels, so its norm equals that of the small
    matrix assembled from the rectangular Hessenberg alone; the value does
    not depend on any truncation order.
    """
    kr = Qk.shape[0]
    off = state.offsets
    candidates = np.nonzero(off == kr)[0]
    if candidates.size == 0:
        raise ValueError("Qk size does not match any panel offset")
    k = int(candidates[0])
    rows = int(off[k + 1])
    M = state.hess_rect(k)
    S = np.zeros((rows, rows))
    S[:, :kr] = M @ Qk
    Hpad = np.zeros((rows, Hk.shape[1]))
    Hpad[:kr] = Hk
    R = S + S.T + Hpad @ Hpad.T
    return float(np.linalg.norm(R, 2))


def characteristic_roots(state, count=10):
    """Leading characteristic-root estimates and the stability certificate.

    Roots are the reciprocals of the eigenvalues of the projection matrix,
    sorted by real part (rightmost first). The certificate holds when every
    estimate lies strictly in the open left half plane.
    """
    lam = eigenvalues(state.hess_square(state.k))
    scale = max(float(np.max(np.abs(lam))), 1.0)
    finite = np.abs(lam) > 1e3 * np.finfo(float).eps * scale
    roots = 1.0 / lam[finite]
    order = np.argsort(-roots.real)
    roots = roots[order]
    stable = bool(np.all(finite) and np.all(roots.real < 0.0))
    return RootEstimates(roots=roots[:count], stable=stable)
