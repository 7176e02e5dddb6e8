"""Brute-force references: time stepping of the fundamental solution,
quadrature of the defining integral for P(t), and frequency-domain
quadrature for the H2 norm.

These exist to check the production paths, so they favor predictability
over speed: fixed-step RK4 with delays snapped to the grid, trapezoidal
sums on the stored grid, and plain interval-doubling in frequency.
"""

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, HorizonTooShort, SingularShift
from .model import to_dense

TRUNCATION_RATIO = 1e-8

# Cubic interpolation at the midpoint of the two middle nodes of an
# equispaced 4-point stencil, and at the midpoint of the first pair.
_W_CENTERED = np.array([-1.0, 9.0, 9.0, -1.0]) / 16.0
_W_LEFT_EDGE = np.array([5.0, 15.0, -5.0, 1.0]) / 16.0


@dataclass(frozen=True)
class FundamentalSolution:
    """Samples K(j h), j = 0 .. T/h, with K(0) = I and K = 0 for t < 0."""

    step: float
    horizon: float
    samples: np.ndarray


def _grid_multiple(value, h, what):
    d = int(round(value / h))
    if abs(value - d * h) > 1e-12 * max(abs(value), 1.0):
        raise GridMismatch(f"{what} = {value} is not a multiple of the step {h}")
    return d


def integrate_fundamental(system, h, T):
    """Fixed-step RK4 for the matrix fundamental solution.

    Delays must be integer multiples of h (and h at most tau_1 / 10), so
    full-step delayed values are exact grid lookups; half-step stage values
    come from cubic interpolation of the stored history. The value jump of
    K at time zero is respected by using the left limit (zero) when a step
    ends exactly on a delay multiple.
    """
    system.require_valid()
    h = float(h)
    if h <= 0 or h > system.taus[0] / 10 * (1 + 1e-12):
        raise ValueError("step must satisfy 0 < h <= tau_1 / 10")
    delays = [_grid_multiple(tau, h, "delay") for tau in system.taus]
    steps = int(round(T / h))
    n = system.n
    A0 = to_dense(system.A[0])
    Ad = [to_dense(Ai) for Ai in system.A[1:]]
    K = np.zeros((steps + 1, n, n))
    K[0] = np.eye(n)

    def delayed_exact(idx, left_limit):
        if idx < 0 or (left_limit and idx == 0):
            return None
        return K[idx]

    def delayed_half(base):
        # Value at (base + 1/2) h; negative arguments are in the zero tail.
        if base < 0:
            return None
        if base == 0:
            stencil, w = K[0:4], _W_LEFT_EDGE
        else:
            stencil, w = K[base - 1 : base + 3], _W_CENTERED
        return np.einsum("i,ijk->jk", w, stencil)

    def rhs(y, vals):
        out = A0 @ y
        for Ai, v in zip(Ad, vals):
            if v is not None:
                out = out + Ai @ v
        return out

    for j in range(steps):
        v_start = [delayed_exact(j - d, left_limit=False) for d in delays]
        v_half = [delayed_half(j - d) for d in delays]
        v_end = [delayed_exact(j + 1 - d, left_limit=True) for d in delays]
        y = K[j]
        k1 = rhs(y, v_start)
        k2 = rhs(y + 0.5 * h * k1, v_half)
        k3 = rhs(y + 0.5 * h * k2, v_half)
        k4 = rhs(y + h * k3, v_end)
        K[j + 1] = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return FundamentalSolution(step=h, horizon=steps * h, samples=K)


def delay_lyapunov_quadrature(ks, B, t):
    """P(t) = int_0^inf K(s) B B^T K^T(s + t) ds by trapezoid on the grid.

    The horizon must be long enough that the final sample has decayed to
    TRUNCATION_RATIO of the peak, otherwise the truncated tail would
    pollute the reference.
    """
    h = ks.step
    jt = _grid_multiple(float(t), h, "t")
    if t < 0:
        raise ValueError("t must be nonnegative")
    K = ks.samples
    norms = np.linalg.norm(K, axis=(1, 2))
    if norms[-1] > TRUNCATION_RATIO * norms.max():
        raise HorizonTooShort(
            f"|K(T)| / max |K| = {norms[-1] / norms.max():.2e} exceeds {TRUNCATION_RATIO:.0e}; "
            "increase the horizon"
        )
    G = K @ to_dense(B)
    m = K.shape[0] - jt
    weights = np.full(m, h)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    return np.einsum("j,jik,jlk->il", weights, G[:m], G[jt:])


def _transfer_gain_sq(system, omegas):
    """Squared Frobenius norm of the transfer function on i * omegas."""
    n = system.n
    A0 = to_dense(system.A[0]).astype(complex)
    Ad = [to_dense(Ai).astype(complex) for Ai in system.A[1:]]
    B = to_dense(system.B).astype(complex)
    C = to_dense(system.C).astype(complex)
    out = np.empty(len(omegas))
    chunk = max(1, int(2e6 / (n * n)))
    for lo in range(0, len(omegas), chunk):
        w = np.asarray(omegas[lo : lo + chunk])
        M = 1j * w[:, None, None] * np.eye(n) - A0
        for Ai, tau in zip(Ad, system.taus):
            M -= Ai * np.exp(-1j * w * tau)[:, None, None]
        try:
            X = np.linalg.solve(M, np.broadcast_to(B, (len(w), n, B.shape[1])))
        except np.linalg.LinAlgError as exc:
            raise SingularShift("characteristic matrix singular on the grid") from exc
        Y = C @ X
        out[lo : lo + chunk] = np.sum(np.abs(Y) ** 2, axis=(1, 2))
    return out


def h2_quadrature(system, omega_max=1e4, points=4096, rel_tol=1e-9):
    """H2 norm by trapezoid over [0, omega_max] with interval doubling.

    The integrand is even in omega, so only the positive axis is sampled;
    the tail beyond omega_max is the analytic 1/omega estimate driven by
    the first moment at infinity, |C B|_F^2 / omega_max.
    """
    system.require_valid()
    omega_max = float(omega_max)
    grid = np.linspace(0.0, omega_max, points + 1)
    vals = _transfer_gain_sq(system, grid)
    step = omega_max / points
    integral = step * (vals.sum() - 0.5 * (vals[0] + vals[-1]))
    while points < 2**22:
        mid = (grid[:-1] + grid[1:]) / 2.0
        refined = 0.5 * integral + 0.5 * step * _transfer_gain_sq(system, mid).sum()
        done = abs(refined - integral) <= rel_tol * max(abs(refined), 1e-300)
        integral = refined
        merged = np.empty(2 * points + 1)
        merged[0::2] = grid
        merged[1::2] = mid
        grid = merged
        points *= 2
        step *= 0.5
        if done:
            break
    CB = to_dense(system.C) @ to_dense(system.B)
    tail = float(np.sum(CB**2)) / omega_max
    return float(np.sqrt((integral + tail) / np.pi))
