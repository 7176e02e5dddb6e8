"""Chebyshev polynomials, the collocation mesh and barycentric interpolation.

The mesh consists of the scaled and shifted points

    theta_i = (tau_max / 2) * (-cos(pi * i / (N + 1)) - 1),   i = 1 .. N+1,

which lie in (-tau_max, 0] with theta_{N+1} = 0. Interpolation and
differentiation on the mesh use the barycentric form, which stays stable
for N in the hundreds.
"""

from dataclasses import dataclass

import numpy as np


def cheb_t(i, x):
    """Chebyshev polynomial of the first kind T_i(x) via the three-term recurrence."""
    if i < 0:
        raise ValueError("order must be nonnegative")
    x = np.asarray(x, dtype=float)
    t_prev = np.ones_like(x)
    if i == 0:
        return t_prev if t_prev.ndim else float(t_prev)
    t_cur = x.copy()
    for _ in range(i - 1):
        t_prev, t_cur = t_cur, 2.0 * x * t_cur - t_prev
    return t_cur if t_cur.ndim else float(t_cur)


def cheb_u(i, x):
    """Chebyshev polynomial of the second kind U_i(x), U_0 = 1, U_1 = 2x."""
    if i < 0:
        raise ValueError("order must be nonnegative")
    x = np.asarray(x, dtype=float)
    u_prev = np.ones_like(x)
    if i == 0:
        return u_prev if u_prev.ndim else float(u_prev)
    u_cur = 2.0 * x
    for _ in range(i - 1):
        u_prev, u_cur = u_cur, 2.0 * x * u_cur - u_prev
    return u_cur if u_cur.ndim else float(u_cur)


@dataclass(frozen=True)
class Mesh:
    """Collocation mesh of N+1 strictly increasing points in (-tau_max, 0]."""

    N: int
    tau_max: float
    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float))


def build_mesh(N, tau_max):
    """Build the mesh of N+1 points; the last point is exactly zero."""
    if N < 1:
        raise ValueError("N must be at least 1")
    if tau_max <= 0:
        raise ValueError("tau_max must be positive")
    i = np.arange(1, N + 2)
    alpha = -np.cos(np.pi * i / (N + 1))
    points = 0.5 * tau_max * (alpha - 1.0)
    points[-1] = 0.0
    return Mesh(N=N, tau_max=float(tau_max), points=points)


def _bary_weights(points):
    """Barycentric weights w_k = 1 / prod_{j != k} (x_k - x_j), scaled to unit max.

    Accumulated in log magnitude so the products neither overflow nor
    underflow for large N or wide meshes.
    """
    x = np.asarray(points, dtype=float)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    log_w = -np.sum(np.log(np.abs(diff)), axis=1)
    sign = np.prod(np.sign(diff), axis=1)
    return sign * np.exp(log_w - np.max(log_w))


def diff_matrix(mesh):
    """Full (N+1) x (N+1) differentiation matrix D[i, k] = l_k'(theta_i).

    Rows sum to zero exactly: the diagonal is the negative off-diagonal
    row sum, since differentiating the constant interpolant gives zero.
    """
    x = mesh.points
    w = _bary_weights(x)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (w[None, :] / w[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -np.sum(D, axis=1))
    return D


def lagrange_eval_weights(mesh, theta):
    """Values (l_1(theta), ..., l_{N+1}(theta)) of the Lagrange basis at theta.

    Returns the exact indicator vector when theta coincides with a mesh
    point; otherwise uses the second barycentric formula, whose weights
    always sum to one.
    """
    x = mesh.points
    theta = float(theta)
    slack = 1e-12 * mesh.tau_max
    if theta < -mesh.tau_max - slack or theta > slack:
        raise ValueError("theta outside [-tau_max, 0]")
    hit = np.nonzero(x == theta)[0]
    if hit.size:
        out = np.zeros_like(x)
        out[hit[0]] = 1.0
        return out
    w = _bary_weights(x)
    terms = w / (theta - x)
    return terms / terms.sum()
