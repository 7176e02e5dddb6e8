"""Built-in benchmark systems.

All generators return a validated :class:`DelaySystem`. The PDE variants
are heat-rod models with distributed delayed feedback, discretized in
space by central differences on [0, pi] with both ends clamped; their
size is configurable and the matrices are assembled sparse.
"""

import numpy as np
import scipy.sparse as sp

from .model import DelaySystem

EXAMPLE_NAMES = ("didactic", "didactic2", "heat-exchanger", "pde1", "pde2")


def didactic():
    """Scalar system x'(t) = x(t)/2 - x(t-1) + u(t), y = x."""
    return DelaySystem(
        A=([[0.5]], [[-1.0]]),
        taus=(1.0,),
        B=[[1.0]],
        C=[[1.0]],
    ).require_valid()


def didactic2():
    """3-state single-delay system with a rank-one delayed coefficient."""
    A0 = [
        [-0.08, -0.03, 0.2],
        [0.2, -0.04, -0.005],
        [-0.06, 0.2, -0.07],
    ]
    A1 = [
        [-0.0471, -0.0504, -0.0602],
        [-0.0942, -0.1008, -0.1204],
        [0.0471, 0.0504, 0.0602],
    ]
    return DelaySystem(
        A=(A0, A1),
        taus=(5.0,),
        B=[[1.0], [1.0], [1.0]],
        C=[[1.0, 0.0, 0.0]],
    ).require_valid()


def heat_exchanger():
    """Closed-loop heat exchanger model: n = 5 states, m = 7 delays."""
    entries = {
        0: {(2, 1): 1.0 / 3.0, (2, 2): -2.0 / 3.0, (3, 3): -1.0 / 3.0, (5, 4): -1.0},
        1: {(4, 3): 0.0324},
        2: {(1, 1): -0.07142857143},
        3: {(4, 4): -0.04},
        4: {(2, 4): 1.0 / 3.0},
        5: {
            (1, 1): -0.01219364644,
            (1, 2): -0.05460277319,
            (1, 3): -0.1005215423,
            (1, 4): -0.1290047174,
            (1, 5): 0.005063395489,
        },
        6: {(3, 2): 0.3133333333},
        7: {(1, 2): 0.01714285714},
    }
    A = []
    for i in range(8):
        Ai = np.zeros((5, 5))
        for (row, col), value in entries[i].items():
            Ai[row - 1, col - 1] = value
        A.append(Ai)
    B = np.array([[0.0278571429], [0.0], [0.0], [0.0], [0.0]])
    return DelaySystem(
        A=tuple(A),
        taus=(2.8, 6.5, 9.2, 13.0, 13.2, 18.0, 40.0),
        B=B,
        C=np.eye(5),
    ).require_valid()


def _rod_laplacian(n):
    scale = ((n - 1) / np.pi) ** 2
    main = np.full(n, -2.0)
    off = np.ones(n - 1)
    return scale * sp.diags([off, main, off], [-1, 0, 1], format="csr")


def _rod_output(n):
    c = np.ones((1, n)) / np.sqrt(n)
    return c


def pde1(n=200):
    """Heat rod with proportional, localized delayed feedback -x v(x, t-1) / 4."""
    if n < 3:
        raise ValueError("n must be at least 3")
    x = np.linspace(0.0, np.pi, n)
    A1 = sp.diags(-0.25 * x, format="csr")
    C = _rod_output(n)
    return DelaySystem(
        A=(_rod_laplacian(n), A1),
        taus=(1.0,),
        B=C.T.copy(),
        C=C,
    ).require_valid()


def pde2(n=200):
    """Heat rod with Pyragas-type non-localized delayed feedback."""
    if n < 3:
        raise ValueError("n must be at least 3")
    j = np.arange(n)
    profile = np.sin(j * np.pi / (n - 1))
    profile[0] = 0.0
    profile[-1] = 0.0
    A0 = _rod_laplacian(n) - 2.0 * sp.diags(profile, format="csr")
    # Anti-diagonal counterpart: couples x to pi - x.
    A1 = 2.0 * sp.csr_matrix(
        (profile, (j, n - 1 - j)), shape=(n, n)
    )
    C = _rod_output(n)
    return DelaySystem(
        A=(A0, A1),
        taus=(1.0,),
        B=C.T.copy(),
        C=C,
    ).require_valid()


def get_example(name, n=200):
    """Look up a generator by CLI name."""
    if name == "didactic":
        return didactic()
    if name == "didactic2":
        return didactic2()
    if name == "heat-exchanger":
        return heat_exchanger()
    if name == "pde1":
        return pde1(n)
    if name == "pde2":
        return pde2(n)
    raise KeyError(f"unknown example {name!r}; choose from {', '.join(EXAMPLE_NAMES)}")
