"""Delay Lyapunov matrices and H2 norms for time-delay systems.

Library + CLI implementing a spectral-discretization / structured-pencil
approach: a dense reference path for small problems and a dynamic,
structure-exploiting block Arnoldi projection that scales to large sparse
systems with low-rank input.
"""

from .model import BlockVector, DelaySystem, ValidationReport, transpose_system, validate
from .chebyshev import Mesh, build_mesh, cheb_t, cheb_u, diff_matrix, lagrange_eval_weights
from .pencil import PencilContext
from .arnoldi import ArnoldiState, arnoldi_init, arnoldi_run, arnoldi_step
from .lyap import (
    LyapApprox,
    SolveOptions,
    approx_from_state,
    characteristic_roots,
    eval_P,
    eval_P_grid,
    h2_norm,
    low_rank_delay_lyapunov,
    lyap_residual_norm,
    reduced_transfer,
)
from .discretization import (
    DenseReference,
    build_discretization,
    discretized_h2,
    reference_P_grid,
    reference_P_of_t,
    reference_lyapunov,
    transfer_delay,
    transfer_discretized,
)
from .oracles import (
    FundamentalSolution,
    delay_lyapunov_quadrature,
    h2_quadrature,
    integrate_fundamental,
)
from . import benchmarks, errors

__all__ = [
    "ArnoldiState",
    "BlockVector",
    "DelaySystem",
    "DenseReference",
    "FundamentalSolution",
    "LyapApprox",
    "Mesh",
    "PencilContext",
    "SolveOptions",
    "ValidationReport",
    "approx_from_state",
    "arnoldi_init",
    "arnoldi_run",
    "arnoldi_step",
    "benchmarks",
    "build_discretization",
    "build_mesh",
    "cheb_t",
    "cheb_u",
    "characteristic_roots",
    "delay_lyapunov_quadrature",
    "diff_matrix",
    "discretized_h2",
    "errors",
    "eval_P",
    "eval_P_grid",
    "h2_norm",
    "h2_quadrature",
    "integrate_fundamental",
    "lagrange_eval_weights",
    "low_rank_delay_lyapunov",
    "lyap_residual_norm",
    "reduced_transfer",
    "reference_P_grid",
    "reference_P_of_t",
    "reference_lyapunov",
    "transfer_delay",
    "transfer_discretized",
    "transpose_system",
    "validate",
]

__version__ = "0.1.0"
