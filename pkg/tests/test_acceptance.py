"""Acceptance suite: one test per criterion (split where a criterion has
independent sub-assertions), each printing a PASS line with the measured
value at the stated tolerance. Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from delaylyap import (
    DelaySystem,
    PencilContext,
    SolveOptions,
    arnoldi_run,
    benchmarks,
    build_discretization,
    characteristic_roots,
    delay_lyapunov_quadrature,
    eval_P,
    eval_P_grid,
    h2_norm,
    h2_quadrature,
    integrate_fundamental,
    low_rank_delay_lyapunov,
    lyap_residual_norm,
    reduced_transfer,
    reference_P_grid,
    reference_lyapunov,
)
from delaylyap.arnoldi import arnoldi_step
from delaylyap.kernels import solve_lyapunov_dense
from delaylyap.lyap import _hk_blocks, approx_from_state
from delaylyap.pencil import dense_F, dense_G, dense_H


def report(criterion, message):
    print(f"ACCEPTANCE {criterion}: PASS - {message}")


def fit_slope(params, errors):
    return float(np.polyfit(np.log(np.asarray(params, float)), np.log(errors), 1)[0])


@pytest.fixture(scope="module")
def didactic_oracle():
    """Quadrature oracle for the didactic system: K at h = 5e-4 and the
    2001-point P(t) grid on [0, 2] (fine enough to catch the error peak
    drifting into the kink at t = 1)."""
    system = benchmarks.didactic()
    ks = integrate_fundamental(system, 5e-4, 120.0)
    ts = np.linspace(0.0, 2.0, 2001)
    P = np.array([delay_lyapunov_quadrature(ks, [[1.0]], t)[0, 0] for t in ts])
    return ks, ts, P


@pytest.fixture(scope="module")
def heat_exchanger_state():
    return arnoldi_run(PencilContext(benchmarks.heat_exchanger()), 300)


def test_criterion_1_characteristic_roots():
    t0 = time.perf_counter()
    state = arnoldi_run(PencilContext(benchmarks.didactic()), 30)
    est = characteristic_roots(state, count=2)
    elapsed = time.perf_counter() - t0
    target = -0.1629 + 0.9725j
    dist = min(min(abs(r - target), abs(r - target.conjugate())) for r in est.roots)
    assert dist < 1e-3
    assert est.stable
    assert elapsed < 1.0
    report(1, f"rightmost root within {dist:.2e} of -0.1629+0.9725j in {elapsed:.2f}s")


def _dense_didactic_errors(didactic_oracle):
    _, ts, P_oracle = didactic_oracle
    Pmax = np.max(np.abs(P_oracle))
    Ns = [8, 16, 32, 64, 128]
    err_p, err_h2 = [], []
    system = benchmarks.didactic()
    for N in Ns:
        ref = build_discretization(system, N)
        P_N = reference_lyapunov(ref)
        vals = reference_P_grid(ref, P_N, ts)[:, 0, 0]
        err_p.append(np.max(np.abs(vals - P_oracle)) / Pmax)
        err_h2.append(abs(vals[0] - P_oracle[0]) / abs(P_oracle[0]))
    return Ns, err_p, err_h2


def test_criterion_2a_dense_convergence_P(didactic_oracle):
    t0 = time.perf_counter()
    Ns, err_p, _ = _dense_didactic_errors(didactic_oracle)
    slope = fit_slope(Ns, err_p)
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    assert -2.4 <= slope <= -1.6, f"max-error slope {slope:.3f} outside -2 +/- 0.4"
    report("2a", f"dense P(t) error slope {slope:.3f} (target -2 +/- 0.4) in {elapsed:.1f}s")


def test_criterion_2b_dense_convergence_h2(didactic_oracle):
    # The squared-norm error at t = 0 against the quadrature oracle.
    Ns, _, err_h2 = _dense_didactic_errors(didactic_oracle)
    slope = fit_slope(Ns, err_h2)
    assert -3.5 <= slope <= -2.5, (
        f"P(0) error slope {slope:.3f} outside -3 +/- 0.5; measured errors "
        f"{['%.2e' % e for e in err_h2]} sit at the oracle's own accuracy floor "
        "because the collocation boundary value superconverges"
    )
    report("2b", f"dense P(0) error slope {slope:.3f} (target -3 +/- 0.5)")


def _heat_exchanger_errors(heat_exchanger_state):
    state = heat_exchanger_state
    reference = approx_from_state(state, 150)
    ts = np.linspace(0.0, 50.0, 501)
    P_ref = eval_P_grid(reference, ts)
    Pmax = np.max(np.abs(P_ref))
    h2_ref = h2_norm(reference)
    ks = list(range(10, 101, 10))
    err_p, err_h2 = [], []
    for k in ks:
        approx = approx_from_state(state, k)
        err_p.append(np.max(np.abs(eval_P_grid(approx, ts) - P_ref)) / Pmax)
        err_h2.append(abs(h2_norm(approx) - h2_ref) / h2_ref)
    return ks, err_p, err_h2


def test_criterion_3a_krylov_convergence_P(heat_exchanger_state):
    t0 = time.perf_counter()
    ks, err_p, _ = _heat_exchanger_errors(heat_exchanger_state)
    slope = fit_slope(ks, err_p)
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    assert -2.6 <= slope <= -1.4, (
        f"P(t) error slope {slope:.3f} outside -2 +/- 0.6; the k = 10 point is "
        f"pre-asymptotic (errors {['%.2e' % e for e in err_p]})"
    )
    report("3a", f"Krylov P(t) error slope {slope:.3f} (target -2 +/- 0.6) in {elapsed:.1f}s")


def test_criterion_3b_krylov_convergence_h2(heat_exchanger_state):
    ks, _, err_h2 = _heat_exchanger_errors(heat_exchanger_state)
    slope = fit_slope(ks, err_h2)
    assert -3.6 <= slope <= -2.4, f"H2 error slope {slope:.3f} outside -3 +/- 0.6"
    report("3b", f"Krylov H2 error slope {slope:.3f} (target -3 +/- 0.6)")


def test_criterion_3c_h2_error_at_k100(heat_exchanger_state):
    ks, _, err_h2 = _heat_exchanger_errors(heat_exchanger_state)
    final = err_h2[ks.index(100)]
    assert final <= 1e-7
    report("3c", f"relative H2 error at k=100 is {final:.2e} (limit 1e-7)")


def test_criterion_4_residual_identity():
    t0 = time.perf_counter()
    ctx = PencilContext(benchmarks.didactic2())
    state = arnoldi_run(ctx, 11)
    k, N = 10, 25
    Gk = np.array(state.hess_square(k))
    Hk = _hk_blocks(state, k)
    Qk = solve_lyapunov_dense(Gk, Hk @ Hk.T)
    small = lyap_residual_norm(state, Qk, Hk)
    G = dense_G(ctx, N)
    H = dense_H(ctx, N)
    V = state.stacked_basis(k)
    Vfull = np.zeros(((N + 1) * ctx.n, V.shape[1]))
    Vfull[: V.shape[0]] = V
    Qfull = Vfull @ Qk @ Vfull.T
    direct = np.linalg.norm(G @ Qfull + Qfull @ G.T + H @ H.T, 2)
    # relative to the scale of the quantities entering the formula: the
    # residual itself is a cancelled difference of Q-sized terms
    scale = np.linalg.norm(state.hess_rect(k), 2) * np.linalg.norm(Qk, 2) + np.linalg.norm(
        Hk @ Hk.T, 2
    )
    elapsed = time.perf_counter() - t0
    assert abs(direct - small) <= 1e-12 * scale
    # also tight relative to the residual value itself (measured ~7e-10)
    assert abs(direct - small) <= 1e-7 * small
    assert elapsed < 5.0
    report(
        4,
        f"|direct - projected| = {abs(direct - small):.2e} "
        f"({abs(direct - small) / small:.1e} of the value, data scale {scale:.1e})",
    )


def test_criterion_5_similarity_identity():
    t0 = time.perf_counter()
    system = benchmarks.didactic()
    ref = build_discretization(system, 10)
    ctx = PencilContext(system)
    eA = np.sort_complex(np.linalg.eigvals(ref.A_N))
    eG = np.sort_complex(1.0 / np.linalg.eigvals(dense_G(ctx, 10)))
    gap = float(np.max(np.abs(eA - eG)))
    elapsed = time.perf_counter() - t0
    assert gap <= 1e-8
    assert elapsed < 1.0
    report(5, f"eig(A_N) vs 1/eig(G_N) max gap {gap:.2e} (limit 1e-8)")


def test_criterion_6_moment_matching():
    t0 = time.perf_counter()
    state = arnoldi_run(PencilContext(benchmarks.didactic()), 6)
    from delaylyap.lyap import _reduced_matrices

    F, G, H = _reduced_matrices(state)

    def upsilon(s):
        return 1.0 / (s - 0.5 + math.exp(-s))

    # order-8/6 central stencils, step 1e-2
    h = 1e-2
    offsets = np.arange(-4, 5)
    weights = {
        1: np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0, 4 / 5, -1 / 5, 4 / 105, -1 / 280]),
        2: np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560]),
        3: np.array([-7 / 240, 3 / 10, -169 / 120, 61 / 30, 0, -61 / 30, 169 / 120, -3 / 10, 7 / 240]),
        4: np.array([7 / 240, -2 / 5, 169 / 60, -122 / 15, 91 / 8, -122 / 15, 169 / 60, -2 / 5, 7 / 240]),
    }
    samples = np.array([upsilon(o * h) for o in offsets])
    Gpow = np.eye(G.shape[0])
    worst = 0.0
    for i in range(5):
        reduced = float((-math.factorial(i) * F @ Gpow @ H)[0, 0])
        fd = upsilon(0.0) if i == 0 else float(weights[i] @ samples) / h**i
        # derivative 1 is exactly zero; floor the denominator accordingly
        rel = abs(reduced - fd) / max(abs(fd), 1.0)
        worst = max(worst, rel)
        assert rel <= 1e-6, f"derivative {i}: reduced {reduced} vs finite differences {fd}"
        Gpow = Gpow @ G
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    report(6, f"derivatives 0..4 match within {worst:.2e} (limit 1e-6)")


def test_criterion_7_invariant_suite():
    t0 = time.perf_counter()
    cases = [
        (benchmarks.didactic(), 30, 40),
        (benchmarks.didactic2(), 25, 30),
        (benchmarks.heat_exchanger(), 40, 81),
    ]
    for system, steps, N in cases:
        ctx = PencilContext(system)
        state = arnoldi_run(ctx, steps)
        V = state.stacked_basis()
        orth = np.linalg.norm(V.T @ V - np.eye(V.shape[1]))
        assert orth <= 1e-10
        G = dense_G(ctx, N)
        Vk = np.zeros(((N + 1) * ctx.n, state.offsets[steps]))
        Vk[: steps * ctx.n] = state.stacked_basis(steps)
        Vk1 = np.zeros(((N + 1) * ctx.n, state.offsets[steps + 1]))
        Vk1[: (steps + 1) * ctx.n] = state.stacked_basis(steps + 1)
        Hr = state.hess_rect()
        rel = np.linalg.norm(G @ Vk - Vk1 @ Hr)
        assert rel <= 1e-10 * max(np.linalg.norm(Hr), 1.0)
        k = steps // 2
        approx = approx_from_state(state, k)
        P0 = eval_P(approx, 0.0)
        assert np.linalg.norm(P0 - P0.T) <= 1e-12 * np.linalg.norm(P0)
        eig = np.linalg.eigvalsh(P0)
        assert eig.min() >= -1e-12 * max(np.abs(eig).max(), 1e-300)
        C = np.atleast_2d(np.asarray(system.C))
        trace_direct = float(np.trace(C @ P0 @ C.T))
        trace_proj = h2_norm(approx) ** 2
        assert abs(trace_proj - trace_direct) <= 1e-11 * abs(trace_direct)
        # nesting: truncations are exact leading submatrices
        from delaylyap.pencil import dense_pi, dense_sigma

        S_small, S_big = dense_sigma(ctx, 6), dense_sigma(ctx, 12)
        assert np.array_equal(S_small, S_big[: S_small.shape[0], : S_small.shape[1]])
        P_small = dense_pi(6, ctx.tau_max, ctx.n)
        P_big = dense_pi(12, ctx.tau_max, ctx.n)
        assert np.array_equal(P_small, P_big[: P_small.shape[0], : P_small.shape[1]])
        F_small, F_big = dense_F(ctx, 6), dense_F(ctx, 12)
        assert np.array_equal(F_small, F_big[:, : F_small.shape[1]])
        H_small, H_big = dense_H(ctx, 6), dense_H(ctx, 12)
        assert np.array_equal(H_small, H_big[: H_small.shape[0]])
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    report(7, f"orthonormality/relation/PSD/trace/nesting hold on 3 systems in {elapsed:.1f}s")


def test_criterion_8_oracle_triangle(didactic_oracle):
    t0 = time.perf_counter()
    ks, _, _ = didactic_oracle
    system = benchmarks.didactic()
    P0_quad = delay_lyapunov_quadrature(ks, [[1.0]], 0.0)[0, 0]
    ref = build_discretization(system, 512)
    P_N = reference_lyapunov(ref)
    P0_dense = (ref.E_N.T @ P_N @ ref.E_N)[0, 0]
    approx = low_rank_delay_lyapunov(system, SolveOptions(k=40))
    P0_krylov = eval_P(approx, 0.0)[0, 0]
    pairs = {
        "quad-dense": abs(P0_quad - P0_dense) / abs(P0_quad),
        "quad-krylov": abs(P0_quad - P0_krylov) / abs(P0_quad),
        "dense-krylov": abs(P0_dense - P0_krylov) / abs(P0_dense),
    }
    assert all(v <= 1e-4 for v in pairs.values()), pairs
    # time-domain vs frequency-domain H2
    K = ks.samples[:, 0, 0]
    w = np.full(K.shape[0], ks.step)
    w[0] = w[-1] = ks.step / 2
    h2_time = float(np.sqrt(np.sum(w * K**2)))
    h2_freq = h2_quadrature(system, omega_max=1e4, points=8192)
    gap = abs(h2_time - h2_freq) / h2_freq
    elapsed = time.perf_counter() - t0
    assert gap <= 1e-4
    assert elapsed < 60.0
    worst = max(pairs.values())
    report(8, f"P(0) triangle within {worst:.2e}, H2 time-vs-frequency within {gap:.2e}")


@pytest.fixture(scope="module")
def pde2_run():
    system = benchmarks.pde2(2000)
    t0 = time.perf_counter()
    ctx = PencilContext(system)
    state = arnoldi_run(ctx, 120)
    approx60 = approx_from_state(state, 60)
    h2_60 = h2_norm(approx60)
    elapsed60 = time.perf_counter() - t0
    while state.k < 180:
        arnoldi_step(state)
    h2_90 = h2_norm(approx_from_state(state, 90))
    return h2_60, h2_90, elapsed60


def test_criterion_9a_scale_smoke_runtime(pde2_run):
    _, _, elapsed60 = pde2_run
    assert elapsed60 < 60.0
    report("9a", f"pde2 n=2000, k=60 completed in {elapsed60:.1f}s (limit 60s)")


def test_criterion_9b_scale_self_convergence(pde2_run):
    h2_60, h2_90, _ = pde2_run
    gap = abs(h2_60 - h2_90) / h2_90
    assert gap <= 1e-6, (
        f"|h2(60) - h2(90)| / h2(90) = {gap:.2e} exceeds 1e-6; the H2 value for this "
        "PDE converges slowly and non-monotonically in k"
    )
    report("9b", f"pde2 self-convergence gap {gap:.2e} (limit 1e-6)")


def test_criterion_10_cli_contract(tmp_path):
    t0 = time.perf_counter()
    args = ["lyap", "--example", "didactic", "--k", "8", "--t-max", "1", "--samples", "11"]
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "delaylyap.cli", *args, "--out", str(out)],
            capture_output=True,
            timeout=120,
        )
        assert proc.returncode == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]

    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    proc = subprocess.run(
        [sys.executable, "-m", "delaylyap.cli", "h2", str(bad)],
        capture_output=True,
        timeout=120,
    )
    assert proc.returncode == 2

    unstable = tmp_path / "unstable.json"
    unstable.write_text(
        json.dumps(
            {"n": 1, "m": 1, "delays": [1.0], "A0": [[1.5]], "A1": [[-1.0]],
             "B": [[1.0]], "C": [[1.0]]}
        )
    )
    proc = subprocess.run(
        [sys.executable, "-m", "delaylyap.cli", "h2", str(unstable), "--k", "15"],
        capture_output=True,
        timeout=120,
    )
    assert proc.returncode == 3

    proc = subprocess.run(
        [sys.executable, "-m", "delaylyap.cli", "h2", "--example", "heat-exchanger",
         "--tol", "1e-14", "--max-k", "10"],
        capture_output=True,
        timeout=120,
    )
    assert proc.returncode == 4
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    report(10, f"byte-identical CSV and exit codes 2/3/4 verified in {elapsed:.1f}s")
