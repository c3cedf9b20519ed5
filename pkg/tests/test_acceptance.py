"""Acceptance gate: one test per release criterion, tolerances pinned.

Each test prints a single ``[acceptance] criterion N: PASS/FAIL`` line with
the measured quantity so the suite output doubles as a scorecard.  Two
criteria are currently red and intentionally left that way (the thresholds
are asserted as stated, not loosened):

* 06b: the trailing-update-free GEMM ratio at m = n = 2000, k = 64, b = 32
  measures ~0.643 against the required <= 0.6.  The bound is only reachable
  when the trailing update dominates (k approaching n); at k = 64 the shared
  sketch/sample costs keep the ratio above 0.6.
* 07b: rank-k approximation error vs the SVD oracle on the geometric
  spectrum measures up to ~1.27x against the required <= 1.10x.  A single
  QR refinement pass (j_max = 1) is not enough on slowly decaying spectra;
  stepped and cliff spectra pass at 1.0000x.
"""

import math

import numpy as np
import pytest

from rqrcp.analysis import (
    BiasExperimentConfig,
    TruncatedChiSq,
    selection_bias_experiment,
    tau_thresholds,
    trunc_chisq_mean,
    trunc_chisq_pdf,
)
from rqrcp.cli import main as cli_main
from rqrcp.counters import OpCounters
from rqrcp.harness import quality_sweep, synthetic_matrix
from rqrcp.kernels import apply_reflector, build_t_matrix, apply_block_reflection
from rqrcp.matio import load_matrix_market, load_pgm, save_matrix_market, save_pgm
from rqrcp.qrcp import (
    panel_householder,
    qr_blocked,
    qr_presorted,
    qrcp_blocked,
    qrcp_level2,
)
from rqrcp.randomized import (
    RandomizedConfig,
    SampleState,
    rqrcp,
    rsrqrcp,
    sample_update,
    select_pivots,
)
from rqrcp.rng import RngState, gaussian_matrix
from rqrcp.truncated import lq_factor, trqrcp, tuxv

from test_qrcp import greedy_pivot_oracle

EPS = np.finfo(np.float64).eps


def _report(criterion, ok, detail):
    print(f"[acceptance] criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


# ---------------------------------------------------------------------------


def test_criterion_01_reconstruction_and_orthogonality():
    """Every full factorization rebuilds A P and keeps Q orthonormal."""
    shapes = [(256, 256), (192, 256), (256, 192), (128, 128), (96, 64)]
    cfg_of = lambda seed: RandomizedConfig(block=32, padding=8, seed=seed)
    algos = {
        "qrcp_level2": lambda a, s: qrcp_level2(a),
        "qrcp": lambda a, s: qrcp_blocked(a),
        "qr": lambda a, s: qr_blocked(a),
        "qr_presorted": lambda a, s: qr_presorted(a),
        "rqrcp": lambda a, s: rqrcp(a, config=cfg_of(s)),
        "rsrqrcp": lambda a, s: rsrqrcp(a, config=cfg_of(s)),
    }
    worst_res = worst_orth = 0.0
    for idx in range(20):
        m, n = shapes[idx % len(shapes)]
        a = np.random.default_rng(idx).standard_normal((m, n))
        frob = np.linalg.norm(a)
        res_cap = 100 * EPS * max(m, n) * frob
        orth_cap = 100 * EPS * min(m, n)
        for name, run in algos.items():
            f = run(a, idx)
            assert f.rank == min(m, n), (name, idx)
            q = f.q_factor()
            res = np.linalg.norm(a[:, f.perm.forward] - q @ f.R)
            orth = np.linalg.norm(q.T @ q - np.eye(f.rank))
            worst_res = max(worst_res, res / res_cap)
            worst_orth = max(worst_orth, orth / orth_cap)
    ok = worst_res <= 1.0 and worst_orth <= 1.0
    _report(
        "01",
        ok,
        f"worst residual {worst_res:.3f}x cap, worst orthogonality "
        f"{worst_orth:.3f}x cap over 20 instances x 6 algorithms",
    )
    assert ok


def test_criterion_02_pivot_oracle_equivalence():
    """Blocked pivots == level-2 pivots == brute-force greedy recomputation."""
    checked = 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(4, 33))
        n = int(rng.integers(4, 33))
        a = rng.standard_normal((m, n))
        f2 = qrcp_level2(a)
        fb = qrcp_blocked(a, b=8)
        oracle, _ = greedy_pivot_oracle(a)
        assert list(fb.perm.forward) == list(f2.perm.forward), seed
        assert list(f2.perm.forward[: f2.rank]) == oracle[: f2.rank], seed
        checked += 1
    ok = checked == 50
    _report("02", ok, f"{checked}/50 instances agree across both routes")
    assert ok


def test_criterion_03_sample_update_exactness():
    """The downdated sample equals a dense-accumulated compression oracle.

    After one block: B1 must equal W[:b, b:] @ (Q^T A P)[b:, b:] where
    W = Qs^T Omega Q collects the sample-side and matrix-side reflectors,
    and W's lower-left block must vanish.
    """
    m, n, b_sz, pad = 40, 30, 8, 8
    ell = b_sz + pad
    worst_b1 = worst_w21 = 0.0
    for seed in range(20):
        a = np.random.default_rng(seed).standard_normal((m, n))
        omega = gaussian_matrix(RngState(seed), ell, m)
        counters = OpCounters()
        sample = SampleState(B=omega @ a, ell=ell, frob_a=np.linalg.norm(a))
        local, got = select_pivots(sample, b_sz, counters)
        assert got == b_sz
        ys = sample.reflectors.Y.copy()
        taus = sample.reflectors.tau.copy()

        ap = a[:, local.forward].copy()
        panel = ap[:, :b_sz].copy()
        yp, taup = panel_householder(panel, counters)
        tp = build_t_matrix(yp, taup)
        trail = ap[:, b_sz:].copy()
        apply_block_reflection(trail, yp, tp, transpose=True)
        sample_update(sample, np.triu(panel[:b_sz]), trail[:b_sz].copy(), counters)

        qs_t = np.eye(ell)
        for j in range(b_sz):
            apply_reflector(qs_t[j:, :], ys[j:, j], taus[j])
        w = qs_t @ omega @ (np.eye(m) - yp @ (tp @ yp.T))
        scale = np.linalg.norm(omega) * np.linalg.norm(a)
        worst_b1 = max(
            worst_b1,
            np.linalg.norm(sample.B[:b_sz] - w[:b_sz, b_sz:] @ trail[b_sz:]) / scale,
        )
        worst_w21 = max(
            worst_w21, np.linalg.norm(w[b_sz:, :b_sz]) / np.linalg.norm(omega)
        )
    ok = worst_b1 <= 1e-10 and worst_w21 <= 1e-10
    _report(
        "03",
        ok,
        f"worst relative B1 mismatch {worst_b1:.2e}, worst W21 {worst_w21:.2e} "
        f"over 20 instances (tolerance 1e-10)",
    )
    assert ok


def test_criterion_04_truncated_matches_full_driver():
    """Same seed: trqrcp and rqrcp choose identical pivots, R rows agree."""
    shapes = [(128, 96), (96, 128), (128, 128), (160, 96)]
    ks = [16, 32, 48, 64]
    worst = 0.0
    agree = 0
    for idx in range(20):
        m, n = shapes[idx % len(shapes)]
        k = min(ks[idx % len(ks)], min(m, n))
        a = np.random.default_rng(100 + idx).standard_normal((m, n))
        cfg = RandomizedConfig(block=16, padding=8, seed=idx)
        ft = trqrcp(a, k=k, config=cfg)
        fr = rqrcp(a, k=k, config=cfg)
        if list(ft.perm.forward) == list(fr.perm.forward):
            agree += 1
        worst = max(
            worst, np.linalg.norm(ft.R - fr.R) / (100 * EPS * np.linalg.norm(a))
        )
    ok = agree == 20 and worst <= 1.0
    _report(
        "04",
        ok,
        f"{agree}/20 pivot sequences identical, worst R gap {worst:.3f}x the "
        f"100*eps*||A|| cap",
    )
    assert ok


def test_criterion_05_tuxv_equals_qlp_truncate_oracle():
    """tuxv at one refinement pass equals the factor-everything-then-truncate
    route: full randomized QRCP, LQ of the complete R, project A onto the
    oracle's leading k right vectors."""
    shapes = [(128, 96), (96, 64), (80, 80), (128, 48), (64, 64)]
    ks = [16, 32, 24, 16, 32]
    worst = 0.0
    for idx in range(10):
        m, n = shapes[idx % len(shapes)]
        k = ks[idx % len(ks)]
        a = np.random.default_rng(200 + idx).standard_normal((m, n))
        cfg = RandomizedConfig(block=16, padding=8, seed=idx)
        t = tuxv(a, k, cfg, j_max=1)
        full = rqrcp(a, config=cfg)
        z = full.perm.restore(full.R)
        _, v = lq_factor(z)
        oracle = (a @ v[:, :k]) @ v[:, :k].T
        worst = max(worst, np.linalg.norm(t.approx() - oracle) / np.linalg.norm(a))
    ok = worst <= 1e-9
    _report("05", ok, f"worst relative gap to oracle {worst:.2e} (tolerance 1e-9)")
    assert ok


def test_criterion_06a_sample_reuse_saves_flops():
    """Downdating one sketch across blocks must cost well under re-sketching
    every block: GEMM ratio rqrcp/rsrqrcp <= 0.72 on a full 256x256 run."""
    a = np.random.default_rng(0).standard_normal((256, 256))
    cfg = RandomizedConfig(block=16, padding=8, seed=0)
    f1 = rqrcp(a, config=cfg)
    f2 = rsrqrcp(a, config=cfg)
    ratio = f1.counters.gemm_flops / f2.counters.gemm_flops
    ok = ratio <= 0.72
    _report(
        "06a",
        ok,
        f"gemm(rqrcp)/gemm(rsrqrcp) = {f1.counters.gemm_flops}/"
        f"{f2.counters.gemm_flops} = {ratio:.4f} (required <= 0.72)",
    )
    assert ok


def test_criterion_06b_trailing_free_flop_ratio():
    """Skipping trailing updates at m = n = 2000, k = 64 should roughly halve
    the GEMM budget: required ratio <= 0.6, currently measuring ~0.643.

    Known red: at k << n the sketch and sample-update costs are shared by
    both drivers and keep the ratio above the bound; the asserted threshold
    is kept as stated rather than tuned to the implementation.
    """
    a = np.random.default_rng(1).standard_normal((2000, 2000))
    cfg = RandomizedConfig(block=32, padding=8, seed=0)
    ft = trqrcp(a, k=64, config=cfg)
    fr = rqrcp(a, k=64, config=cfg)
    ratio = ft.counters.gemm_flops / fr.counters.gemm_flops
    ok = ratio <= 0.6
    _report(
        "06b",
        ok,
        f"gemm(trqrcp)/gemm(rqrcp) = {ft.counters.gemm_flops}/"
        f"{fr.counters.gemm_flops} = {ratio:.4f} (required <= 0.6)",
    )
    assert ok


RANK_GRID = list(range(8, 97, 8))


@pytest.fixture(scope="module")
def spectrum_curves():
    """One quality sweep per synthetic spectrum at 256x256, shared by the
    two parity criteria."""
    curves = {}
    cfg = RandomizedConfig(block=16, padding=8, seed=8)
    for kind in ("geometric", "stepped", "cliff"):
        a = synthetic_matrix(kind, 256, seed=8)
        curves[kind] = quality_sweep(
            a,
            ranks=RANK_GRID,
            algorithms=("qrcp", "rqrcp", "rsrqrcp", "tuxv", "svd"),
            config=cfg,
        )
    return curves


def test_criterion_07a_randomized_pivot_quality(spectrum_curves):
    """Randomized pivoting tracks classical pivoting: truncation errors of
    rqrcp and rsrqrcp within 1.25x of qrcp at every swept rank."""
    worst = 0.0
    where = ""
    for kind, curve in spectrum_curves.items():
        ref = curve.relerr["qrcp"]
        for name in ("rqrcp", "rsrqrcp"):
            with np.errstate(invalid="ignore", divide="ignore"):
                ratios = np.where(ref > 0, curve.relerr[name] / ref, 1.0)
            i = int(np.argmax(ratios))
            if ratios[i] > worst:
                worst = float(ratios[i])
                where = f"{name}/{kind} at rank {RANK_GRID[i]}"
    ok = worst <= 1.25
    _report("07a", ok, f"max error ratio vs qrcp {worst:.4f} ({where}; required <= 1.25)")
    assert ok


def test_criterion_07b_tuxv_tracks_svd_oracle(spectrum_curves):
    """tuxv within 1.10x of the SVD oracle error at every swept rank.

    Known red: the geometric spectrum measures up to ~1.27x with the default
    single refinement pass; stepped and cliff sit at 1.0000x.  The threshold
    is asserted as stated.
    """
    worst = 0.0
    where = ""
    for kind, curve in spectrum_curves.items():
        ref = curve.relerr["svd"]
        with np.errstate(invalid="ignore", divide="ignore"):
            ratios = np.where(ref > 0, curve.relerr["tuxv"] / ref, 1.0)
        i = int(np.argmax(ratios))
        if ratios[i] > worst:
            worst = float(ratios[i])
            where = f"{kind} at rank {RANK_GRID[i]}"
    ok = worst <= 1.10
    _report("07b", ok, f"max tuxv/svd error ratio {worst:.4f} ({where}; required <= 1.10)")
    assert ok


def test_criterion_08_truncated_chisq_statistics():
    """Density normalizes, quadrature mean matches the closed form, and
    conditioned sketch columns respect their truncation support."""
    worst_mass = worst_mean = 0.0
    for dof in (1, 2, 3, 8, 32):
        for tau in (0.5, 2.0, 10.0, 1e6):
            d = TruncatedChiSq(dof=dof, tau=tau)
            hi = min(tau, dof + 60.0 * math.sqrt(2.0 * dof))
            u, w = np.polynomial.legendre.leggauss(2000)
            u = 0.5 * (u + 1.0) * math.sqrt(hi)
            w = w * math.sqrt(hi) * u
            x = u * u
            p = trunc_chisq_pdf(d, x)
            worst_mass = max(worst_mass, abs(float(np.sum(w * p)) - 1.0))
            worst_mean = max(
                worst_mean, abs(float(np.sum(w * x * p)) - trunc_chisq_mean(d))
            )

    # Empirical side: columns that lose every pivot comparison keep their
    # squared sketch mass below the reported threshold, without exception.
    violations = 0
    for trial in range(1000):
        rng = np.random.default_rng(trial)
        norms = rng.uniform(0.5, 2.0, size=8)
        b = rng.standard_normal((6, 8)) * norms
        sample = SampleState(B=b.copy(order="F"), ell=6, frob_a=1.0)
        perm, got = select_pivots(sample, 3, OpCounters())
        taus = tau_thresholds(sample.B, got, norms[perm.forward][got:])
        tails = np.sum(sample.B[got:, got:] ** 2, axis=0)
        violations += int(
            np.sum(tails > taus * norms[perm.forward][got:] ** 2 * (1 + 1e-9))
        )
    ok = worst_mass <= 1e-6 and worst_mean <= 1e-6 and violations == 0
    _report(
        "08",
        ok,
        f"worst mass defect {worst_mass:.2e}, worst mean defect {worst_mean:.2e} "
        f"(tolerance 1e-6); {violations} support violations in 1000 trials",
    )
    assert ok


def test_criterion_09_selection_bias_floor():
    """Sketch-based pivot selection keeps at least 90% of the best column
    norm in expectation, across the whole decay-rate grid."""
    cfg = BiasExperimentConfig(k=32, padding=8, trials=1000, seed=0)
    phi, out = selection_bias_experiment(cfg)
    floor = float(np.min(out))
    at = float(phi[int(np.argmin(out))])
    ok = floor >= 0.90
    _report(
        "09",
        ok,
        f"min normalized expectation {floor:.4f} at phi={at:.2f} (required >= 0.90)",
    )
    assert ok


def test_criterion_10_golden_io_and_csv(tmp_path):
    """Round trips are exact and the quality CSV is byte-stable."""
    rng = np.random.default_rng(3)
    a = rng.standard_normal((12, 9)) * np.exp(rng.uniform(-20, 20, (12, 9)))
    mtx = tmp_path / "a.mtx"
    save_matrix_market(a, mtx)
    mm_exact = bool(np.array_equal(load_matrix_market(mtx), a))

    img = np.round(rng.uniform(0, 1, (8, 10)) * 255) / 255
    pgm = tmp_path / "a.pgm"
    save_pgm(img, pgm, maxval=255)
    pgm_exact = bool(np.array_equal(load_pgm(pgm), img))

    big = tmp_path / "q.mtx"
    save_matrix_market(np.random.default_rng(4).standard_normal((48, 40)), big)
    argv = [
        "quality", "-i", str(big), "--algos", "qrcp,rqrcp,trqrcp,svd",
        "--ranks", "8,16,24", "-b", "8", "-p", "4", "--no-timing",
    ]
    o1, o2 = tmp_path / "q1.csv", tmp_path / "q2.csv"
    assert cli_main(argv + ["-o", str(o1)]) == 0
    assert cli_main(argv + ["-o", str(o2)]) == 0
    csv_stable = o1.read_bytes() == o2.read_bytes()

    ok = mm_exact and pgm_exact and csv_stable
    _report(
        "10",
        ok,
        f"matrix round-trip bitwise={mm_exact}, image round-trip exact={pgm_exact}, "
        f"quality CSV byte-stable={csv_stable}",
    )
    assert ok
