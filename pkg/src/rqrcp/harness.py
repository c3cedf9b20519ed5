"""Experiment drivers: synthetic test matrices with controlled spectra,
rank-sweep quality curves, counter/time benchmarks, and their CSV form.

CSV output is deterministic byte-for-byte for fixed inputs: floats are printed
via repr (shortest round-trip), rows end in CRLF, and the only
non-deterministic datum — wall time — goes into a trailing comment line that
can be suppressed.
"""

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .counters import OpCounters
from .kernels import column_norms
from .qrcp import q_columns, qr_blocked, qr_presorted, qrcp_blocked, qrcp_level2
from .randomized import RandomizedConfig, rqrcp, rsrqrcp, ssrqrcp
from .rng import RngState
from .svd import jacobi_svd_oracle
from .truncated import trqrcp, tuxv

QUALITY_ALGOS = ("qr_presorted", "qrcp", "rqrcp", "rsrqrcp", "trqrcp", "tuxv", "svd")
BENCH_ALGOS = ("qr", "qr_presorted", "qrcp", "rqrcp", "rsrqrcp", "trqrcp", "tuxv", "svd")

SPECTRUM_KINDS = ("geometric", "stepped", "cliff")


def spectrum_values(kind, r):
    """Singular value profiles: geometric decay 0.9^j, two 1e-3 steps, or a
    flat shelf followed by a 1e-9 cliff."""
    j = np.arange(r, dtype=np.float64)
    if kind == "geometric":
        return 0.9**j
    if kind == "stepped":
        s = np.ones(r)
        s[r // 6 :] = 1e-3
        s[r // 3 :] = 1e-6
        return s
    if kind == "cliff":
        s = np.full(r, 1e-9)
        s[: max(1, round(r * 3 / 16))] = 1.0
        return s
    raise ValueError(f"unknown spectrum kind {kind!r}")


def synthetic_matrix(kind, m, n=None, seed=0):
    """Random-orthogonal-factor matrix with the requested spectrum."""
    n = m if n is None else n
    r = min(m, n)
    s = spectrum_values(kind, r)
    rng = RngState(seed)
    Qu = np.linalg.qr(rng.draw(m * r).reshape(m, r))[0]
    Qv = np.linalg.qr(rng.draw(n * r).reshape(n, r))[0]
    return (Qu * s) @ Qv.T


@dataclass
class ErrorCurve:
    """Relative truncation errors ||A - A_k||_F / ||A||_F per algorithm over a
    shared ascending rank grid."""

    ranks: list
    relerr: dict = field(default_factory=dict)

    def write_csv(self, stream, seconds=None):
        names = list(self.relerr)
        w = csv.writer(stream)
        w.writerow(["rank", *names])
        for i, k in enumerate(self.ranks):
            w.writerow([k, *[repr(float(self.relerr[a][i])) for a in names]])
        if seconds is not None:
            stream.write(f"# seconds={seconds:.3f}\r\n")


def _tail_errors(row_energies, ranks, frob):
    """Errors from per-row energy: err(k)^2 = sum of energies from row k on.
    Summing the tail (not total-minus-head) keeps tiny tails from drowning in
    the large leading mass."""
    e = np.asarray(row_energies, dtype=np.float64)
    tail = np.zeros(e.size + 1)
    if e.size:
        tail[:-1] = np.cumsum(e[::-1])[::-1]
    idx = np.minimum(np.asarray(ranks), e.size)
    return np.sqrt(np.maximum(tail[idx], 0.0)) / frob


def quality_sweep(A, ranks=None, algorithms=QUALITY_ALGOS, config=None, svd_sweeps=40):
    """Truncation-error curves over a rank grid.

    Factor-once algorithms (everything QR-shaped, and the singular value
    oracle) are run a single time and truncated on paper; trqrcp and tuxv are
    evaluated per rank against dense residuals since their output genuinely
    depends on the requested rank.
    """
    A = np.asarray(A, dtype=np.float64)
    m, n = A.shape
    kmax = min(m, n)
    config = config if config is not None else RandomizedConfig()
    if ranks is None:
        ranks = [k for k in range(8, min(96, kmax) + 1, 8)] or [kmax]
    ranks = [int(k) for k in ranks]
    if not ranks or any(not 1 <= k <= kmax for k in ranks):
        raise ValueError(f"ranks must lie in [1, {kmax}]")
    if sorted(ranks) != ranks:
        raise ValueError("ranks must be ascending")
    frob = float(np.linalg.norm(A))
    curve = ErrorCurve(ranks=ranks)
    kbig = max(ranks)
    for name in algorithms:
        if name == "svd":
            s = jacobi_svd_oracle(A, max_sweeps=svd_sweeps)[1]
            curve.relerr[name] = _tail_errors(s * s, ranks, frob)
        elif name in ("qr", "qr_presorted", "qrcp"):
            runner = {
                "qr": qr_blocked,
                "qr_presorted": qr_presorted,
                "qrcp": qrcp_blocked,
            }[name]
            f = runner(A, b=config.block)
            curve.relerr[name] = _tail_errors(
                np.einsum("ij,ij->i", f.R, f.R), ranks, frob
            )
        elif name in ("rqrcp", "rsrqrcp"):
            runner = rqrcp if name == "rqrcp" else rsrqrcp
            f = runner(A, config=config)
            curve.relerr[name] = _tail_errors(
                np.einsum("ij,ij->i", f.R, f.R), ranks, frob
            )
        elif name == "trqrcp":
            tf = trqrcp(A, kbig, config)
            Y, tau = tf.reflectors.Y, tf.reflectors.tau
            Ap = tf.perm.apply(A)
            errs = []
            for k in ranks:
                kk = min(k, tf.rank)
                Q = q_columns(Y[:, :kk], tau[:kk], kk)
                errs.append(float(np.linalg.norm(Ap - Q @ tf.R[:kk, :])) / frob)
            curve.relerr[name] = np.array(errs)
        elif name == "tuxv":
            errs = []
            for k in ranks:
                t = tuxv(A, k, config)
                errs.append(float(np.linalg.norm(A - t.approx())) / frob)
            curve.relerr[name] = np.array(errs)
        else:
            raise ValueError(f"unknown algorithm {name!r}")
    return curve


def _bench_run(name, A, k, config, svd_sweeps):
    if name == "qr":
        return qr_blocked(A, k=k, b=config.block).counters
    if name == "qr_presorted":
        return qr_presorted(A, k=k, b=config.block).counters
    if name == "qrcp":
        return qrcp_blocked(A, k=k, b=config.block).counters
    if name == "qrcp_level2":
        return qrcp_level2(A, k=k).counters
    if name == "rqrcp":
        return rqrcp(A, k=k, config=config).counters
    if name == "rsrqrcp":
        return rsrqrcp(A, k=k, config=config).counters
    if name == "ssrqrcp":
        if k is None:
            raise ValueError("ssrqrcp needs an explicit rank")
        return ssrqrcp(A, k, config=config).counters
    if name == "trqrcp":
        if k is None:
            raise ValueError("trqrcp needs an explicit rank")
        return trqrcp(A, k, config).counters
    if name == "tuxv":
        if k is None:
            raise ValueError("tuxv needs an explicit rank")
        return tuxv(A, k, config).counters
    if name == "svd":
        jacobi_svd_oracle(A, max_sweeps=svd_sweeps)
        return OpCounters()
    raise ValueError(f"unknown algorithm {name!r}")


def bench(A, algorithms=BENCH_ALGOS, k=None, config=None, svd_sweeps=40):
    """Run each algorithm once; returns [(name, seconds, OpCounters)]."""
    A = np.asarray(A, dtype=np.float64)
    config = config if config is not None else RandomizedConfig()
    rows = []
    for name in algorithms:
        t0 = time.perf_counter()
        counters = _bench_run(name, A, k, config, svd_sweeps)
        rows.append((name, time.perf_counter() - t0, counters))
    return rows


def write_bench_csv(rows, stream, timing=True):
    w = csv.writer(stream)
    header = ["algo", "gemm_flops", "level2_flops", "bytes_touched", "resamples"]
    if timing:
        header.append("seconds")
    w.writerow(header)
    for name, seconds, c in rows:
        row = [name, c.gemm_flops, c.level2_flops, c.bytes_touched, c.resamples]
        if timing:
            row.append(f"{seconds:.6f}")
        w.writerow(row)


def write_bias_csv(phi, expectation, stream):
    w = csv.writer(stream)
    w.writerow(["phi", "expectation"])
    for p, e in zip(phi, expectation):
        w.writerow([repr(float(p)), repr(float(e))])


def write_factor_csv(f, stream, counters=True):
    """Per-step pivot trace of a factorization: step, chosen original column
    (0-based), |R| diagonal."""
    w = csv.writer(stream)
    w.writerow(["step", "pivot", "rdiag"])
    d = np.abs(np.diag(f.R[: f.rank, : f.rank]))
    for j in range(f.rank):
        w.writerow([j, int(f.perm.forward[j]), repr(float(d[j]))])
    if counters:
        c = f.counters
        stream.write(
            f"# gemm_flops={c.gemm_flops} level2_flops={c.level2_flops}"
            f" bytes_touched={c.bytes_touched} resamples={c.resamples}\r\n"
        )


def write_tuxv_csv(t, stream, counters=True):
    w = csv.writer(stream)
    w.writerow(["index", "sigma_estimate"])
    for i, s in enumerate(t.singular_values()):
        w.writerow([i, repr(float(s))])
    if counters:
        c = t.counters
        stream.write(
            f"# gemm_flops={c.gemm_flops} level2_flops={c.level2_flops}"
            f" bytes_touched={c.bytes_touched} resamples={c.resamples}\r\n"
        )


__all__ = [
    "QUALITY_ALGOS",
    "BENCH_ALGOS",
    "SPECTRUM_KINDS",
    "spectrum_values",
    "synthetic_matrix",
    "ErrorCurve",
    "quality_sweep",
    "bench",
    "write_bench_csv",
    "write_bias_csv",
    "write_factor_csv",
    "write_tuxv_csv",
    "column_norms",
]
