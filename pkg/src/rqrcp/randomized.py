"""Randomized column-pivoted QR.

Pivots are chosen from a small Gaussian sketch B = Omega A instead of from
trailing-norm downdates of A itself: a partial pivoted factorization of the
sample picks a block of b columns at once, the block is eliminated from A with
one panel QR plus block reflections, and the sample is carried to the next
block either by a rank-b downdate (rqrcp), by a fresh sketch of the updated
trailing matrix (rsrqrcp), or not at all because one oversized sample covers
every block (ssrqrcp).
"""

from dataclasses import dataclass

import numpy as np

from .counters import OpCounters
from .kernels import EPS, BlockReflectors, Permutation, build_t_matrix
from .qrcp import Factorization, _pivoted_eliminate, _validate_rank, panel_householder
from .rng import RngState, gaussian_matrix


@dataclass
class RandomizedConfig:
    """Knobs shared by the randomized factorizations: pivot block size, sample
    padding rows beyond the block, and the generator seed."""

    block: int = 32
    padding: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.block < 1:
            raise ValueError("block must be >= 1")
        if self.padding < 1:
            raise ValueError("padding must be >= 1")

    @property
    def ell(self):
        """Sample row count."""
        return self.block + self.padding


class DegenerateSampleError(RuntimeError):
    """Sample factorization produced a numerically singular leading triangle;
    the caller should discard the sample and re-sketch the trailing matrix."""


@dataclass
class SampleState:
    """The sketch and the pieces of its partial factorization.

    After :func:`select_pivots`, ``B`` holds the transformed sample in pivoted
    column order: ``s11`` (upper-triangular), ``s12`` and ``s22`` view its
    blocks.  ``reflectors`` are the sample-side Householder vectors, kept for
    verification.  ``frob_a`` is the Frobenius norm of the matrix being
    factored (not of the sketch); drivers use it for the degeneracy threshold.
    """

    B: np.ndarray
    ell: int
    block: int = 0
    s11: np.ndarray | None = None
    s12: np.ndarray | None = None
    s22: np.ndarray | None = None
    reflectors: BlockReflectors | None = None
    frob_a: float = 0.0


def make_sample(A, ell, rng, counters=None):
    """Sketch B = Omega A with a fresh ell x m standard Gaussian Omega."""
    A = np.asarray(A, dtype=np.float64)
    m, n = A.shape
    if ell < 1:
        raise ValueError("sample must have at least one row")
    omega = gaussian_matrix(rng, ell, m)
    B = omega @ A
    if counters is not None:
        counters.gemm_flops += 2 * ell * m * n
        counters.touch(omega, A, B)
    return SampleState(
        B=np.asfortranarray(B), ell=ell, frob_a=float(np.linalg.norm(A))
    )


def select_pivots(sample, b, counters=None):
    """Pick b pivots by running b steps of greedy pivoted elimination on the
    sample, in place.  Returns (local permutation over the sample's columns,
    number of pivots actually delivered); the count falls short of b only when
    the trailing sample goes numerically to zero."""
    B = sample.B
    ell, nt = B.shape
    if not 1 <= b <= min(ell, nt):
        raise ValueError(f"cannot select {b} pivots from a {ell} x {nt} sample")
    counters = counters if counters is not None else OpCounters()
    perm = Permutation.identity(nt)
    Y = np.zeros((ell, b))
    tau = np.zeros(b)
    tol = EPS * float(np.linalg.norm(B))
    got = _pivoted_eliminate(B, b, Y, tau, perm, tol, counters)
    sample.reflectors = BlockReflectors(Y[:, :got], tau[:got])
    sample.s11 = B[:got, :got]
    sample.s12 = B[:got, got:]
    sample.s22 = B[got:, got:]
    return perm, got


def sample_update(sample, R11, R12, counters=None):
    """Downdate the sample past a completed block: B1 = S12 - S11 R11^{-1} R12,
    stacked over the untouched S22 rows.

    Raises :class:`DegenerateSampleError` when the block's triangle is too
    ill-conditioned to divide by (any |diagonal| < eps^(3/4) * frob_a).
    """
    b = R11.shape[0]
    if sample.s11 is None or sample.s11.shape[0] != b:
        raise ValueError("sample has no matching factorization to downdate")
    if np.any(np.abs(np.diag(R11)) < EPS ** 0.75 * sample.frob_a):
        raise DegenerateSampleError(
            "block triangle numerically singular; sample must be re-sketched"
        )
    n2 = R12.shape[1]
    if n2:
        X = np.linalg.solve(R11, R12)
        B1 = sample.s12 - sample.s11 @ X
        if counters is not None:
            counters.gemm_flops += 3 * b * b * n2
            counters.touch(R11, R12, sample.s11, sample.s12, B1)
        Bnew = np.vstack([B1, sample.s22])
    else:
        Bnew = np.zeros((sample.ell, 0))
    sample.B = np.asfortranarray(Bnew)
    sample.block += 1
    sample.s11 = sample.s12 = sample.s22 = None
    sample.reflectors = None
    return sample


def _apply_local_swaps(local_perm, i0, perm, work, *row_followers):
    """Replay the sample's pivot swaps onto the working matrix (full columns),
    the global permutation, and any panels whose rows track A's columns."""
    for a, c in local_perm.swaps:
        ga, gc = i0 + a, i0 + c
        perm.swap(ga, gc)
        if ga != gc:
            work[:, [ga, gc]] = work[:, [gc, ga]]
            for F in row_followers:
                F[[ga, gc], :] = F[[gc, ga], :]


def _panel_rank(panel_R, tol):
    """Number of leading usable columns in an eliminated panel: everything
    before the first numerically zero R diagonal."""
    d = np.abs(np.diag(panel_R))
    bad = d <= tol
    return int(np.argmax(bad)) if bad.any() else d.size


def _block_stages(work, Yp, taup, i0, bw, counters, trailing_update):
    """Push a committed panel's block reflection right.

    Stage 1 forms the shared adjusted inner products X = T^T (Y^T C); stage 2
    finishes the new R rows; stage 3 (skipped by the trailing-update-free
    variant) updates the rows below.  Splitting by rows keeps the R rows
    bitwise independent of whether stage 3 runs.
    """
    m, n = work.shape
    nt2 = n - i0 - bw
    if not nt2:
        return
    T = build_t_matrix(Yp, taup)
    C = work[i0:, i0 + bw :]
    X = T.T @ (Yp.T @ C)
    counters.gemm_flops += 2 * (m - i0) * bw * nt2 + bw * bw * nt2
    work[i0 : i0 + bw, i0 + bw :] = C[:bw] - Yp[:bw] @ X
    counters.gemm_flops += 2 * bw * bw * nt2
    counters.touch(C, Yp, X)
    if trailing_update and i0 + bw < m:
        work[i0 + bw :, i0 + bw :] = C[bw:] - Yp[bw:] @ X
        counters.gemm_flops += 2 * (m - i0 - bw) * bw * nt2
        counters.touch(work[i0 + bw :, i0 + bw :])


def _randomized_factor(A, k, config, ell, block_width, repeat_sample, trailing_update):
    work = np.array(A, dtype=np.float64, order="F")
    m, n = work.shape
    k = _validate_rank(k, m, n)
    if k == 0:
        raise ValueError("rank must be >= 1")
    if ell > m:
        raise ValueError(f"sample rows {ell} exceed matrix rows {m}")
    rng = RngState(config.seed)
    counters = OpCounters()
    frob = float(np.linalg.norm(work))
    tol = EPS * frob
    perm = Permutation.identity(n)
    Y = np.zeros((m, k))
    tau = np.zeros(k)

    def fresh_sample(i0):
        s = make_sample(work[i0:, i0:], ell, rng, counters)
        s.frob_a = frob
        return s

    sample = fresh_sample(0)
    rank = k
    i0 = 0
    while i0 < k:
        want = min(block_width, k - i0)
        # pick pivots, eliminate the panel on scratch, and only commit once
        # the panel's R diagonal confirms the sample's choices; one fresh
        # sketch per block covers both a short sample and junk picks (a
        # downdated sample of a spent trailing matrix is cancellation noise
        # that can look full-rank)
        resampled = False
        while True:
            local_perm, got = select_pivots(sample, want, counters)
            if got < want and not resampled:
                sample = fresh_sample(i0)
                counters.resamples += 1
                resampled = True
                continue
            if got == 0:
                bw = 0
                break
            _apply_local_swaps(local_perm, i0, perm, work)
            panel = work[i0:, i0 : i0 + got].copy()
            Yp, taup = panel_householder(panel, counters)
            usable = _panel_rank(panel, tol)
            if usable < got and not resampled:
                sample = fresh_sample(i0)
                counters.resamples += 1
                resampled = True
                continue
            bw = usable
            if bw:
                work[i0:, i0 : i0 + bw] = panel[:, :bw]
                Y[i0:, i0 : i0 + bw] = Yp[:, :bw]
                tau[i0 : i0 + bw] = taup[:bw]
            break
        if bw == 0:
            rank = i0
            break
        _block_stages(work, Y[i0:, i0 : i0 + bw], tau[i0 : i0 + bw], i0, bw, counters, trailing_update)
        i0 += bw
        if bw < want:
            rank = i0
            break
        if i0 < k:
            if repeat_sample:
                sample = fresh_sample(i0)
            else:
                try:
                    sample_update(
                        sample, work[i0 - bw : i0, i0 - bw : i0], work[i0 - bw : i0, i0:], counters
                    )
                except DegenerateSampleError:
                    sample = fresh_sample(i0)
                    counters.resamples += 1
    return Factorization(
        reflectors=BlockReflectors(Y[:, :rank], tau[:rank]),
        R=work[:rank, :].copy(),
        perm=perm,
        rank=rank,
        counters=counters,
        trailing=work[rank:, rank:].copy() if trailing_update else None,
    )


def rqrcp(A, k=None, config=None):
    """Randomized pivoted QR: one initial sketch, pivot blocks chosen from it,
    sample downdated across blocks."""
    config = config if config is not None else RandomizedConfig()
    return _randomized_factor(
        A,
        k,
        config,
        ell=config.ell,
        block_width=config.block,
        repeat_sample=False,
        trailing_update=True,
    )


def rsrqrcp(A, k=None, config=None):
    """Repeated-sample variant: a fresh sketch of the updated trailing matrix
    before every block instead of the sample downdate."""
    config = config if config is not None else RandomizedConfig()
    return _randomized_factor(
        A,
        k,
        config,
        ell=config.ell,
        block_width=config.block,
        repeat_sample=True,
        trailing_update=True,
    )


def ssrqrcp(A, k, config=None):
    """Single-sample variant: one (k + padding)-row sketch selects all k
    pivots, then one panel QR of the chosen columns and one block reflection
    for the remaining R rows.  The trailing matrix is never updated."""
    config = config if config is not None else RandomizedConfig()
    k = int(k)
    return _randomized_factor(
        A,
        k,
        config,
        ell=k + config.padding,
        block_width=k,
        repeat_sample=False,
        trailing_update=False,
    )
