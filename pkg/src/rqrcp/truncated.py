"""Truncated factorizations without trailing updates.

trqrcp produces the leading k rows of a randomized pivoted QR while never
writing to the trailing matrix: the original columns are materialized on
demand through the accumulated inner-product panel W, so the flop bill scales
with k instead of with the full factorization.  tuxv builds on it: an
interleaved QR/LQ iteration that tightens the row basis from trqrcp's R into
a rank-k approximation A ~= U X V^T with orthonormal U, V.
"""

from dataclasses import dataclass

import numpy as np

from .counters import OpCounters
from .kernels import EPS, BlockReflectors, Permutation, build_t_matrix
from .qrcp import Factorization, _validate_rank, panel_householder, q_columns, qr_blocked
from .randomized import (
    DegenerateSampleError,
    RandomizedConfig,
    SampleState,
    make_sample,
    sample_update,
    select_pivots,
    _apply_local_swaps,
    _panel_rank,
)
from .rng import RngState, gaussian_matrix
from .svd import jacobi_svd_oracle


@dataclass
class TruncatedFactorization:
    """Leading-k pivoted QR data: A P ~= Q(:, 1:rank) R with Q encoded by the
    reflectors.  ``reflectors.W`` holds the n x rank inner-product panel
    (W^T = T^T Y^T A P over the columns trailing each block)."""

    reflectors: BlockReflectors
    R: np.ndarray
    perm: Permutation
    rank: int
    counters: OpCounters

    def q_factor(self):
        Y, tau = self.reflectors.Y, self.reflectors.tau
        return q_columns(Y, tau, self.rank)

    def reconstruct(self):
        """Q(:, 1:rank) R, the rank-``rank`` view of A P."""
        return self.q_factor() @ self.R


def _sketched_sample(work, Y, W, i0, ell, rng, counters, frob):
    """Fresh sketch of the *implicit* trailing matrix: Omega is applied to the
    original columns and the reflector corrections are subtracted in sketch
    space, so the trailing matrix itself is never formed."""
    m, n = work.shape
    omega = gaussian_matrix(rng, ell, m - i0)
    B = omega @ work[i0:, i0:]
    counters.gemm_flops += 2 * ell * (m - i0) * (n - i0)
    counters.touch(omega, work[i0:, i0:], B)
    if i0:
        B -= (omega @ Y[i0:, :i0]) @ W[i0:, :i0].T
        counters.gemm_flops += 2 * ell * (m - i0) * i0 + 2 * ell * i0 * (n - i0)
        counters.touch(Y[i0:, :i0], W[i0:, :i0])
    s = SampleState(B=np.asfortranarray(B), ell=ell, frob_a=frob)
    return s


def trqrcp(A, k, config=None):
    """Truncated randomized pivoted QR: the leading k rows of R, trailing
    matrix left untouched.

    The working copy keeps original values (columns permuted); whenever a
    block of pivots is selected from the sample, just those columns are
    materialized via the W panel, eliminated, and the panel is extended to
    cover the new reflectors.
    """
    config = config if config is not None else RandomizedConfig()
    work = np.array(A, dtype=np.float64, order="F")
    m, n = work.shape
    k = _validate_rank(k, m, n)
    if k == 0:
        raise ValueError("rank must be >= 1")
    ell = config.ell
    if ell > m:
        raise ValueError(f"sample rows {ell} exceed matrix rows {m}")
    rng = RngState(config.seed)
    counters = OpCounters()
    frob = float(np.linalg.norm(work))
    tol = EPS * frob
    perm = Permutation.identity(n)
    Y = np.zeros((m, k))
    tau = np.zeros(k)
    W = np.zeros((n, k))
    R = np.zeros((k, n), order="F")
    sample = make_sample(work, ell, rng, counters)
    sample.frob_a = frob
    rank = k
    i0 = 0
    while i0 < k:
        want = min(config.block, k - i0)
        # same validate-then-commit block flow as the full randomized driver:
        # one fresh (sketched) sample per block covers short samples and junk
        # picks before anything is stored
        resampled = False
        while True:
            local_perm, got = select_pivots(sample, want, counters)
            if got < want and not resampled:
                sample = _sketched_sample(work, Y, W, i0, ell, rng, counters, frob)
                counters.resamples += 1
                resampled = True
                continue
            if got == 0:
                bw = 0
                break
            _apply_local_swaps(local_perm, i0, perm, work, W, R.T)
            # materialize the selected columns below the completed rows
            panel = work[i0:, i0 : i0 + got].copy()
            if i0:
                panel -= Y[i0:, :i0] @ W[i0 : i0 + got, :i0].T
                counters.gemm_flops += 2 * (m - i0) * i0 * got
                counters.touch(panel, Y[i0:, :i0], W[i0 : i0 + got, :i0])
            Yp, taup = panel_householder(panel, counters)
            usable = _panel_rank(panel, tol)
            if usable < got and not resampled:
                sample = _sketched_sample(work, Y, W, i0, ell, rng, counters, frob)
                counters.resamples += 1
                resampled = True
                continue
            bw = usable
            if bw:
                Y[i0:, i0 : i0 + bw] = Yp[:, :bw]
                tau[i0 : i0 + bw] = taup[:bw]
                R[i0 : i0 + bw, i0 : i0 + bw] = panel[:bw, :bw]
            break
        if bw == 0:
            rank = i0
            break
        Yb = Y[i0:, i0 : i0 + bw]
        nt2 = n - i0 - bw
        if nt2:
            T = build_t_matrix(Yb, tau[i0 : i0 + bw])
            G = Yb.T @ work[i0:, i0 + bw :]
            counters.gemm_flops += 2 * (m - i0) * bw * nt2
            if i0:
                G -= (Yb.T @ Y[i0:, :i0]) @ W[i0 + bw :, :i0].T
                counters.gemm_flops += 2 * (m - i0) * bw * i0 + 2 * bw * i0 * nt2
            W[i0 + bw :, i0 : i0 + bw] = (T.T @ G).T
            counters.gemm_flops += bw * bw * nt2
            # new R rows over the trailing columns, through the extended panel
            R[i0 : i0 + bw, i0 + bw :] = (
                work[i0 : i0 + bw, i0 + bw :]
                - Y[i0 : i0 + bw, : i0 + bw] @ W[i0 + bw :, : i0 + bw].T
            )
            counters.gemm_flops += 2 * bw * (i0 + bw) * nt2
            counters.touch(R[i0 : i0 + bw, :], W[i0 + bw :, : i0 + bw])
        i0 += bw
        if bw < want:
            rank = i0
            break
        if i0 < k:
            try:
                sample_update(sample, R[i0 - bw : i0, i0 - bw : i0], R[i0 - bw : i0, i0:], counters)
            except DegenerateSampleError:
                sample = _sketched_sample(work, Y, W, i0, ell, rng, counters, frob)
                counters.resamples += 1
    return TruncatedFactorization(
        reflectors=BlockReflectors(Y[:, :rank], tau[:rank], W=W[:, :rank]),
        R=R[:rank, :].copy(),
        perm=perm,
        rank=rank,
        counters=counters,
    )


def lq_factor(Z, b=32, counters=None):
    """LQ factorization Z = L V^T with orthonormal columns in V, computed as
    the blocked QR of Z^T."""
    Z = np.asarray(Z, dtype=np.float64)
    f = qr_blocked(Z.T, b=b, counters=counters)
    L = f.R.T
    V = f.q_factor()
    return L, V


@dataclass
class TuxvFactorization:
    """Rank-k approximation A ~= U X V^T with U (m x k) and V (n x k)
    orthonormal and X (k x k) triangular — or diagonal when the core matrix
    was rotated out by its SVD."""

    U: np.ndarray
    V: np.ndarray
    X: np.ndarray
    iterations: int
    rank: int
    counters: OpCounters

    def approx(self):
        return self.U @ (self.X @ self.V.T)

    def singular_values(self):
        """Estimates carried on the core matrix diagonal, descending."""
        return np.sort(np.abs(np.diag(self.X)))[::-1]


def tuxv(A, k, config=None, j_max=1, svd_of_x=False):
    """Approximate truncated SVD from a truncated pivoted QR.

    The R rows of trqrcp seed a row basis V; each further half-iteration
    alternates QR of A V (refreshing U and an upper-triangular X) with LQ of
    U^T A (refreshing V and a lower-triangular X).  ``j_max`` counts
    half-iterations; the default 1 performs just the initial QR.  With
    ``svd_of_x`` the small core is diagonalized and its rotations folded into
    U and V.
    """
    A = np.asarray(A, dtype=np.float64)
    m, n = A.shape
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    config = config if config is not None else RandomizedConfig()
    tf = trqrcp(A, k, config)
    counters = tf.counters
    r = tf.rank
    Z = tf.perm.restore(tf.R)
    _, V = lq_factor(Z, b=config.block, counters=counters)
    j = 1
    while True:
        Zc = A @ V[:, :r]
        counters.gemm_flops += 2 * m * n * r
        counters.touch(A, V[:, :r], Zc)
        fq = qr_blocked(Zc, b=config.block, counters=counters)
        U = fq.q_factor()
        X = fq.R[:, :r]
        if j >= j_max:
            break
        Zr = U.T @ A
        counters.gemm_flops += 2 * m * n * r
        counters.touch(U, Zr)
        X, V = lq_factor(Zr, b=config.block, counters=counters)
        if j + 1 >= j_max:
            break
        j += 2
    if svd_of_x:
        Ux, sx, Vx = jacobi_svd_oracle(X)
        U = U @ Ux
        V = V[:, :r] @ Vx
        X = np.diag(sx)
    return TuxvFactorization(
        U=U, V=V[:, :r], X=X, iterations=j_max, rank=r, counters=counters
    )
