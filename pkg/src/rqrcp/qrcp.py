"""Reference QR factorizations.

qrcp_level2 is the greedy max-trailing-norm pivoted factorization (also the
sample factorizer for the randomized variants), qrcp_blocked the
level-3-blocked version with identical pivot choices, qr_blocked the unpivoted
blocked QR, and qr_presorted the sort-once baseline.  All of them return a
:class:`Factorization` whose R lives in the pivoted column frame (A P = Q R).
"""

from dataclasses import dataclass

import numpy as np

from .counters import OpCounters
from .kernels import (
    EPS,
    BlockReflectors,
    NormTracker,
    Permutation,
    apply_reflector,
    build_t_matrix,
    column_norms,
    form_reflector,
)


@dataclass
class Factorization:
    """Result bundle: A P = Q R with Q = I - Y T Y^T from the reflectors.

    ``R`` is rank x n upper-trapezoidal in the pivoted frame.  ``trailing``
    holds the remaining (m-rank) x (n-rank) block for algorithms that update
    it, None for the single-sample variant that never forms it.
    """

    reflectors: BlockReflectors
    R: np.ndarray
    perm: Permutation
    rank: int
    counters: OpCounters
    trailing: np.ndarray | None = None

    def q_factor(self, full=False):
        """Dense orthonormal factor, m x rank (m x m with ``full=True``)."""
        Y, tau = self.reflectors.Y, self.reflectors.tau
        return q_columns(Y, tau, Y.shape[0] if full else self.rank)

    def reconstruct(self):
        """Q R, i.e. the factorization's view of A P."""
        return self.q_factor() @ self.R


def q_columns(Y, tau, cols):
    """Leading ``cols`` columns of I - Y T Y^T."""
    m = Y.shape[0]
    Q = np.eye(m, cols)
    if Y.shape[1]:
        T = build_t_matrix(Y, tau)
        Q -= Y @ (T @ (Y.T @ Q))
    return Q


def _pivoted_eliminate(work, k, Y, tau, perm, tol, counters):
    """Greedy pivoted Householder elimination, in place; returns the number of
    steps completed (< k only when all trailing norms fall to ``tol``)."""
    m, n = work.shape
    tracker = NormTracker(work)
    for j in range(k):
        p, nrm = tracker.max_trailing(j)
        if nrm <= tol:
            return j
        if p != j:
            work[:, [j, p]] = work[:, [p, j]]
        perm.swap(j, p)
        tracker.swap(j, p)
        ref = form_reflector(work[j:, j])
        Y[j:, j] = ref.v
        tau[j] = ref.tau
        apply_reflector(work[j:, j + 1 :], ref.v, ref.tau, counters)
        work[j, j] = ref.beta
        work[j + 1 :, j] = 0.0
        if j + 1 < n:
            tracker.downdate(j + 1, work[j, j + 1 :], lambda c: work[j + 1 :, c])
    return k


def _validate_rank(k, m, n):
    kmax = min(m, n)
    if k is None:
        return kmax
    k = int(k)
    if not 0 <= k <= kmax:
        raise ValueError(f"rank {k} outside [0, {kmax}]")
    return k


def qrcp_level2(A, k=None, counters=None):
    """Pivoted QR driven by one reflector at a time.

    At every step the trailing column of largest 2-norm is swapped to the
    front (ties broken by lowest position).  With ``k=None`` the factorization
    runs to completion, halting early once all trailing norms drop to
    eps * ||A||_F (rank detection).
    """
    work = np.array(A, dtype=np.float64, order="F")
    m, n = work.shape
    k = _validate_rank(k, m, n)
    counters = counters if counters is not None else OpCounters()
    perm = Permutation.identity(n)
    Y = np.zeros((m, k))
    tau = np.zeros(k)
    tol = EPS * float(np.linalg.norm(work))
    rank = _pivoted_eliminate(work, k, Y, tau, perm, tol, counters)
    return Factorization(
        reflectors=BlockReflectors(Y[:, :rank], tau[:rank]),
        R=work[:rank, :].copy(),
        perm=perm,
        rank=rank,
        counters=counters,
        trailing=work[rank:, rank:].copy(),
    )


def qrcp_blocked(A, k=None, b=32, counters=None):
    """Pivoted QR with blocked reflections.

    Pivot decisions match qrcp_level2 exactly: per step only the adjusted
    inner products of the new reflector are formed, the current row is
    materialized incrementally, and the trailing matrix is touched once per
    block with a single GEMM against the accumulated inner-product panel.
    """
    work = np.array(A, dtype=np.float64, order="F")
    m, n = work.shape
    k = _validate_rank(k, m, n)
    if b < 1:
        raise ValueError("block size must be >= 1")
    counters = counters if counters is not None else OpCounters()
    perm = Permutation.identity(n)
    tracker = NormTracker(work)
    Y = np.zeros((m, k))
    tau = np.zeros(k)
    tol = EPS * float(np.linalg.norm(work))
    rank = k
    i0 = 0
    halted = False
    while i0 < k and not halted:
        bw_max = min(b, k - i0)
        W = np.zeros((n, bw_max))  # rows follow A's columns through swaps
        bw = 0
        for jl in range(bw_max):
            g = i0 + jl
            p, nrm = tracker.max_trailing(g)
            if nrm <= tol:
                rank = g
                halted = True
                break
            if p != g:
                work[:, [g, p]] = work[:, [p, g]]
                W[[g, p], :] = W[[p, g], :]
            perm.swap(g, p)
            tracker.swap(g, p)
            if jl:
                # bring the pivot column up to date with this block's reflectors
                work[g:, g] -= Y[g:, i0:g] @ W[g, :jl]
                counters.level2_flops += 2 * (m - g) * jl
            ref = form_reflector(work[g:, g])
            Y[g:, g] = ref.v
            tau[g] = ref.tau
            work[g, g] = ref.beta
            work[g + 1 :, g] = 0.0
            if g + 1 < n:
                # adjusted inner products w = tau * (C^T y - W_prev (Y_prev^T y)),
                # C being the block-start trailing values still held below row g
                u = work[g:, g + 1 :].T @ ref.v
                counters.level2_flops += 2 * (m - g) * (n - g - 1)
                if jl:
                    u -= W[g + 1 :, :jl] @ (Y[g:, i0:g].T @ ref.v)
                    counters.level2_flops += 2 * (m - g) * jl + 2 * (n - g - 1) * jl
                W[g + 1 :, jl] = ref.tau * u
                # finalize row g across the trailing columns
                work[g, g + 1 :] -= Y[g, i0 : g + 1] @ W[g + 1 :, : jl + 1].T
                counters.level2_flops += 2 * (jl + 1) * (n - g - 1)
                tracker.downdate(
                    g + 1,
                    work[g, g + 1 :],
                    lambda c: work[g + 1 :, c] - Y[g + 1 :, i0 : g + 1] @ W[c, : jl + 1],
                )
            bw = jl + 1
        rend = i0 + bw
        if bw and rend < n and rend < m and np.any(W[rend:, :bw]):
            # the one trailing touch for this block
            work[rend:, rend:] -= Y[rend:, i0:rend] @ W[rend:, :bw].T
            counters.gemm_flops += 2 * (m - rend) * bw * (n - rend)
            counters.touch(work[rend:, rend:], Y[rend:, i0:rend], W[rend:, :bw])
        i0 = rend
    return Factorization(
        reflectors=BlockReflectors(Y[:, :rank], tau[:rank]),
        R=work[:rank, :].copy(),
        perm=perm,
        rank=rank,
        counters=counters,
        trailing=work[rank:, rank:].copy(),
    )


def panel_householder(P, counters=None):
    """In-place Householder QR of a panel; returns (Y, tau) with unit
    diagonal convention, P left upper-triangular in its leading rows."""
    mm, bw = P.shape
    Y = np.zeros((mm, bw))
    tau = np.zeros(bw)
    for j in range(min(bw, mm)):
        ref = form_reflector(P[j:, j])
        Y[j:, j] = ref.v
        tau[j] = ref.tau
        apply_reflector(P[j:, j + 1 :], ref.v, ref.tau, counters)
        P[j, j] = ref.beta
        P[j + 1 :, j] = 0.0
    return Y, tau


def qr_blocked(A, k=None, b=32, counters=None):
    """Unpivoted blocked QR: panel factorization plus one block reflection of
    the trailing matrix per block.  Level-2 flops accrue only in panels."""
    from .kernels import apply_block_reflection

    work = np.array(A, dtype=np.float64, order="F")
    m, n = work.shape
    k = _validate_rank(k, m, n)
    if b < 1:
        raise ValueError("block size must be >= 1")
    counters = counters if counters is not None else OpCounters()
    Y = np.zeros((m, k))
    tau = np.zeros(k)
    for i0 in range(0, k, b):
        bw = min(b, k - i0)
        Yp, taup = panel_householder(work[i0:, i0 : i0 + bw], counters)
        Y[i0:, i0 : i0 + bw] = Yp
        tau[i0 : i0 + bw] = taup
        if i0 + bw < n:
            T = build_t_matrix(Yp, taup)
            apply_block_reflection(
                work[i0:, i0 + bw :], Yp, T, transpose=True, counters=counters
            )
    return Factorization(
        reflectors=BlockReflectors(Y, tau),
        R=work[:k, :].copy(),
        perm=Permutation.identity(n),
        rank=k,
        counters=counters,
        trailing=work[k:, k:].copy(),
    )


def qr_presorted(A, k=None, b=32, counters=None):
    """Blocked QR after a stable descending sort of the initial column norms."""
    A = np.asarray(A, dtype=np.float64)
    order = np.argsort(-column_norms(A), kind="stable")
    perm = Permutation.from_order(order)
    f = qr_blocked(A[:, order], k=k, b=b, counters=counters)
    return Factorization(
        reflectors=f.reflectors,
        R=f.R,
        perm=perm,
        rank=f.rank,
        counters=f.counters,
        trailing=f.trailing,
    )
