"""Householder and WY-block kernels plus column-norm bookkeeping.

Matrices are numpy float64 arrays (column-major where layout matters).
Reflectors use the v[0] = 1 storage convention with a separate tau array and
the sign choice beta = -sign(x[0]) * ||x||, sign(0) = +1.  A reflector is
*always* formed for a nonzero column, even when the tail below the diagonal is
already zero.
"""

from dataclasses import dataclass, field

import numpy as np

EPS = np.finfo(np.float64).eps


@dataclass
class Reflector:
    """Single Householder transform H = I - tau * v v^T with v[0] = 1."""

    v: np.ndarray
    tau: float
    beta: float


def form_reflector(x):
    """Build the reflector sending x to beta * e1.

    beta = -sign(x[0]) * ||x||_2 with sign(0) = +1.  A zero input yields the
    identity reflector (tau = 0, beta = 0).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("form_reflector needs a nonempty vector")
    v = x.copy()
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        v[0] = 1.0
        return Reflector(v=v, tau=0.0, beta=0.0)
    alpha = float(x[0])
    beta = -norm if alpha >= 0.0 else norm
    v /= alpha - beta
    v[0] = 1.0
    return Reflector(v=v, tau=(beta - alpha) / beta, beta=beta)


def apply_reflector(A, v, tau, counters=None):
    """In place A <- (I - tau v v^T) A; the level-2 building block."""
    if A.shape[1] == 0 or tau == 0.0:
        return A
    w = v @ A
    A -= np.outer(tau * v, w)
    if counters is not None:
        counters.level2_flops += 4 * A.shape[0] * A.shape[1]
        counters.touch(A, A)
    return A


@dataclass
class Permutation:
    """Column permutation tracked as an index map plus its swap history.

    ``forward[i]`` is the original index of the column now at position i, so
    applying the permutation to a matrix is ``A[:, forward]``.  Replaying
    ``swaps`` (position pairs, in order) from the identity reproduces
    ``forward``.
    """

    forward: np.ndarray
    swaps: list = field(default_factory=list)

    @classmethod
    def identity(cls, n):
        return cls(forward=np.arange(n), swaps=[])

    @classmethod
    def from_order(cls, order):
        """Permutation whose forward map equals ``order``, with a replayable
        swap history synthesized by selection."""
        order = np.asarray(order)
        perm = cls.identity(len(order))
        pos = {v: i for i, v in enumerate(perm.forward)}
        for i, want in enumerate(order):
            j = pos[want]
            if j != i:
                pos[perm.forward[i]] = j
                pos[want] = i
            perm.swap(i, j)
        return perm

    @property
    def n(self):
        return len(self.forward)

    def swap(self, i, j):
        self.swaps.append((i, j))
        if i != j:
            self.forward[[i, j]] = self.forward[[j, i]]

    def apply(self, A):
        """Columns of A in pivoted order (A @ P)."""
        return A[:, self.forward]

    def matrix(self):
        return np.eye(self.n)[:, self.forward]

    def restore(self, R):
        """Undo the permutation on R's columns (R @ P^T)."""
        out = np.zeros_like(R)
        out[:, self.forward] = R
        return out


@dataclass
class BlockReflectors:
    """WY representation Q = I - Y T Y^T of a reflector block.

    Y is unit lower-trapezoidal, tau holds the reflector scalars, T is the
    upper-triangular connection matrix (built on demand), and W optionally
    stores the adjusted inner-product panel kept by trailing-update-free
    factorizations.
    """

    Y: np.ndarray
    tau: np.ndarray
    T: np.ndarray | None = None
    W: np.ndarray | None = None

    @property
    def width(self):
        return self.Y.shape[1]

    def t_matrix(self):
        if self.T is None:
            self.T = build_t_matrix(self.Y, self.tau)
        return self.T


def build_t_matrix(Y, tau):
    """Connection matrix T with I - Y T Y^T = H_1 H_2 ... H_b."""
    b = Y.shape[1]
    T = np.zeros((b, b))
    for j in range(b):
        T[j, j] = tau[j]
        if j:
            T[:j, j] = -tau[j] * (T[:j, :j] @ (Y[:, :j].T @ Y[:, j]))
    return T


def compose_blocks(Y1, T1, Y2, T2):
    """WY form of the product (I - Y1 T1 Y1^T)(I - Y2 T2 Y2^T)."""
    if Y2.shape[1] == 0:
        return Y1, T1
    if Y1.shape[1] == 0:
        return Y2, T2
    if Y1.shape[0] != Y2.shape[0]:
        raise ValueError("blocks must share a row count")
    b1, b2 = Y1.shape[1], Y2.shape[1]
    T = np.zeros((b1 + b2, b1 + b2))
    T[:b1, :b1] = T1
    T[b1:, b1:] = T2
    T[:b1, b1:] = -T1 @ ((Y1.T @ Y2) @ T2)
    return np.hstack([Y1, Y2]), T


def apply_block_reflection(A, Y, T, transpose=False, counters=None):
    """In place A <- (I - Y T Y^T) A (or its transpose) via two half-width
    multiplies; GEMM counter grows by exactly 4*m*b*n + b*b*n."""
    m, b = Y.shape
    n = A.shape[1]
    if b == 0 or n == 0:
        return A
    if A.shape[0] != m:
        raise ValueError(f"row mismatch: A has {A.shape[0]} rows, Y has {m}")
    W = Y.T @ A
    W = (T.T if transpose else T) @ W
    A -= Y @ W
    if counters is not None:
        counters.gemm_flops += 4 * m * b * n + b * b * n
        counters.touch(A, Y, W, A)
    return A


def column_norms(A):
    """2-norms of the columns."""
    return np.linalg.norm(A, axis=0)


def downdate_norms(norms, row):
    """Column norms after removing one row's contribution (clipped at 0)."""
    norms = np.asarray(norms, dtype=np.float64)
    row = np.asarray(row, dtype=np.float64)
    return np.sqrt(np.maximum(norms * norms - row * row, 0.0))


class NormTracker:
    """Trailing column norms maintained by downdating.

    When cancellation bites (downdated-norm^2 / original-norm^2 below
    sqrt(eps)) the exact norm is recomputed from the current trailing column,
    supplied by a ``materialize(col)`` callback because deferred-update
    factorizations do not keep those values in the work array.
    """

    GUARD = np.sqrt(EPS)

    def __init__(self, A):
        self.norms = column_norms(A)
        self.orig_sq = self.norms**2

    def swap(self, i, j):
        if i != j:
            self.norms[[i, j]] = self.norms[[j, i]]
            self.orig_sq[[i, j]] = self.orig_sq[[j, i]]

    def max_trailing(self, start):
        """(position, norm) of the largest trailing norm; first max wins."""
        tail = self.norms[start:]
        p = int(np.argmax(tail)) + start
        return p, self.norms[p]

    def downdate(self, start, row, materialize):
        """Remove ``row``'s contribution from columns start.. and recompute
        any column whose downdated norm is no longer trustworthy."""
        new_sq = self.norms[start:] ** 2 - np.asarray(row) ** 2
        np.maximum(new_sq, 0.0, out=new_sq)
        unsafe = new_sq < self.GUARD * self.orig_sq[start:]
        self.norms[start:] = np.sqrt(new_sq)
        for local in np.nonzero(unsafe)[0]:
            c = start + int(local)
            fresh = float(np.linalg.norm(materialize(c)))
            self.norms[c] = fresh
            self.orig_sq[c] = fresh * fresh
