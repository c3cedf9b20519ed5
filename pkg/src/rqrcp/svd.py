"""One-sided Jacobi SVD.

Dense desk-scale oracle used for quality baselines and as the rotation engine
behind the optional diagonalization of the truncated factorizations' core
matrix.  Deliberately independent of the QR machinery so the two routes can
check each other.
"""

import numpy as np

from .kernels import EPS


class NonConvergenceError(RuntimeError):
    """Raised when the sweep cap is reached before the Gram matrix is
    numerically diagonal."""

    def __init__(self, sweeps):
        super().__init__(f"Jacobi SVD failed to converge within {sweeps} sweeps")
        self.sweeps = sweeps


def _round_robin_rounds(n):
    """Disjoint column pairings covering all n*(n-1)/2 pairs in n-ish rounds
    (circle method), each round rotatable as one vectorized batch."""
    players = list(range(n))
    if n % 2:
        players.append(-1)
    nn = len(players)
    rounds = []
    circle = players[1:]
    for _ in range(nn - 1):
        lineup = [players[0]] + circle
        ps, qs = [], []
        for i in range(nn // 2):
            a, b = lineup[i], lineup[nn - 1 - i]
            if a >= 0 and b >= 0:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps), np.array(qs)))
        circle = circle[-1:] + circle[:-1]
    return rounds


def jacobi_svd_oracle(A, max_sweeps=40):
    """Full SVD (U, s, V) with s descending, via one-sided Jacobi rotations.

    Convergence: a full sweep during which every pairwise column inner product
    satisfies |<g_p, g_q>| <= 30 eps ||g_p|| ||g_q||.  Exceeding ``max_sweeps``
    raises :class:`NonConvergenceError`.  Desk-scale only (min(m, n) <= 512).
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError("expected a 2-d array")
    m, n = A.shape
    if min(m, n) > 512:
        raise ValueError("oracle is desk-scale only: min(m, n) must be <= 512")
    if m < n:
        U, s, V = jacobi_svd_oracle(A.T, max_sweeps=max_sweeps)
        return V, s, U
    G = np.array(A, dtype=np.float64, order="F")
    V = np.eye(n)
    if n <= 1:
        rounds = []
    else:
        rounds = _round_robin_rounds(n)
    tol = 30.0 * EPS
    for _ in range(max_sweeps):
        rotated = False
        for ps, qs in rounds:
            Gp = G[:, ps]
            Gq = G[:, qs]
            app = np.einsum("ij,ij->j", Gp, Gp)
            aqq = np.einsum("ij,ij->j", Gq, Gq)
            apq = np.einsum("ij,ij->j", Gp, Gq)
            mask = np.abs(apq) > tol * np.sqrt(app * aqq)
            if not mask.any():
                continue
            rotated = True
            p = ps[mask]
            q = qs[mask]
            theta = (aqq[mask] - app[mask]) / (2.0 * apq[mask])
            sign = np.where(theta >= 0.0, 1.0, -1.0)
            t = sign / (np.abs(theta) + np.sqrt(1.0 + theta * theta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            Gp, Gq = G[:, p].copy(), G[:, q]
            G[:, p] = c * Gp - s * Gq
            G[:, q] = s * Gp + c * Gq
            Vp, Vq = V[:, p].copy(), V[:, q]
            V[:, p] = c * Vp - s * Vq
            V[:, q] = s * Vp + c * Vq
        if not rotated:
            break
    else:
        raise NonConvergenceError(max_sweeps)
    s = np.linalg.norm(G, axis=0)
    order = np.argsort(-s, kind="stable")
    s = s[order]
    U = np.zeros((m, n))
    cutoff = m * EPS * (s[0] if n else 0.0)
    for i, col in enumerate(order):
        if s[i] > cutoff:
            U[:, i] = G[:, col] / s[i]
    return U, s, V[:, order]
