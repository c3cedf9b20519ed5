"""Statistics behind sample-based pivoting.

Sketch norms of unit columns are chi-squared with as many degrees of freedom
as the sample has rows; conditioning on losing a pivot comparison truncates
that distribution.  This module provides the truncated chi-squared density and
mean, the norm-preservation probability bound, the per-column truncation
thresholds implied by a partially factored sample, and a Monte Carlo
experiment measuring how much trailing mass the sample's argmax pivot rule
actually captures.
"""

import math
from dataclasses import dataclass

import numpy as np

from .counters import OpCounters  # noqa: F401  (re-exported: experiments report costs)
from .rng import RngState


def _reg_lower_gamma(a, z):
    """Regularized lower incomplete gamma P(a, z) to ~1e-14 relative: power
    series on z < a + 1, modified Lentz continued fraction for Q elsewhere."""
    if a <= 0.0:
        raise ValueError("shape parameter must be positive")
    if z < 0.0:
        raise ValueError("argument must be nonnegative")
    if z == 0.0:
        return 0.0
    log_pref = a * math.log(z) - z - math.lgamma(a)
    if z < a + 1.0:
        ap = a
        term = 1.0 / a
        total = term
        for _ in range(1000):
            ap += 1.0
            term *= z / ap
            total += term
            if abs(term) < abs(total) * 1e-16:
                break
        return min(1.0, total * math.exp(log_pref))
    tiny = 1e-300
    b = z + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return max(0.0, 1.0 - math.exp(log_pref) * h)


def lower_incomplete_gamma(a, z):
    """Unregularized lower incomplete gamma function."""
    return _reg_lower_gamma(a, z) * math.gamma(a)


def chisq_moments(dof):
    """(mean, variance) of a chi-squared variable."""
    if dof < 1:
        raise ValueError("dof must be >= 1")
    return float(dof), 2.0 * float(dof)


@dataclass
class TruncatedChiSq:
    """Chi-squared with ``dof`` degrees of freedom conditioned on not
    exceeding ``tau``."""

    dof: int
    tau: float

    def __post_init__(self):
        if self.dof < 1:
            raise ValueError("dof must be >= 1")
        if not self.tau >= 0.0:
            raise ValueError("tau must be >= 0")


def trunc_chisq_pdf(dist, x):
    """Density of the truncated distribution, zero outside (0, tau]."""
    if dist.tau == 0.0:
        raise ValueError("density undefined for tau == 0 (degenerate)")
    s = dist.dof / 2.0
    z = dist.tau / 2.0
    norm = lower_incomplete_gamma(s, z)
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    xv = np.atleast_1d(x)
    out = np.zeros_like(xv)
    mask = (xv > 0.0) & (xv <= dist.tau)
    xm = xv[mask]
    out[mask] = (xm / 2.0) ** s * np.exp(-xm / 2.0) / (xm * norm)
    return float(out[0]) if scalar else out


def trunc_chisq_mean(dist):
    """Closed-form mean dof * (1 - exp(-tau/2) / f(dof/2, tau/2)) where
    f(s, z) = s * gamma_lower(s, z) / z^s; tau == 0 gives the degenerate 0."""
    if dist.tau == 0.0:
        return 0.0
    s = dist.dof / 2.0
    z = dist.tau / 2.0
    if z > 700.0:
        # truncation beyond floating-point mass: plain chi-squared mean
        return float(dist.dof)
    f = s * lower_incomplete_gamma(s, z) / z**s
    return dist.dof * (1.0 - math.exp(-z) / f)


def jl_bound(ell, tau):
    """Lower bound on the probability that an ell-row Gaussian sketch keeps a
    fixed column's squared norm within relative distortion tau: the two-sided
    concentration bound 1 - 2 exp(-ell tau^2 (1 - tau) / 4).

    Only the open interval 0 < tau < 1/2 is covered.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if not 0.0 < tau < 0.5:
        raise ValueError("tau must lie strictly inside (0, 1/2)")
    return 1.0 - 2.0 * math.exp(-ell * tau * tau * (1.0 - tau) / 4.0)


def tau_thresholds(S, j, trailing_norms):
    """Truncation thresholds implied by a partially factored sample.

    ``S`` is the transformed sample after ``j`` completed pivot steps and
    ``trailing_norms`` the true trailing column norms of the matrix for the
    candidate columns (those at positions j..n-1).  Candidate j' lost the
    comparison at step i whenever S[i, i]^2 >= sum_{t >= i} S[t, j']^2, so its
    squared sketch tail is confined below

        tau_{j'} = min_i (S[i, i]^2 - sum_{t in i..j-1} S[t, j']^2) / ||a_{j'}||^2.

    With j == 0 nothing has been conditioned on and the thresholds are +inf.
    """
    S = np.asarray(S, dtype=np.float64)
    if not 0 <= j <= min(S.shape):
        raise ValueError("completed step count out of range")
    nt = S.shape[1] - j
    trailing_norms = np.asarray(trailing_norms, dtype=np.float64)
    if trailing_norms.shape != (nt,):
        raise ValueError("need one trailing norm per candidate column")
    if j == 0:
        return np.full(nt, np.inf)
    cols = S[:j, j:]
    # suffix sums down the completed rows: head[i, c] = sum_{t=i..j-1} cols[t, c]^2
    head = np.cumsum((cols * cols)[::-1], axis=0)[::-1]
    diag_sq = np.diag(S)[:j] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        taus = (diag_sq[:, None] - head) / trailing_norms[None, :] ** 2
    out = taus.min(axis=0)
    return np.where(trailing_norms > 0.0, out, np.inf)


_PHI_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))


@dataclass
class BiasExperimentConfig:
    """Monte Carlo setup: columns with norms phi^0, phi^1, ..., a (k + padding)-row
    sketch per trial, and the expectation of the norm of the column the argmax
    rule selects."""

    k: int = 32
    padding: int = 8
    trials: int = 1000
    seed: int = 0
    phi: tuple = _PHI_GRID
    n_cols: int = 128

    def __post_init__(self):
        if self.k < 1 or self.padding < 1:
            raise ValueError("k and padding must be >= 1")
        if self.trials < 100:
            raise ValueError("need at least 100 trials")
        if self.n_cols < 2:
            raise ValueError("need at least 2 columns")
        if any(not 0.0 <= p <= 1.0 for p in self.phi):
            raise ValueError("phi values must lie in [0, 1]")


def selection_bias_experiment(config=None):
    """For each decay rate phi, the Monte Carlo expectation of the true norm
    of the first pivot chosen from a Gaussian sketch of a matrix with
    orthogonal columns of norms phi^j (largest norm 1).

    Returns (phi grid, expectations); a value near 1 means sketch-based
    selection almost always lands on (a column as good as) the best one.
    """
    config = config if config is not None else BiasExperimentConfig()
    ell = config.k + config.padding
    rng = RngState(config.seed)
    powers = np.arange(config.n_cols)
    out = np.empty(len(config.phi))
    for idx, phi in enumerate(config.phi):
        norms = float(phi) ** powers
        draws = rng.draw(config.trials * ell * config.n_cols)
        omega = draws.reshape(config.trials, ell, config.n_cols)
        sample = omega * norms  # sketch of the diagonal matrix, per trial
        sq = np.einsum("tij,tij->tj", sample, sample)
        chosen = np.argmax(sq, axis=1)
        out[idx] = norms[chosen].mean()
    return np.asarray(config.phi, dtype=np.float64), out
