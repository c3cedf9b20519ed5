"""Randomized column-pivoted QR: sample-based pivot selection, truncated
trailing-update-free factorization, an approximate truncated SVD built on it,
dense reference algorithms, and the statistics validating the sampling."""

from .analysis import (
    BiasExperimentConfig,
    TruncatedChiSq,
    chisq_moments,
    jl_bound,
    lower_incomplete_gamma,
    selection_bias_experiment,
    tau_thresholds,
    trunc_chisq_mean,
    trunc_chisq_pdf,
)
from .counters import OpCounters
from .harness import (
    ErrorCurve,
    bench,
    quality_sweep,
    spectrum_values,
    synthetic_matrix,
)
from .kernels import (
    BlockReflectors,
    NormTracker,
    Permutation,
    Reflector,
    apply_block_reflection,
    apply_reflector,
    build_t_matrix,
    column_norms,
    compose_blocks,
    downdate_norms,
    form_reflector,
)
from .matio import (
    MatrixFormatError,
    PgmFormatError,
    load_matrix_market,
    load_pgm,
    save_matrix_market,
    save_pgm,
)
from .qrcp import (
    Factorization,
    qr_blocked,
    qr_presorted,
    qrcp_blocked,
    qrcp_level2,
)
from .randomized import (
    DegenerateSampleError,
    RandomizedConfig,
    SampleState,
    make_sample,
    rqrcp,
    rsrqrcp,
    sample_update,
    select_pivots,
    ssrqrcp,
)
from .rng import RngState, gaussian_matrix
from .svd import NonConvergenceError, jacobi_svd_oracle
from .truncated import (
    TruncatedFactorization,
    TuxvFactorization,
    lq_factor,
    trqrcp,
    tuxv,
)

__version__ = "0.1.0"

__all__ = [
    "BiasExperimentConfig",
    "BlockReflectors",
    "DegenerateSampleError",
    "ErrorCurve",
    "Factorization",
    "MatrixFormatError",
    "NonConvergenceError",
    "NormTracker",
    "OpCounters",
    "Permutation",
    "PgmFormatError",
    "RandomizedConfig",
    "Reflector",
    "RngState",
    "SampleState",
    "TruncatedChiSq",
    "TruncatedFactorization",
    "TuxvFactorization",
    "apply_block_reflection",
    "apply_reflector",
    "bench",
    "build_t_matrix",
    "chisq_moments",
    "column_norms",
    "compose_blocks",
    "downdate_norms",
    "form_reflector",
    "gaussian_matrix",
    "jacobi_svd_oracle",
    "jl_bound",
    "load_matrix_market",
    "load_pgm",
    "lower_incomplete_gamma",
    "lq_factor",
    "make_sample",
    "qr_blocked",
    "qr_presorted",
    "qrcp_blocked",
    "qrcp_level2",
    "quality_sweep",
    "rqrcp",
    "rsrqrcp",
    "sample_update",
    "save_matrix_market",
    "save_pgm",
    "select_pivots",
    "selection_bias_experiment",
    "spectrum_values",
    "ssrqrcp",
    "synthetic_matrix",
    "tau_thresholds",
    "trqrcp",
    "trunc_chisq_mean",
    "trunc_chisq_pdf",
    "tuxv",
    "__version__",
]
