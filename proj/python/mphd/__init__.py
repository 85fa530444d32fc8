"""Python access to the mphd C++ core: GP likelihoods, priors, acquisitions and the CLI."""

from ._mphd import (
    Gamma,
    GpParams,
    MphdError,
    Normal,
    Smoothness,
    acquisition_value,
    content_hash,
    gamma_kl,
    gamma_mle,
    gp_nll,
    gp_nll_grad,
    gp_posterior,
    gram_matrix,
    matern_correlation,
    normal_mle,
    run_cli,
)

__all__ = [
    "Gamma",
    "GpParams",
    "MphdError",
    "Normal",
    "Smoothness",
    "acquisition_value",
    "content_hash",
    "gamma_kl",
    "gamma_mle",
    "gp_nll",
    "gp_nll_grad",
    "gp_posterior",
    "gram_matrix",
    "matern_correlation",
    "normal_mle",
    "run_cli",
]
