"""Maximum likelihood in the completion of discrete exponential family GLMs."""

import json as _json

from ._lcmfit import (
    GlmModel,
    LcmfitError,
    canonical_statistic,
    enumerate_support,
    fisher_information,
    fit_mle,
    iterate_to_lcm,
    log_likelihood,
    null_basis,
    one_sided_ci,
    oracle_boundary_status,
    oracle_ci_grid,
    oracle_dor_verify,
    run_pipeline_json,
    score,
    subspace_distance,
)


def run_pipeline(data, response, predictors, family="bernoulli", interactions=1, alpha=0.05, verify_oracle=False):
    """Runs the full pipeline on a CSV file and returns the report as a dict."""
    return _json.loads(
        run_pipeline_json(str(data), response, list(predictors), family, interactions, alpha, verify_oracle)
    )


__all__ = [
    "GlmModel",
    "LcmfitError",
    "canonical_statistic",
    "enumerate_support",
    "fisher_information",
    "fit_mle",
    "iterate_to_lcm",
    "log_likelihood",
    "null_basis",
    "one_sided_ci",
    "oracle_boundary_status",
    "oracle_ci_grid",
    "oracle_dor_verify",
    "run_pipeline",
    "score",
    "subspace_distance",
]
