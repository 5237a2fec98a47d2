"""Perishability toolkit: learning curves, effective size, decay rates and the equivalence theory."""

from ._core import (  # noqa: F401
    DataError,
    FitError,
    SaturationError,
    config_hash,
    default_config,
    effectiveness,
    entropy_rate,
    equivalent_size,
    fit_decay,
    fit_power_law,
    functional_form,
    greedy_offload,
    half_life,
    invert_curve,
    pairwise,
    validate_backend_result,
)
