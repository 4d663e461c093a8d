"""Parameterised IQP circuit models trained with an MMD loss.

Bitstrings are numpy uint8 arrays of shape (rows, n) holding 0/1.
"""

from ._core import (
    GateSet,
    LimitError,
    ModelKind,
    NumericError,
    ShapeError,
    bernoulli_p,
    exact_expvals,
    exact_probabilities,
    expval_bitflip,
    expval_estimate,
    gen_blobs,
    init_params_datadep,
    kgel_solve,
    loss_and_grad,
    median_heuristic,
    mmd2_samples,
    mmd2_unbiased,
    sample,
    sample_observables,
    sample_uniform,
    sigma_for_weight,
    test_mmd,
    train,
)

__all__ = [
    "GateSet",
    "LimitError",
    "ModelKind",
    "NumericError",
    "ShapeError",
    "bernoulli_p",
    "exact_expvals",
    "exact_probabilities",
    "expval_bitflip",
    "expval_estimate",
    "gen_blobs",
    "init_params_datadep",
    "kgel_solve",
    "loss_and_grad",
    "median_heuristic",
    "mmd2_samples",
    "mmd2_unbiased",
    "sample",
    "sample_observables",
    "sample_uniform",
    "sigma_for_weight",
    "test_mmd",
    "train",
]
