"""Corrective random-feature approximation toolkit."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .kernels import (ActivationKind, SmoothingFilter, filter_eval,
                      filter_fourier, lambda_k_eval, lambda_k_fourier,
                      sdelta_eval, srelu_eval)
from .reps import (CosineWeight, bump_eval, cosine_repr_check, cosine_repr_mc,
                   h_second_deriv)

__all__ = [
    "ActivationKind", "BACKEND", "CosineWeight", "SmoothingFilter",
    "bump_eval", "cosine_repr_check", "cosine_repr_mc", "filter_eval",
    "filter_fourier", "h_second_deriv", "lambda_k_eval", "lambda_k_fourier",
    "sdelta_eval", "srelu_eval", "__version__",
]
