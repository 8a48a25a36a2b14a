"""Dispatch to the numba kernels, or to the numpy twins when numba is disabled.

Both modules expose ``ls_fit_rows``, ``gamma_shape``, ``mixture_cdf`` and
``mixture_quantile`` with identical signatures.
"""

from .._accel import USE_NUMBA

if USE_NUMBA:
    from ._numba import gamma_shape, ls_fit_rows, mixture_cdf, mixture_quantile

    BACKEND = "numba"
else:
    from ._numpy import gamma_shape, ls_fit_rows, mixture_cdf, mixture_quantile

    BACKEND = "numpy"

FAMILY_CODES = {"normal": 0, "logistic": 1, "sev": 2, "gamma": 3}

__all__ = [
    "BACKEND",
    "FAMILY_CODES",
    "gamma_shape",
    "ls_fit_rows",
    "mixture_cdf",
    "mixture_quantile",
]
