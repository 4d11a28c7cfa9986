"""Parameter validation shared by the config, estimator and CLI layers."""

import numbers

import numpy as np
from sklearn.utils import check_scalar


def check_int(value, name, min_val=None, max_val=None):
    if isinstance(value, bool):
        raise TypeError(f"{name} must be an integer, got bool")
    if isinstance(value, np.integer):
        value = int(value)
    check_scalar(value, name, numbers.Integral, min_val=min_val, max_val=max_val)
    return int(value)


def check_real(value, name, min_val=None, max_val=None, include_boundaries="both"):
    if isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got bool")
    check_scalar(
        value,
        name,
        numbers.Real,
        min_val=min_val,
        max_val=max_val,
        include_boundaries=include_boundaries,
    )
    return float(value)


def check_choice(value, name, options):
    value = getattr(value, "value", value)
    if value not in options:
        raise ValueError(f"{name} must be one of {sorted(options)}, got {value!r}")
    return value


def check_requests(X, n, m):
    """Validate an ``(k, 2)`` array of ``(requester, content)`` pairs."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] != 2:
        raise ValueError(f"expected an array of shape (k, 2), got {X.shape}")
    if X.size and not np.issubdtype(X.dtype, np.integer):
        if not np.all(np.mod(X, 1) == 0):
            raise ValueError("requester and content indices must be integers")
        X = X.astype(np.int64)
    if X.size:
        if X[:, 0].min() < 0 or X[:, 0].max() >= n:
            raise ValueError(f"requester indices must lie in 0..{n - 1}")
        if X[:, 1].min() < 1 or X[:, 1].max() > m:
            raise ValueError(f"content indices must lie in 1..{m}")
    return X
