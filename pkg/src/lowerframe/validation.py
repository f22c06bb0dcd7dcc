"""Input validation for array-shaped families.

scikit-learn's ``check_array`` rejects complex input, so families are
validated here instead.
"""

import numbers

import numpy as np

from .exceptions import InputError


def check_family_array(X, *, n_vectors=None, n_features=None):
    """Return ``X`` as a finite 2-D float or complex array, one vector per row.

    Parameters
    ----------
    X : array_like of shape (n_vectors, n_features)
    n_vectors, n_features : int, optional
        Required shape, e.g. the shape seen during ``fit``.
    """
    try:
        arr = np.asarray(X)
    except (TypeError, ValueError) as exc:
        raise InputError(f"cannot convert input to an array: {exc}")
    if arr.dtype == object or not (
        np.issubdtype(arr.dtype, np.number) or arr.dtype == bool
    ):
        raise InputError(f"expected numeric input, got dtype {arr.dtype}")
    arr = arr.astype(complex if np.iscomplexobj(arr) else float)
    if arr.ndim != 2:
        raise InputError(f"expected a 2-D array (n_vectors, n_features), got {arr.ndim}-D")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InputError(f"empty input of shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("input contains NaN or infinity")
    if n_vectors is not None and arr.shape[0] != n_vectors:
        raise InputError(f"expected {n_vectors} vectors, got {arr.shape[0]}")
    if n_features is not None and arr.shape[1] != n_features:
        raise InputError(f"expected {n_features} features, got {arr.shape[1]}")
    return arr


def check_choice(name, value, choices):
    if value not in choices:
        raise InputError(f"{name} must be one of {tuple(choices)}, got {value!r}")
    return value


def check_scalar(name, value, *, min_val=None, strict=False, integer=False):
    kind = numbers.Integral if integer else numbers.Real
    if isinstance(value, bool) or not isinstance(value, kind):
        raise InputError(f"{name} must be {'an integer' if integer else 'a real number'}, got {value!r}")
    if min_val is not None and (value <= min_val if strict else value < min_val):
        op = ">" if strict else ">="
        raise InputError(f"{name} must be {op} {min_val}, got {value!r}")
    return value
