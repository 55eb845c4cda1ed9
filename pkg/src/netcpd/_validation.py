"""Input validation helpers in the spirit of ``sklearn.utils.check_array``."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import InvalidArgumentError


def check_adjacency_sequence(X, *, binary=True, copy=False):
    """Validate a stack of adjacency matrices and return it as an ndarray.

    Parameters
    ----------
    X : array-like of shape (T, n, n)
        Layers of a network sequence on a shared node set.
    binary : bool, default=True
        Require entries in {0, 1} and return ``uint8``. Otherwise entries
        must lie in [0, 1] and the result is ``float64``.
    copy : bool, default=False
        Force a copy even if ``X`` already has the target dtype.

    Returns
    -------
    ndarray of shape (T, n, n)
    """
    arr = np.asarray(X)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise InvalidArgumentError(
            f"expected an array of shape (T, n, n), got shape {np.shape(X)}"
        )
    if arr.shape[0] < 1:
        raise InvalidArgumentError("a network sequence needs at least one layer")
    if arr.dtype == bool:
        arr = arr.astype(np.uint8)
    if not np.issubdtype(arr.dtype, np.number):
        raise InvalidArgumentError(f"non-numeric dtype {arr.dtype}")
    if np.issubdtype(arr.dtype, np.floating) and not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("adjacency entries must be finite")

    if binary:
        if not np.all((arr == 0) | (arr == 1)):
            raise InvalidArgumentError("observed adjacency entries must be 0 or 1")
        out = arr.astype(np.uint8, copy=copy)
    else:
        if arr.size and (arr.min() < 0 or arr.max() > 1):
            raise InvalidArgumentError("entries must lie in [0, 1]")
        out = arr.astype(np.float64, copy=copy)

    if not np.array_equal(out, out.transpose(0, 2, 1)):
        raise InvalidArgumentError("every layer must be symmetric")
    if np.any(np.diagonal(out, axis1=1, axis2=2)):
        raise InvalidArgumentError("every layer must have a zero diagonal")
    return out


def check_symmetric_matrix(m, *, atol=None):
    """Return ``m`` as a float64 ndarray after checking it is square and symmetric."""
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("matrix entries must be finite")
    scale = float(np.max(np.abs(arr))) if arr.size else 0.0
    if atol is None:
        atol = 1e-12 * max(1.0, scale)
    if arr.size and np.max(np.abs(arr - arr.T)) > atol:
        raise InvalidArgumentError("matrix is not symmetric")
    return arr


def check_layer_range(layer_range, T):
    """Normalise a layer range to a ``(start, stop)`` pair of offsets.

    ``(start, stop)`` selects layers ``start+1 .. stop`` in 1-based numbering,
    i.e. ``seq[start:stop]``. ``None`` means the whole sequence.
    """
    if layer_range is None:
        return 0, T
    try:
        start, stop = (int(v) for v in layer_range)
    except (TypeError, ValueError):
        raise InvalidArgumentError(
            f"layer_range must be a (start, stop) pair, got {layer_range!r}"
        ) from None
    if not 0 <= start < stop <= T:
        raise InvalidArgumentError(
            f"layer_range ({start}, {stop}] is empty or outside (0, {T}]"
        )
    return start, stop


def check_int(value, name, *, min_value=None, max_value=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise InvalidArgumentError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if min_value is not None and value < min_value:
        raise InvalidArgumentError(f"{name} must be >= {min_value}, got {value}")
    if max_value is not None and value > max_value:
        raise InvalidArgumentError(f"{name} must be <= {max_value}, got {value}")
    return value


def check_scalar(value, name, *, positive=False, nonnegative=False):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise InvalidArgumentError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise InvalidArgumentError(f"{name} must be finite, got {value}")
    if positive and value <= 0:
        raise InvalidArgumentError(f"{name} must be > 0, got {value}")
    if nonnegative and value < 0:
        raise InvalidArgumentError(f"{name} must be >= 0, got {value}")
    return value
