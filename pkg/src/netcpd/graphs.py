"""Degree statistics and high-degree trimming for network sequences.

A network sequence is an array of shape ``(T, n, n)`` holding symmetric
binary adjacency matrices with zero diagonal. Layer ranges are ``(start,
stop)`` offsets selecting ``seq[start:stop]``, i.e. layers ``start+1 .. stop``
in 1-based numbering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_adjacency_sequence, check_int, check_layer_range, check_scalar
from .spectral import spectral_norm

__all__ = [
    "DegreeProfile",
    "degree_profile",
    "top_degree_vertices",
    "trim",
    "spectral_norm",
]


@dataclass(frozen=True)
class DegreeProfile:
    """Time-averaged degrees over a range of layers.

    Attributes
    ----------
    per_vertex : ndarray of shape (n,)
        Average degree of each vertex per layer.
    global_mean : float
        Average degree per node per layer, ``per_vertex.mean()``.
    normalized : float
        ``global_mean / (1 + sqrt(4 mu))``.
    """

    per_vertex: np.ndarray
    global_mean: float
    normalized: float


def degree_profile(seq, layer_range=None, mu=1.0):
    """Average degrees of ``seq`` over ``layer_range``.

    Raises
    ------
    InvalidArgumentError
        If the layer range is empty or ``mu <= 0``.
    """
    seq = check_adjacency_sequence(seq)
    mu = check_scalar(mu, "mu", positive=True)
    start, stop = check_layer_range(layer_range, seq.shape[0])
    width = stop - start
    per_vertex = seq[start:stop].sum(axis=(0, 2), dtype=np.int64) / width
    global_mean = float(per_vertex.mean()) if per_vertex.size else 0.0
    return DegreeProfile(
        per_vertex=per_vertex,
        global_mean=global_mean,
        normalized=global_mean / (1.0 + math.sqrt(4.0 * mu)),
    )


def top_degree_vertices(degrees, gamma):
    """Indices of the ``gamma`` highest-degree vertices.

    Ties at the cut-off are resolved in favour of the lower vertex index, so
    exactly ``gamma`` vertices are returned, sorted ascending.
    """
    degrees = np.asarray(degrees)
    gamma = check_int(gamma, "gamma", min_value=0, max_value=degrees.shape[0])
    # stable sort on -degree keeps lower indices first among equal degrees
    order = np.argsort(-degrees, kind="stable")
    return np.sort(order[:gamma])


def trim(seq, layer_range=None, gamma=0):
    """Zero the rows and columns of the ``gamma`` highest-degree vertices.

    Degrees are computed over ``layer_range`` and the returned sequence is
    the restriction to that range. Vertex indexing is preserved.

    Raises
    ------
    InvalidArgumentError
        If ``gamma > n`` or the layer range is invalid.
    """
    seq = check_adjacency_sequence(seq)
    start, stop = check_layer_range(layer_range, seq.shape[0])
    n = seq.shape[1]
    gamma = check_int(gamma, "gamma", min_value=0, max_value=n)
    out = seq[start:stop].copy()
    if gamma:
        degrees = out.sum(axis=(0, 2), dtype=np.int64)
        removed = top_degree_vertices(degrees, gamma)
        out[:, removed, :] = 0
        out[:, :, removed] = 0
    return out
