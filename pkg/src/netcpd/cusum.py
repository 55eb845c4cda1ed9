"""CUSUM statistics on trimmed adjacency matrices and their tuning quantities.

Offsets inside a scan interval are relative: an interval ``(start, length)``
holds layers ``start+1 .. start+length`` (1-based) and offset ``t`` splits it
into the first ``t`` and the remaining ``length - t`` layers. A change point
reported at offset ``t`` is the absolute layer ``start + t``, the last layer
before the change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_int, check_scalar
from .exceptions import ConvergenceError, DegenerateModelError, DomainError, InvalidArgumentError
from .spectral import norms_below, spectral_norms

__all__ = [
    "phi",
    "phi_inverse",
    "PsiTriple",
    "epsilon_mu",
    "psi_triple",
    "gamma_count",
    "ThresholdSpec",
    "threshold",
    "cusum",
    "scan_interval",
    "LayerSums",
]


def phi(z):
    """``z log z - z + 1`` on ``[1, inf)``."""
    z = float(z)
    if not z >= 1:
        raise DomainError(f"phi is defined for z >= 1, got {z}")
    d = z - 1.0
    return z * math.log1p(d) - d


def phi_inverse(y, tol=1e-12):
    """Solve ``phi(z) = y`` for ``z >= 1``.

    Bisection on ``[1, e(1 + y)]`` (``phi(e(1+y)) >= y`` for every ``y >= 0``)
    narrows the bracket, then Newton steps polish the root to working
    precision. The result satisfies ``|phi(z) - y| <= tol * max(1, y)``.

    Raises
    ------
    DomainError
        If ``y < 0`` or ``y`` is not finite.
    ConvergenceError
        If the residual tolerance is not met.
    """
    y = float(y)
    if not y >= 0 or math.isinf(y):
        raise DomainError(f"phi_inverse needs a finite y >= 0, got {y}")
    if not tol > 0:
        raise InvalidArgumentError(f"tol must be > 0, got {tol}")
    if y == 0:
        return 1.0
    lo, hi = 1.0, math.e * (1.0 + y)
    while hi - lo > 1e-6 * hi:
        mid = 0.5 * (lo + hi)
        if phi(mid) < y:
            lo = mid
        else:
            hi = mid
    z = 0.5 * (lo + hi)
    for _ in range(60):
        err = phi(z) - y
        if err == 0:
            break
        # phi is convex, so Newton from inside the bracket stays in it
        z_new = min(max(z - err / math.log(z), lo), hi)
        if abs(z_new - z) <= 4 * math.ulp(z):
            z = z_new
            break
        z = z_new
    residual = abs(phi(z) - y)
    if residual > tol * max(1.0, y):
        raise ConvergenceError(
            f"phi_inverse({y}) stalled with residual {residual:.3g}", last_iterate=z
        )
    return z


@dataclass(frozen=True)
class PsiTriple:
    epsilon_mu: float
    psi_mu: float
    eta: float


def _main_branch(n, num_intervals):
    # |L| in (e, e^n), compared on the log scale to avoid overflow in e^n
    log_l = math.log(num_intervals)
    return 1.0 < log_l < n


def epsilon_mu(n, num_intervals):
    """Return ``(epsilon, eta)`` for ``n`` vertices and ``num_intervals`` scan intervals.

    In the regime ``e < |L| < e^n``, ``eta = log n / log log |L|`` and
    ``epsilon = (2 eta - 2) / (6 eta - 3)``; otherwise ``epsilon = 1/6`` and
    ``eta = 1``. Neither depends on the unknown population degree, so both
    can be evaluated from data.
    """
    n = check_int(n, "n", min_value=2)
    num_intervals = check_int(num_intervals, "num_intervals", min_value=1)
    if _main_branch(n, num_intervals):
        eta = math.log(n) / math.log(math.log(num_intervals))
        return (2 * eta - 2) / (6 * eta - 3), eta
    return 1.0 / 6.0, 1.0


def psi_triple(mu, n, num_intervals, window, pop_frakd):
    """Compute ``(epsilon_mu, Psi_mu, eta)``.

    ``window`` is ``min(Lambda, kappa)`` and ``pop_frakd`` the largest expected
    vertex degree. ``mu`` is validated for interface symmetry with
    :func:`gamma_count`; the triple itself does not depend on it.

    Raises
    ------
    DegenerateModelError
        If ``pop_frakd == 0``.
    """
    check_scalar(mu, "mu", positive=True)
    n = check_int(n, "n", min_value=3)
    num_intervals = check_int(num_intervals, "num_intervals", min_value=1)
    window = check_scalar(window, "window")
    if window < 1:
        raise InvalidArgumentError(f"window must be >= 1, got {window}")
    frakd = check_scalar(pop_frakd, "pop_frakd", nonnegative=True)
    if frakd == 0:
        raise DegenerateModelError("Psi is undefined when the expected degree is zero")

    eps, eta = epsilon_mu(n, num_intervals)
    wd = window * frakd
    if _main_branch(n, num_intervals):
        loglog = math.log(math.log(num_intervals))
        arg = max(loglog / wd, 3.0) / (2.0 / 3.0 - 2.0 * eps)
    else:
        arg = max(2.0 * math.log(num_intervals), 3.0 * wd) / ((1.0 / 3.0 - eps) * wd)
    return PsiTriple(epsilon_mu=eps, psi_mu=phi_inverse(arg), eta=eta)


def gamma_count(mu, n, num_intervals, window, d_bar, epsilon_mu):
    """Number of highest-degree vertices to trim.

    ``ceil(25n/4 * exp(-c * B))`` where, for ``e < |L| < e^n``,
    ``c = 3 eps / (2 - 6 eps)`` and ``B = max(log log |L|, 3 w Dbar / (1 + sqrt(4 mu)))``;
    otherwise ``c = 3 eps / (1 - 3 eps)`` and ``log log |L|`` is replaced by
    ``2 log |L|``. The ceiling of a positive number is at least 1 and the
    result is capped at ``n``.
    """
    mu = check_scalar(mu, "mu", positive=True)
    n = check_int(n, "n", min_value=1)
    num_intervals = check_int(num_intervals, "num_intervals", min_value=1)
    window = check_scalar(window, "window", positive=True)
    d_bar = check_scalar(d_bar, "d_bar", nonnegative=True)
    eps = check_scalar(epsilon_mu, "epsilon_mu")
    if not 0 < eps < 1.0 / 3.0:
        raise DomainError(f"epsilon_mu must lie in (0, 1/3), got {eps}")

    degree_term = 3.0 * window * d_bar / (1.0 + math.sqrt(4.0 * mu))
    if _main_branch(n, num_intervals):
        rate = 3.0 * eps / (2.0 - 6.0 * eps)
        bracket = max(math.log(math.log(num_intervals)), degree_term)
    else:
        rate = 3.0 * eps / (1.0 - 3.0 * eps)
        bracket = max(2.0 * math.log(num_intervals), degree_term)
    value = 6.25 * n * math.exp(-rate * bracket)
    return int(min(n, max(1, math.ceil(value))))


@dataclass(frozen=True)
class ThresholdSpec:
    theta_mu: float
    zeta: float
    value: float


def threshold(theta_mu, zeta, d_bar, window, num_intervals, n):
    """Detection threshold ``theta * sqrt((Dbar / w) * (zeta + 6 + log|L| / log n))``.

    For wild binary segmentation pass ``window=kappa`` and ``num_intervals=M``.
    """
    theta_mu = check_scalar(theta_mu, "theta_mu", nonnegative=True)
    zeta = check_scalar(zeta, "zeta", positive=True)
    d_bar = check_scalar(d_bar, "d_bar", nonnegative=True)
    window = check_scalar(window, "window", positive=True)
    num_intervals = check_int(num_intervals, "num_intervals", min_value=1)
    n = check_int(n, "n", min_value=3)
    scale = (d_bar / window) * (zeta + 6.0 + math.log(num_intervals) / math.log(n))
    return ThresholdSpec(theta_mu=theta_mu, zeta=zeta, value=theta_mu * math.sqrt(scale))


class LayerSums:
    """Prefix sums of a layer stack for O(n^2) CUSUM evaluation.

    ``sums[k]`` is the sum of the first ``k`` layers and ``degrees[k]`` the
    per-vertex degree totals over them.
    """

    def __init__(self, layers):
        layers = np.asarray(layers)
        T, n, _ = layers.shape
        self.T, self.n = T, n
        self.sums = np.zeros((T + 1, n, n))
        np.cumsum(layers, axis=0, out=self.sums[1:])
        self.degrees = np.zeros((T + 1, n))
        np.cumsum(layers.sum(axis=2), axis=0, out=self.degrees[1:])

    def mean_degrees(self, start, stop):
        """Per-vertex degrees averaged over layers ``start+1 .. stop``."""
        return (self.degrees[stop] - self.degrees[start]) / (stop - start)

    def mean_degree(self, start, stop):
        """Average degree per vertex per layer over ``start+1 .. stop``."""
        return float(self.mean_degrees(start, stop).mean())

    def cusum_stack(self, start, length, offsets, removed=()):
        """CUSUM matrices for each offset, with ``removed`` vertices zeroed."""
        offsets = np.asarray(offsets, dtype=np.int64)
        base = self.sums[start]
        total = self.sums[start + length] - base
        t = offsets.astype(np.float64)
        weight = np.sqrt((t / length) * (1.0 - t / length))
        # left and right sums are integers, so equal averages cancel exactly
        g = self.sums[start + offsets]
        g -= base
        right = total - g
        g /= t[:, None, None]
        right /= (length - t)[:, None, None]
        g -= right
        g *= weight[:, None, None]
        if len(removed):
            g[:, removed, :] = 0.0
            g[:, :, removed] = 0.0
        return g


def _as_layers(trimmed):
    arr = np.asarray(trimmed, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise InvalidArgumentError(f"expected layers of shape (T, n, n), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("layer entries must be finite")
    if not np.array_equal(arr, arr.transpose(0, 2, 1)):
        raise InvalidArgumentError("every layer must be symmetric")
    return arr


def _check_interval(interval, T):
    try:
        start, length = (int(v) for v in interval)
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"interval must be a (start, length) pair, got {interval!r}") from None
    if start < 0 or length < 2 or start + length > T:
        raise InvalidArgumentError(f"interval (start={start}, length={length}) does not fit in {T} layers")
    return start, length


def cusum(trimmed, interval, t_rel):
    """CUSUM matrix at relative offset ``t_rel`` of ``interval = (start, length)``.

    ``sqrt((t/L)(1 - t/L)) * (mean of first t layers - mean of last L - t layers)``.
    """
    layers = _as_layers(trimmed)
    start, length = _check_interval(interval, layers.shape[0])
    t_rel = check_int(t_rel, "t_rel")
    if not 1 <= t_rel <= length - 1:
        raise InvalidArgumentError(f"t_rel must lie in [1, {length - 1}], got {t_rel}")
    sums = LayerSums(layers[start : start + length])
    return sums.cusum_stack(0, length, [t_rel])[0]


def scan_offsets(length, cushion):
    """Offsets ``cushion+1 .. length-cushion`` scanned inside an interval."""
    return np.arange(cushion + 1, length - cushion + 1)


def scan_interval(trimmed, interval, cushion):
    """Maximise the CUSUM spectral norm over the middle of an interval.

    Returns
    -------
    u : int
        Maximising relative offset in ``(cushion, length - cushion]``; the
        smallest one on ties.
    stat : float
        The spectral norm at ``u``.
    """
    layers = _as_layers(trimmed)
    start, length = _check_interval(interval, layers.shape[0])
    cushion = check_int(cushion, "cushion", min_value=0)
    offsets = scan_offsets(length, cushion)
    if offsets.size == 0:
        raise InvalidArgumentError(f"scan range ({cushion}, {length - cushion}] is empty")
    sums = LayerSums(layers[start : start + length])
    norms = spectral_norms(sums.cusum_stack(0, length, offsets))
    best = int(np.argmax(norms))
    return int(offsets[best]), float(norms[best])


def peak_norm(stack, floor=0.0):
    """Index and value of the largest spectral norm in ``stack`` above ``floor``.

    Matrices are visited in decreasing Frobenius norm, an upper bound on the
    spectral norm, and each is screened against the running peak with
    :func:`norms_below` before its eigenvalues are computed. Ties go to the
    lowest index. Returns ``None`` when no norm strictly exceeds ``floor``.
    """
    if floor > 0 and norms_below(stack, floor):
        return None
    frob = np.sqrt((stack * stack).sum(axis=(1, 2)))
    best_i, best = None, float(floor)
    for i in np.argsort(-frob, kind="stable"):
        if frob[i] < best or (best_i is None and frob[i] <= best):
            break
        g = stack[i : i + 1]
        if best > 0 and norms_below(g, best):
            continue
        value = float(spectral_norms(g)[0])
        if value > best or (value == best and best_i is not None and i < best_i):
            best_i, best = int(i), value
    return None if best_i is None else (best_i, best)


def scan_exceeding(sums: LayerSums, start, length, cushion, removed, bound):
    """Scan an interval, returning ``(u, stat)`` only if some norm exceeds ``bound``."""
    offsets = scan_offsets(length, cushion)
    if offsets.size == 0:
        return None
    peak = peak_norm(sums.cusum_stack(start, length, offsets, removed), bound)
    if peak is None:
        return None
    return int(offsets[peak[0]]), peak[1]
