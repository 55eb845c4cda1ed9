"""Piecewise-constant edge-probability sequences and graph samplers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_int, check_scalar
from .exceptions import InvalidArgumentError
from .spectral import spectral_norm

__all__ = [
    "ProbabilitySequence",
    "GroundTruth",
    "erdos_renyi_matrix",
    "block_matrix",
    "ground_truth",
    "sample_mirgram",
    "hard_instance_detect",
    "hard_instance_localize",
]


def _check_probability_matrix(q, name="Q"):
    q = np.array(q, dtype=np.float64)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise InvalidArgumentError(f"{name} must be square, got shape {q.shape}")
    if not np.all(np.isfinite(q)) or (q.size and (q.min() < 0 or q.max() > 1)):
        raise InvalidArgumentError(f"{name} entries must lie in [0, 1]")
    if not np.array_equal(q, q.T):
        raise InvalidArgumentError(f"{name} must be symmetric")
    if np.any(np.diag(q)):
        raise InvalidArgumentError(f"{name} must have a zero diagonal")
    q.setflags(write=False)
    return q


@dataclass(frozen=True, eq=False)
class ProbabilitySequence:
    """Edge-probability matrices ``Q_1, ..., Q_{K+1}`` with change points.

    Segment ``k`` (0-based) covers layers ``boundaries[k]+1 .. boundaries[k+1]``
    where ``boundaries = (0, tau_1, ..., tau_K, T)``.
    """

    matrices: tuple
    change_points: tuple
    T: int
    _boundaries: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mats = tuple(_check_probability_matrix(q, f"matrices[{k}]") for k, q in enumerate(self.matrices))
        if not mats:
            raise InvalidArgumentError("at least one segment is required")
        T = check_int(self.T, "T", min_value=1)
        taus = tuple(int(t) for t in self.change_points)
        if len(taus) != len(mats) - 1:
            raise InvalidArgumentError(
                f"{len(mats)} segments need {len(mats) - 1} change points, got {len(taus)}"
            )
        bounds = (0, *taus, T)
        if any(a >= b for a, b in zip(bounds, bounds[1:])):
            raise InvalidArgumentError(f"change points must satisfy 0 < tau_1 < ... < T, got {taus}")
        n = mats[0].shape[0]
        if any(q.shape != (n, n) for q in mats):
            raise InvalidArgumentError("all segments must share the node count")
        for k in range(len(mats) - 1):
            if np.array_equal(mats[k], mats[k + 1]):
                raise InvalidArgumentError(f"segments {k} and {k + 1} are identical")
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "change_points", taus)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "_boundaries", bounds)

    @classmethod
    def from_segments(cls, segments):
        """Build from ``[(Q_1, end_1), ..., (Q_{K+1}, T)]``."""
        segments = list(segments)
        if not segments:
            raise InvalidArgumentError("at least one segment is required")
        mats = [q for q, _ in segments]
        ends = [int(e) for _, e in segments]
        return cls(tuple(mats), tuple(ends[:-1]), ends[-1])

    @classmethod
    def from_layers(cls, layers):
        """Collapse a ``(T, n, n)`` stack of probability matrices into segments."""
        layers = np.asarray(layers, dtype=np.float64)
        if layers.ndim != 3:
            raise InvalidArgumentError("expected an array of shape (T, n, n)")
        mats, taus = [layers[0]], []
        for t in range(1, layers.shape[0]):
            if not np.array_equal(layers[t], layers[t - 1]):
                taus.append(t)
                mats.append(layers[t])
        return cls(tuple(mats), tuple(taus), layers.shape[0])

    @classmethod
    def constant(cls, q, T):
        return cls((q,), (), T)

    @property
    def n(self):
        return self.matrices[0].shape[0]

    @property
    def K(self):
        return len(self.change_points)

    @property
    def boundaries(self):
        return self._boundaries

    def segment_lengths(self):
        b = self._boundaries
        return tuple(b[k + 1] - b[k] for k in range(len(b) - 1))

    def segment_of(self, t):
        """0-based segment index of 0-based layer ``t``."""
        return int(np.searchsorted(self._boundaries, t, side="right")) - 1

    def layer(self, t):
        """Probability matrix of 0-based layer ``t``."""
        return self.matrices[self.segment_of(t)]

    def dense(self):
        """All ``T`` layers as an array of shape ``(T, n, n)``."""
        reps = self.segment_lengths()
        return np.repeat(np.stack(self.matrices), reps, axis=0)

    def scaled(self, c):
        """Entrywise multiple ``c * Q`` for ``c`` in (0, 1]."""
        c = check_scalar(c, "c", positive=True)
        if c > 1:
            raise InvalidArgumentError("scale factor must lie in (0, 1]")
        return ProbabilitySequence(tuple(c * q for q in self.matrices), self.change_points, self.T)


@dataclass(frozen=True)
class GroundTruth:
    """Population functionals of a probability sequence.

    ``cushion`` is the shortest segment, ``signal`` the smallest spectral norm
    of a jump, ``sparsity`` the largest edge probability, ``pop_d`` is
    ``n * sparsity`` and ``pop_frakd`` the largest expected degree.
    """

    cushion: int
    signal: float
    sparsity: float
    pop_d: float
    pop_frakd: float
    n_change_points: int
    change_points: tuple
    jump_frobenius: tuple

    def boundary_ratio(self):
        """``signal / sqrt(sparsity / cushion)``; ``nan`` when sparsity is zero."""
        if self.sparsity == 0:
            return math.nan
        return self.signal / math.sqrt(self.sparsity / self.cushion)


def ground_truth(q: ProbabilitySequence) -> GroundTruth:
    jumps = [q.matrices[k + 1] - q.matrices[k] for k in range(q.K)]
    signal = min((spectral_norm(d) for d in jumps), default=0.0)
    sparsity = float(max(m.max() for m in q.matrices))
    frakd = float(max(m.sum(axis=1).max() for m in q.matrices))
    return GroundTruth(
        cushion=min(q.segment_lengths()),
        signal=float(signal),
        sparsity=sparsity,
        pop_d=q.n * sparsity,
        pop_frakd=frakd,
        n_change_points=q.K,
        change_points=q.change_points,
        jump_frobenius=tuple(float(np.linalg.norm(d)) for d in jumps),
    )


def erdos_renyi_matrix(n, p):
    """Edge-probability matrix of G(n, p): ``p`` off the diagonal, 0 on it."""
    n = check_int(n, "n", min_value=1)
    p = check_scalar(p, "p", nonnegative=True)
    if p > 1:
        raise InvalidArgumentError(f"p must lie in [0, 1], got {p}")
    q = np.full((n, n), p)
    np.fill_diagonal(q, 0.0)
    return q


def block_matrix(sizes, probs):
    """Stochastic-block-model probability matrix with the given block sizes."""
    sizes = [check_int(s, "block size", min_value=1) for s in sizes]
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape != (len(sizes), len(sizes)):
        raise InvalidArgumentError("probs must be a square matrix matching the block count")
    labels = np.repeat(np.arange(len(sizes)), sizes)
    q = probs[labels][:, labels]
    np.fill_diagonal(q, 0.0)
    return _check_probability_matrix(q, "block matrix").copy()


def sample_mirgram(q: ProbabilitySequence, seed=None):
    """Draw one network sequence with independent ``Bernoulli(Q_ij)`` edges.

    Returns an array of shape ``(T, n, n)`` and dtype ``uint8``. Identical
    ``seed`` values give identical output.
    """
    rng = np.random.default_rng(seed)
    n, T = q.n, q.T
    iu, ju = np.triu_indices(n, 1)
    out = np.zeros((T, n, n), dtype=np.uint8)
    for mat, lo, hi in zip(q.matrices, q.boundaries, q.boundaries[1:]):
        p = mat[iu, ju]
        draws = (rng.random((hi - lo, p.size)) < p).astype(np.uint8)
        out[lo:hi, iu, ju] = draws
    out |= out.transpose(0, 2, 1)
    return out


def _rademacher(rng, size):
    return rng.integers(0, 2, size=size, dtype=np.int8) * 2 - 1


def _perturbed(rho, alpha, direction):
    n = direction.shape[0]
    base = erdos_renyi_matrix(n, rho)
    pert = alpha * rho * np.asarray(direction, dtype=np.float64)
    np.fill_diagonal(pert, 0.0)
    theta = base + pert
    if theta.min() < 0 or theta.max() > 1:
        raise InvalidArgumentError(
            f"alpha={alpha}, rho={rho} push edge probabilities outside [0, 1] "
            f"(range [{theta.min():.6g}, {theta.max():.6g}])"
        )
    return base, theta


def hard_instance_detect(n, T, kappa, rho, alpha, seed=None):
    """Two-segment sequence with ``kappa`` perturbed layers followed by the base.

    Base layers are G(n, rho); the perturbed layers use
    ``rho * (11^T + alpha * U U^T)`` off the diagonal with ``U`` a Rademacher
    vector drawn from ``seed``. ``alpha = 0`` gives a constant sequence.
    """
    n = check_int(n, "n", min_value=2)
    T = check_int(T, "T", min_value=2)
    kappa = check_int(kappa, "kappa", min_value=1, max_value=T - 1)
    rho = check_scalar(rho, "rho")
    alpha = check_scalar(alpha, "alpha", nonnegative=True)
    if not 0 < rho < 1:
        raise InvalidArgumentError(f"rho must lie in (0, 1), got {rho}")
    u = _rademacher(np.random.default_rng(seed), n).astype(np.float64)
    base, theta = _perturbed(rho, alpha, np.outer(u, u))
    if alpha == 0:
        return ProbabilitySequence.constant(base, T)
    return ProbabilitySequence((theta, base), (kappa,), T)


def hard_instance_localize(n, T, kappa, rho, alpha, r=1, side="early", seed=None, max_tries=100):
    """Single change at ``kappa`` (early) or ``T - kappa`` (late).

    The perturbed matrix is ``Theta_0 + alpha * rho * offdiag(sum_i 3^-i U_i U_i^T)``
    with ``U_1..U_r`` Rademacher vectors, redrawn until the sum has rank
    ``r`` (at most ``max_tries`` draws). The perturbed block occupies the
    first ``kappa`` layers when ``side='early'`` and the last ``kappa`` when
    ``side='late'``.
    """
    n = check_int(n, "n", min_value=2)
    T = check_int(T, "T", min_value=2)
    kappa = check_int(kappa, "kappa", min_value=1, max_value=T - 1)
    r = check_int(r, "r", min_value=1, max_value=n)
    rho = check_scalar(rho, "rho")
    alpha = check_scalar(alpha, "alpha", nonnegative=True)
    if not 0 < rho < 1:
        raise InvalidArgumentError(f"rho must lie in (0, 1), got {rho}")
    if side not in ("early", "late"):
        raise InvalidArgumentError(f"side must be 'early' or 'late', got {side!r}")

    rng = np.random.default_rng(seed)
    weights = 3.0 ** -np.arange(1, r + 1)
    for _ in range(max_tries):
        u = _rademacher(rng, (n, r)).astype(np.float64)
        if np.linalg.matrix_rank(u) == r:
            break
    else:
        raise InvalidArgumentError(f"could not draw {r} independent sign vectors in {max_tries} tries")
    gamma = (u * weights) @ u.T
    base, theta = _perturbed(rho, alpha, gamma)
    if alpha == 0:
        return ProbabilitySequence.constant(base, T)
    if side == "early":
        return ProbabilitySequence((theta, base), (kappa,), T)
    return ProbabilitySequence((base, theta), (T - kappa,), T)
