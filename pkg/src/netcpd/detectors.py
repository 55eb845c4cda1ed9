"""Window-scan and wild-binary-segmentation change-point detectors.

Both procedures trim high-degree vertices inside every scan interval, take
the spectral norm of the CUSUM matrix over the middle of the interval and
declare a change where the peak exceeds a degree-scaled threshold.

Layer positions follow the convention of :mod:`netcpd.cusum`: an interval
``(start, end)`` covers layers ``start+1 .. end`` and a change point ``tau``
is the last layer before the change.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from ._validation import check_adjacency_sequence, check_int, check_scalar
from .cusum import (
    LayerSums,
    epsilon_mu,
    gamma_count,
    peak_norm,
    scan_exceeding,
    scan_offsets,
    threshold,
)
from .exceptions import InvalidArgumentError
from .graphs import top_degree_vertices

__all__ = [
    "IntervalSet",
    "build_grid",
    "draw_wbs_intervals",
    "DetectorConfig",
    "Detection",
    "DetectionReport",
    "detect_window",
    "detect_wbs",
    "merge_detections",
    "critical_theta",
]


@dataclass(frozen=True)
class IntervalSet:
    """Scan intervals as ``(start, end)`` pairs covering layers ``start+1 .. end``."""

    intervals: tuple
    window: int | None
    kind: str

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)


def build_grid(T, window):
    """Deterministic grid of ``ceil(3T/window) - 2`` intervals with stride ``window // 3``.

    Interval ``l`` (1-based) starts at ``(l - 1) * (window // 3)`` and ends
    at ``min(start + window, T)``. When ``window`` is not a multiple of 3 the
    last layers of the sequence can fall outside every interval.
    """
    T = check_int(T, "T", min_value=1)
    window = check_int(window, "window")
    if not 3 <= window <= T:
        raise InvalidArgumentError(f"window must satisfy 3 <= window <= T={T}, got {window}")
    stride = window // 3
    count = -(-3 * T // window) - 2
    intervals = tuple(
        (l * stride, min(l * stride + window, T)) for l in range(count)
    )
    return IntervalSet(intervals=intervals, window=window, kind="deterministic-grid")


def draw_wbs_intervals(T, M, seed=None):
    """``M`` random intervals with endpoints uniform on ``{1, ..., T}`` and ``e > s``.

    Pairs with ``e <= s`` are redrawn.
    """
    T = check_int(T, "T", min_value=2)
    M = check_int(M, "M", min_value=1)
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < M:
        s, e = (int(v) for v in rng.integers(1, T + 1, size=2))
        if e > s:
            out.append((s, e))
    return IntervalSet(intervals=tuple(out), window=None, kind="random-wbs")


@dataclass(frozen=True)
class DetectorConfig:
    """Tuning parameters shared by both detectors.

    Parameters
    ----------
    kappa : int
        Minimum spacing between change points assumed by the detectors.
    windows : tuple of int, optional
        Window lengths swept by the window detector, largest first.
        Defaults to ``kappa, kappa - 1, ..., 3``.
    mu, zeta, theta_mu : float
        Trimming parameter, threshold exponent and threshold scale.
    M : int
        Number of random intervals for wild binary segmentation.
    seed : int, optional
        Seed for the random intervals.
    merge_proximity : int, optional
        Window detections closer than this are merged. Defaults to
        ``max(windows) // 3``.
    degree_scope : {"interval", "global"}
        Layers over which trimming degrees are computed.
    workers : int
        Thread count for the window detector's interval scans.
    """

    kappa: int
    windows: tuple | None = None
    mu: float = 1.0
    zeta: float = 1.0
    theta_mu: float = 1.0
    M: int = 200
    seed: int | None = None
    merge_proximity: int | None = None
    degree_scope: str = "interval"
    workers: int = 1

    def __post_init__(self):
        kappa = check_int(self.kappa, "kappa", min_value=3)
        if self.windows is None:
            windows = tuple(range(kappa, 2, -1))
        else:
            windows = tuple(sorted({check_int(w, "window") for w in self.windows}, reverse=True))
            if not windows or windows[-1] < 3 or windows[0] > kappa:
                raise InvalidArgumentError(f"windows must lie in [3, kappa={kappa}], got {self.windows}")
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "windows", windows)
        object.__setattr__(self, "mu", check_scalar(self.mu, "mu", positive=True))
        object.__setattr__(self, "zeta", check_scalar(self.zeta, "zeta", positive=True))
        object.__setattr__(self, "theta_mu", check_scalar(self.theta_mu, "theta_mu", nonnegative=True))
        object.__setattr__(self, "M", check_int(self.M, "M", min_value=1))
        if self.seed is not None:
            object.__setattr__(self, "seed", check_int(self.seed, "seed", min_value=0))
        if self.merge_proximity is not None:
            object.__setattr__(
                self, "merge_proximity", check_int(self.merge_proximity, "merge_proximity", min_value=0)
            )
        if self.degree_scope not in ("interval", "global"):
            raise InvalidArgumentError(
                f"degree_scope must be 'interval' or 'global', got {self.degree_scope!r}"
            )
        object.__setattr__(self, "workers", check_int(self.workers, "workers", min_value=1))

    @property
    def proximity(self):
        if self.merge_proximity is not None:
            return self.merge_proximity
        return self.windows[0] // 3

    def replace(self, **changes):
        params = asdict(self)
        params.update(changes)
        return DetectorConfig(**params)


@dataclass(frozen=True)
class Detection:
    tau_hat: int
    window: int
    interval: tuple
    stat: float
    threshold: float

    @property
    def ratio(self):
        """``stat / threshold``; infinite for a zero threshold."""
        return self.stat / self.threshold if self.threshold > 0 else math.inf


@dataclass(frozen=True)
class DetectionReport:
    detections: tuple
    algorithm: str
    config: DetectorConfig
    candidates: tuple = field(default=(), repr=False)

    @property
    def estimated_K(self):
        return len(self.detections)

    @property
    def change_points(self):
        return tuple(d.tau_hat for d in self.detections)


def merge_detections(raw, proximity):
    """Collapse detections whose ``tau_hat`` values chain within ``proximity``.

    Sorted detections form one group while consecutive gaps are at most
    ``proximity``. Each group is represented by its smallest-window member,
    ties going to the largest ``stat / threshold``. Output is sorted by
    ``tau_hat``.
    """
    proximity = check_int(proximity, "proximity", min_value=0)
    ordered = sorted(raw, key=lambda d: (d.tau_hat, d.window, -d.ratio))
    groups = []
    for det in ordered:
        if groups and det.tau_hat - groups[-1][-1].tau_hat <= proximity:
            groups[-1].append(det)
        else:
            groups.append([det])
    reps = [min(g, key=lambda d: (d.window, -d.ratio, d.tau_hat)) for g in groups]
    return sorted(reps, key=lambda d: d.tau_hat)


class _Task(NamedTuple):
    start: int
    stop: int
    window: int
    cushion: int
    removed: np.ndarray
    base: float  # threshold at theta_mu = 1


def _prepare(seq, cfg, algorithm):
    if not isinstance(cfg, DetectorConfig):
        raise InvalidArgumentError(f"cfg must be a DetectorConfig, got {type(cfg).__name__}")
    seq = check_adjacency_sequence(seq)
    T, n = seq.shape[0], seq.shape[1]
    if n < 3:
        raise InvalidArgumentError(f"detectors need n >= 3 vertices, got {n}")
    if algorithm == "window" and T < 3:
        raise InvalidArgumentError(f"the window detector needs T >= 3 layers, got {T}")
    return LayerSums(seq), T, n


def _removed(sums, cfg, start, stop, gamma):
    if gamma == 0:
        return np.zeros(0, dtype=np.intp)
    if cfg.degree_scope == "global":
        degrees = sums.mean_degrees(0, sums.T)
    else:
        degrees = sums.mean_degrees(start, stop)
    return top_degree_vertices(degrees, gamma)


def _window_tasks(sums, cfg):
    T, n = sums.T, sums.n
    d_bar = sums.mean_degree(0, T)
    tasks = []
    for window in cfg.windows:
        if window > T:
            continue
        grid = build_grid(T, window)
        count = len(grid)
        eps, _ = epsilon_mu(n, count)
        gamma = gamma_count(cfg.mu, n, count, window, d_bar, eps)
        base = threshold(1.0, cfg.zeta, d_bar, window, count, n).value
        for start, stop in grid:
            if scan_offsets(stop - start, window // 3).size == 0:
                continue
            removed = _removed(sums, cfg, start, stop, gamma)
            tasks.append(_Task(start, stop, window, window // 3, removed, base))
    return tasks


def _wbs_task(sums, cfg, start, stop, eps):
    n = sums.n
    d_bar = sums.mean_degree(start, stop)
    gamma = gamma_count(cfg.mu, n, cfg.M, cfg.kappa, d_bar, eps)
    base = threshold(1.0, cfg.zeta, d_bar, cfg.kappa, cfg.M, n).value
    removed = _removed(sums, cfg, start, stop, gamma)
    return _Task(start, stop, stop - start, cfg.kappa // 3, removed, base)


def _run_task(sums, task, theta):
    hit = scan_exceeding(
        sums, task.start, task.stop - task.start, task.cushion, task.removed, theta * task.base
    )
    if hit is None:
        return None
    u, stat = hit
    return Detection(
        tau_hat=task.start + u,
        window=task.window,
        interval=(task.start, task.stop),
        stat=stat,
        threshold=theta * task.base,
    )


def _map(fn, items, workers):
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def detect_window(seq, cfg: DetectorConfig):
    """Scan deterministic grids for every window length and merge the hits.

    For each window ``L`` in ``cfg.windows`` (skipping those longer than the
    sequence) the grid from :func:`build_grid` is scanned. The threshold
    uses the degree averaged over the whole sequence; trimming uses degrees
    over each interval unless ``cfg.degree_scope == 'global'``.

    Returns
    -------
    DetectionReport
        Merged detections; the unmerged ones are kept in ``candidates``.
    """
    sums, _, _ = _prepare(seq, cfg, "window")
    tasks = _window_tasks(sums, cfg)
    hits = _map(lambda t: _run_task(sums, t, cfg.theta_mu), tasks, cfg.workers)
    raw = tuple(h for h in hits if h is not None)
    merged = tuple(merge_detections(raw, cfg.proximity))
    return DetectionReport(detections=merged, algorithm="window", config=cfg, candidates=raw)


def detect_wbs(seq, cfg: DetectorConfig, intervals=None):
    """Wild binary segmentation over ``cfg.M`` random intervals.

    Intervals are drawn once from ``cfg.seed`` unless ``intervals`` (an
    :class:`IntervalSet` or sequence of ``(s, e)`` pairs) is given. Starting
    from ``(1, T)``, a segment ``(s, e)`` with ``e - s >= kappa`` considers
    every interval inside it of length at least ``kappa``; those whose peak
    CUSUM norm exceeds their threshold are candidates, the one with the
    largest norm supplies the change point ``u``, and the search continues
    on ``(s, u)`` and ``(u + 1, e)``.
    """
    sums, T, n = _prepare(seq, cfg, "wbs")
    if intervals is None:
        if T < 2:
            return DetectionReport(detections=(), algorithm="wbs", config=cfg)
        intervals = draw_wbs_intervals(T, cfg.M, cfg.seed)
    pairs = [(int(s), int(e)) for s, e in intervals]
    for s, e in pairs:
        if not 0 <= s < e <= T:
            raise InvalidArgumentError(f"interval ({s}, {e}) is not inside (0, {T}]")
    eps, _ = epsilon_mu(n, cfg.M)
    kappa = cfg.kappa
    cache = {}

    def candidate(m):
        if m not in cache:
            s, e = pairs[m]
            cache[m] = _run_task(sums, _wbs_task(sums, cfg, s, e, eps), cfg.theta_mu)
        return cache[m]

    found = []
    stack = [(1, T)]
    while stack:
        s, e = stack.pop()
        if e - s < kappa:
            continue
        eligible = [m for m, (sm, em) in enumerate(pairs) if s <= sm and em <= e and em - sm >= kappa]
        hits = [h for h in (candidate(m) for m in eligible) if h is not None]
        if not hits:
            continue
        best = max(hits, key=lambda d: d.stat)  # max() keeps the first of equal stats
        found.append(best)
        u0 = best.tau_hat
        stack.append((u0 + 1, e))
        stack.append((s, u0))
    detections = tuple(sorted(found, key=lambda d: d.tau_hat))
    return DetectionReport(detections=detections, algorithm="wbs", config=cfg, candidates=detections)


def _max_ratio(sums, tasks):
    """Largest ``peak norm / base threshold`` over ``tasks``.

    Each task only needs exact eigenvalues where it can beat the running
    maximum, which :func:`peak_norm` decides with Cholesky screens.
    """
    best = 0.0
    for task in tasks:
        length = task.stop - task.start
        stack = sums.cusum_stack(task.start, length, scan_offsets(length, task.cushion), task.removed)
        if task.base == 0:
            if peak_norm(stack) is not None:
                return math.inf
            continue
        peak = peak_norm(stack, best * task.base)
        if peak is not None:
            best = max(best, peak[1] / task.base)
    return best


def critical_theta(seq, cfg: DetectorConfig, algorithm="window", intervals=None):
    """Smallest threshold scale at which ``seq`` produces no detection.

    The detector reports at least one change point exactly when
    ``cfg.theta_mu`` is below the returned value, so the false-alarm rate
    of any ``theta_mu`` on a batch of null samples is the fraction of their
    critical values exceeding it. ``cfg.theta_mu`` itself is ignored.
    """
    if algorithm == "window":
        sums, _, _ = _prepare(seq, cfg, "window")
        return _max_ratio(sums, _window_tasks(sums, cfg))
    if algorithm != "wbs":
        raise InvalidArgumentError(f"algorithm must be 'window' or 'wbs', got {algorithm!r}")
    sums, T, n = _prepare(seq, cfg, "wbs")
    if T - 1 < cfg.kappa:
        return 0.0
    if intervals is None:
        intervals = draw_wbs_intervals(T, cfg.M, cfg.seed)
    eps, _ = epsilon_mu(n, cfg.M)
    # the first split considers every interval, so a detection happens iff
    # some root-level interval fires
    tasks = [
        _wbs_task(sums, cfg, s, e, eps)
        for s, e in intervals
        if e - s >= cfg.kappa and s >= 1
    ]
    return _max_ratio(sums, tasks)
