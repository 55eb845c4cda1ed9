"""Monte Carlo risk, localization and threshold calibration for the detectors.

Every replicate draws its randomness from
``SeedSequence([seed, replicate, arm])`` with ``arm`` 0 for null samples
and 1 for alternative samples, so results do not depend on the number of
worker threads or on execution order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_int, check_scalar
from .detectors import DetectionReport, DetectorConfig, critical_theta, detect_wbs, detect_window
from .exceptions import CalibrationError, InvalidArgumentError
from .models import ProbabilitySequence, erdos_renyi_matrix, ground_truth, hard_instance_detect, sample_mirgram

__all__ = [
    "RiskEstimate",
    "LocalizationResult",
    "CalibrationResult",
    "SweepRow",
    "replicate_seeds",
    "run_replicates",
    "estimate_risk",
    "localization_error",
    "calibrate_theta",
    "phase_sweep",
    "DEFAULT_THETA_GRID",
]

NULL_ARM, ALT_ARM = 0, 1
DEFAULT_THETA_GRID = np.geomspace(1e-3, 1e3, 601)


@dataclass(frozen=True)
class RiskEstimate:
    type_i: float
    type_ii: float
    pi_hat: float
    replicates: int
    ci_half_width: float


@dataclass(frozen=True)
class LocalizationResult:
    matched: bool
    max_abs_error: float
    per_point_errors: tuple


@dataclass(frozen=True)
class CalibrationResult:
    theta_mu: float
    type_i: float
    target_type_i: float
    replicates: int
    critical_values: np.ndarray = field(repr=False)
    grid: np.ndarray = field(repr=False)


def replicate_seeds(seed, replicate, arm):
    """Independent ``(data, detector)`` seeds for one replicate of one arm."""
    data, detector = np.random.SeedSequence([seed, replicate, arm]).spawn(2)
    return data, int(detector.generate_state(1)[0])


def _map(fn, items, workers):
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _sample(gen, data_seed):
    if isinstance(gen, ProbabilitySequence):
        return sample_mirgram(gen, data_seed)
    if callable(gen):
        # factories receive their own stream so the instance and the sample
        # are independent
        inst_seed, sample_seed = data_seed.spawn(2)
        q = gen(int(inst_seed.generate_state(1)[0]))
        return sample_mirgram(q, sample_seed)
    raise InvalidArgumentError("a generator must be a ProbabilitySequence or a callable returning one")


def _resolve_detector(detector, cfg):
    if callable(detector):
        return lambda seq, det_seed: detector(seq)
    if detector == "window":
        return lambda seq, det_seed: detect_window(seq, cfg)
    if detector == "wbs":
        if cfg.seed is not None:
            return lambda seq, det_seed: detect_wbs(seq, cfg)
        return lambda seq, det_seed: detect_wbs(seq, cfg.replace(seed=det_seed))
    raise InvalidArgumentError(f"detector must be 'window', 'wbs' or a callable, got {detector!r}")


def run_replicates(gen, fn, replicates, seed, arm, workers=1):
    """Apply ``fn(seq, detector_seed)`` to ``replicates`` samples of ``gen``, in order."""
    replicates = check_int(replicates, "replicates", min_value=1)
    seed = check_int(seed, "seed", min_value=0)

    def one(r):
        data_seed, det_seed = replicate_seeds(seed, r, arm)
        return fn(_sample(gen, data_seed), det_seed)

    return _map(one, range(replicates), check_int(workers, "workers", min_value=1))


def _estimated_k(report):
    if isinstance(report, DetectionReport):
        return report.estimated_K
    k = getattr(report, "estimated_K", report)
    return int(k)


def _risk(null_hits, alt_misses, replicates):
    p1 = null_hits / replicates
    p2 = alt_misses / replicates
    var = p1 * (1 - p1) / replicates + p2 * (1 - p2) / replicates
    return RiskEstimate(
        type_i=p1,
        type_ii=p2,
        pi_hat=p1 + p2,
        replicates=replicates,
        ci_half_width=1.96 * math.sqrt(var),
    )


def estimate_risk(null_gen, alt_gen, detector, cfg=None, replicates=100, seed=0, workers=1, return_reports=False):
    """Empirical type-I and type-II errors of a detector-induced test.

    The test rejects when the detector reports at least one change point.
    ``detector`` is ``'window'``, ``'wbs'`` or a callable mapping a sequence
    to a report (or to an estimated change-point count).

    Returns
    -------
    RiskEstimate, or ``(RiskEstimate, null_reports, alt_reports)`` when
    ``return_reports`` is set.
    """
    if not callable(detector) and not isinstance(cfg, DetectorConfig):
        raise InvalidArgumentError("the built-in detectors need a DetectorConfig")
    fn = _resolve_detector(detector, cfg)
    null_reports = run_replicates(null_gen, fn, replicates, seed, NULL_ARM, workers)
    alt_reports = run_replicates(alt_gen, fn, replicates, seed, ALT_ARM, workers)
    est = _risk(
        sum(_estimated_k(r) >= 1 for r in null_reports),
        sum(_estimated_k(r) == 0 for r in alt_reports),
        len(null_reports),
    )
    if return_reports:
        return est, null_reports, alt_reports
    return est


def localization_error(report, truth, tolerance):
    """Pair estimated and true change points in sorted order.

    ``report`` may be a :class:`DetectionReport` or a sequence of change
    points; ``truth`` a :class:`ProbabilitySequence` or a sequence. With
    unequal counts nothing is paired and ``max_abs_error`` is infinite.
    """
    tolerance = check_scalar(tolerance, "tolerance", nonnegative=True)
    est = sorted(report.change_points if isinstance(report, DetectionReport) else report)
    true = sorted(truth.change_points if isinstance(truth, ProbabilitySequence) else truth)
    if len(est) != len(true):
        return LocalizationResult(matched=False, max_abs_error=math.inf, per_point_errors=())
    errors = tuple(abs(int(a) - int(b)) for a, b in zip(est, true))
    worst = max(errors, default=0)
    return LocalizationResult(matched=worst <= tolerance, max_abs_error=worst, per_point_errors=errors)


def calibrate_theta(null_gen, detector, cfg, target_type_i=0.05, replicates=200, seed=0, grid=None, workers=1):
    """Smallest threshold scale on ``grid`` with empirical type-I error at most the target.

    Each null replicate contributes its critical value, the threshold scale
    below which the detector fires on it; the type-I error at ``theta`` is
    the fraction of critical values above ``theta``. That curve is
    non-increasing in ``theta`` and is bisected over the grid.

    Raises
    ------
    CalibrationError
        If even the largest grid value leaves the type-I error above target.
    """
    target = check_scalar(target_type_i, "target_type_i")
    if not 0 < target < 1:
        raise InvalidArgumentError(f"target_type_i must lie in (0, 1), got {target}")
    if detector not in ("window", "wbs"):
        raise InvalidArgumentError(f"calibration needs detector 'window' or 'wbs', got {detector!r}")
    grid = DEFAULT_THETA_GRID if grid is None else np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0) or grid[0] < 0:
        raise InvalidArgumentError("grid must be a non-empty increasing sequence of non-negative values")

    def crit(seq, det_seed):
        run_cfg = cfg if detector == "window" or cfg.seed is not None else cfg.replace(seed=det_seed)
        return critical_theta(seq, run_cfg, detector)

    critical = np.array(run_replicates(null_gen, crit, replicates, seed, NULL_ARM, workers))

    def type_i(theta):
        return float(np.mean(critical > theta))

    lo, hi = 0, grid.size - 1
    if type_i(grid[hi]) > target:
        raise CalibrationError(
            f"type-I error {type_i(grid[hi]):.3f} exceeds target {target} even at theta_mu={grid[hi]:g}",
            diagnostics={
                "grid_max": float(grid[hi]),
                "type_i_at_max": type_i(grid[hi]),
                "critical_quantiles": np.quantile(critical, [0.5, 0.9, 0.99]).tolist(),
            },
        )
    if type_i(grid[lo]) <= target:
        hi = lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if type_i(grid[mid]) <= target:
            hi = mid
        else:
            lo = mid
    curve = np.array([type_i(t) for t in grid])
    assert np.all(np.diff(curve) <= 0), "type-I error must be non-increasing in theta_mu"
    return CalibrationResult(
        theta_mu=float(grid[hi]),
        type_i=type_i(grid[hi]),
        target_type_i=target,
        replicates=len(critical),
        critical_values=critical,
        grid=grid,
    )


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    rho: float
    kappa: int
    cushion: int
    signal: float
    sparsity: float
    boundary_ratio: float
    type_i: float
    type_ii: float
    pi_hat: float
    ci: float
    localized: float
    seconds: float = field(default=0.0, compare=False)


def phase_sweep(
    alphas, rhos, kappas, n, T, detector, cfg, replicates=100, seed=0, workers=1, clock=None
):
    """Risk over a grid of perturbation scales, base densities and cushions.

    Each cell compares ``T`` layers of G(n, rho) with the rank-one
    instance :func:`~netcpd.models.hard_instance_detect` of scale ``alpha``
    whose perturbed block has ``kappa`` layers. The detector runs with its
    ``kappa`` set to the cell's. ``localized`` is the fraction of
    alternative replicates whose estimates match the truth within
    ``kappa`` layers. All cells share ``seed``. Rows are sorted by
    ``(rho, kappa, alpha)``.
    """
    cells = sorted(
        {(float(r), int(k), float(a)) for a in alphas for r in rhos for k in kappas}
    )
    if not cells:
        raise InvalidArgumentError("the sweep grid is empty")
    n = check_int(n, "n", min_value=3)
    T = check_int(T, "T", min_value=2)
    rows = []
    for rho, kappa, alpha in cells:
        started = clock() if clock else 0.0
        cell_cfg = cfg.replace(kappa=kappa, windows=None)
        truth_q = hard_instance_detect(n, T, kappa, rho, alpha, seed=seed)
        truth = ground_truth(truth_q)

        def alt(inst_seed, rho=rho, kappa=kappa, alpha=alpha):
            return hard_instance_detect(n, T, kappa, rho, alpha, seed=inst_seed)

        null = ProbabilitySequence.constant(erdos_renyi_matrix(n, rho), T)
        est, _, alt_reports = estimate_risk(
            null, alt, detector, cell_cfg, replicates, seed, workers, return_reports=True
        )
        localized = np.mean(
            [localization_error(r, truth.change_points, kappa).matched for r in alt_reports]
        )
        rows.append(
            SweepRow(
                alpha=alpha,
                rho=rho,
                kappa=kappa,
                cushion=truth.cushion,
                signal=truth.signal,
                sparsity=truth.sparsity,
                boundary_ratio=truth.boundary_ratio(),
                type_i=est.type_i,
                type_ii=est.type_ii,
                pi_hat=est.pi_hat,
                ci=est.ci_half_width,
                localized=float(localized),
                seconds=(clock() - started) if clock else 0.0,
            )
        )
    return rows
