"""scikit-learn style wrappers around the two detectors."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_adjacency_sequence
from .detectors import DetectorConfig, detect_wbs, detect_window

__all__ = ["WindowChangePointDetector", "WildBinarySegmentation"]


class _ChangePointBase(BaseEstimator):
    _algorithm = None

    def _config(self):
        raise NotImplementedError

    def _detect(self, X, cfg):
        raise NotImplementedError

    def fit(self, X, y=None):
        """Detect change points in ``X`` of shape ``(T, n, n)``.

        Sets ``report_``, ``change_points_`` and ``n_change_points_``.
        """
        X = check_adjacency_sequence(X)
        self.report_ = self._detect(X, self._config())
        self.change_points_ = np.asarray(self.report_.change_points, dtype=np.int64)
        self.n_change_points_ = self.report_.estimated_K
        self.n_layers_ = X.shape[0]
        return self

    def predict(self, X=None):
        """Segment label of every layer of the fitted sequence.

        Layer ``t`` (0-based) gets the number of change points ``<= t``, so
        the first segment is 0. ``X`` is accepted for API symmetry and must
        have as many layers as the fitted sequence.
        """
        check_is_fitted(self, "report_")
        T = self.n_layers_
        if X is not None and check_adjacency_sequence(X).shape[0] != T:
            raise ValueError(f"expected {T} layers, got {np.shape(X)[0]}")
        # tau is the last layer before a change, i.e. 0-based index tau - 1
        return np.searchsorted(self.change_points_, np.arange(T), side="right").astype(np.int64)

    def fit_predict(self, X, y=None):
        return self.fit(X).predict()


class WindowChangePointDetector(_ChangePointBase):
    """Multi-scale window scan with degree trimming.

    Parameters
    ----------
    kappa : int, default=15
        Largest window length; windows ``kappa, kappa-1, ..., 3`` are scanned.
    theta_mu : float, default=1.0
        Threshold scale. Calibrate it on null data with
        :func:`netcpd.harness.calibrate_theta`.
    mu, zeta : float, default=1.0
    windows : sequence of int, optional
        Explicit window lengths instead of the full sweep.
    merge_proximity : int, optional
    degree_scope : {"interval", "global"}, default="interval"
    n_jobs : int, default=1
        Threads used to scan intervals.

    Examples
    --------
    >>> import numpy as np
    >>> X = np.zeros((40, 20, 20), dtype=np.uint8)
    >>> X[20:] = 1 - np.eye(20, dtype=np.uint8)
    >>> WindowChangePointDetector(kappa=12).fit(X).change_points_
    array([20])
    """

    _algorithm = "window"

    def __init__(
        self,
        kappa=15,
        theta_mu=1.0,
        mu=1.0,
        zeta=1.0,
        windows=None,
        merge_proximity=None,
        degree_scope="interval",
        n_jobs=1,
    ):
        self.kappa = kappa
        self.theta_mu = theta_mu
        self.mu = mu
        self.zeta = zeta
        self.windows = windows
        self.merge_proximity = merge_proximity
        self.degree_scope = degree_scope
        self.n_jobs = n_jobs

    def _config(self):
        return DetectorConfig(
            kappa=self.kappa,
            windows=None if self.windows is None else tuple(self.windows),
            mu=self.mu,
            zeta=self.zeta,
            theta_mu=self.theta_mu,
            merge_proximity=self.merge_proximity,
            degree_scope=self.degree_scope,
            workers=self.n_jobs,
        )

    def _detect(self, X, cfg):
        return detect_window(X, cfg)


class WildBinarySegmentation(_ChangePointBase):
    """Wild binary segmentation over random intervals.

    Parameters
    ----------
    kappa : int, default=9
        Minimum interval length and cushion.
    M : int, default=200
        Number of random intervals.
    theta_mu, mu, zeta : float, default=1.0
    random_state : int, optional
        Seed for the interval draw.
    degree_scope : {"interval", "global"}, default="interval"
    """

    _algorithm = "wbs"

    def __init__(self, kappa=9, M=200, theta_mu=1.0, mu=1.0, zeta=1.0, random_state=None, degree_scope="interval"):
        self.kappa = kappa
        self.M = M
        self.theta_mu = theta_mu
        self.mu = mu
        self.zeta = zeta
        self.random_state = random_state
        self.degree_scope = degree_scope

    def _config(self):
        return DetectorConfig(
            kappa=self.kappa,
            M=self.M,
            mu=self.mu,
            zeta=self.zeta,
            theta_mu=self.theta_mu,
            seed=self.random_state,
            degree_scope=self.degree_scope,
        )

    def _detect(self, X, cfg):
        return detect_wbs(X, cfg)
