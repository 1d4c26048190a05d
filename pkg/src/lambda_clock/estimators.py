"""scikit-learn compatible clock reconstruction.

:class:`ClockReconstructor` turns a reference trajectory with known clock
times into a calibrated clock.  ``transform`` maps trajectory samples to their
accumulated distinguishability ``Lambda``.  ``predict`` then maps those values
through the fitted :class:`~lambda_clock.clock.CalibrationMap` to clock time.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .classical import ParametricModel, ParamTrajectory, path_length_profile
from .clock import CalibrationMap
from .config import NumericalConfig
from .quantum import StateTrajectory, bures_path_profile, fs_path_profile

METRICS = ("fubini_study", "bures", "fisher")


class ClockReconstructor(TransformerMixin, RegressorMixin, BaseEstimator):
    """Calibrate clock time against accumulated Fisher distinguishability.

    Parameters
    ----------
    metric : {"fubini_study", "bures", "fisher"}
        ``"fubini_study"`` expects pure states of shape ``(K, n)``, ``"bures"``
        pure or mixed states, and ``"fisher"`` parameter vectors of shape
        ``(K, d)`` for ``model``.
    model : ParametricModel, optional
        Required for ``metric="fisher"``.
    cfg : NumericalConfig, optional
    """

    def __init__(self, metric: str = "fubini_study", model: ParametricModel | None = None,
                 cfg: NumericalConfig | None = None):
        self.metric = metric
        self.model = model
        self.cfg = cfg

    def _profile(self, X) -> np.ndarray:
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        labels = np.arange(len(X), dtype=float)
        if self.metric == "fisher":
            if self.model is None:
                raise ValueError("metric='fisher' needs a ParametricModel")
            return path_length_profile(self.model, ParamTrajectory(labels, X), self.cfg)
        traj = StateTrajectory(labels, X, label="sample")
        if self.metric == "fubini_study":
            return fs_path_profile(traj, self.cfg)
        return bures_path_profile(traj, self.cfg)

    def fit(self, X, y):
        lam = self._profile(X)
        self.calibration_ = CalibrationMap().fit(lam, y)
        self.lambda_total_ = float(lam[-1])
        return self

    def transform(self, X) -> np.ndarray:
        """Accumulated distinguishability of each sample from the first, shape ``(K, 1)``."""
        return self._profile(X)[:, None]

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self)
        return self.calibration_.predict(self.transform(X))
