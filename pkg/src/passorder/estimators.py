"""Scikit-learn style estimators wrapping the three schedulers.

Fitting a scheduler on a fleet assigns every vehicle a passing-layer
label, so the estimators follow the clustering protocol: ``fit`` exposes
``labels_`` (the depth layer per vehicle, in input order) and
``fit_predict`` returns it directly. Parameters follow the usual
``get_params``/``set_params`` contract, so the estimators clone and
compose with the wider scikit-learn ecosystem.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.exceptions import NotFittedError

from .geometry import IntersectionGeometry, build_conflict_sets, default_geometry
from .graphs import build_cdg, build_cug
from .schedulers import dfst, mm_schedule, opt_dfst
from .validation import check_fleet

__all__ = ["DFSTScheduler", "OptDFSTScheduler", "MaxMatchingScheduler"]


class _BaseScheduler(ClusterMixin, BaseEstimator):
    """Shared fit machinery; subclasses pick the solving method."""

    def __init__(self, box_size: float = 20.0):
        self.box_size = box_size

    def _solve(self, cdg, cug):
        raise NotImplementedError

    def fit(self, X, y=None):
        """Schedule the fleet X.

        X is a sequence of VehicleRecord or (approach, turn[, position])
        rows in arrival order. Sets ``labels_`` (passing layer per
        vehicle), ``parents_``, ``d_all_``, and ``schedule_``.
        """
        fleet = check_fleet(X)
        geometry = (
            default_geometry()
            if self.box_size == 20.0
            else IntersectionGeometry(self.box_size)
        )
        sets = build_conflict_sets(fleet, geometry)
        cdg = build_cdg(sets, len(fleet))
        cug = build_cug(cdg)
        schedule = self._solve(cdg, cug)
        self.schedule_ = schedule
        self.cdg_ = cdg
        self.cug_ = cug
        self.labels_ = np.array(
            [schedule.depth[v.index] for v in fleet], dtype=np.int64
        )
        self.parents_ = np.array(
            [schedule.parent[v.index] for v in fleet], dtype=np.int64
        )
        self.d_all_ = schedule.max_depth
        return self

    def predict(self, X=None):
        """Layer labels of the fitted fleet (scheduling is transductive)."""
        if not hasattr(self, "labels_"):
            raise NotFittedError(
                f"{type(self).__name__} must be fitted before predict"
            )
        return self.labels_


class DFSTScheduler(_BaseScheduler):
    """FIFO baseline scheduler (union conflict handling)."""

    def _solve(self, cdg, cug):
        return dfst(cdg)


class OptDFSTScheduler(_BaseScheduler):
    """FIFO scheduler taking the smallest feasible layer per vehicle."""

    def _solve(self, cdg, cug):
        return opt_dfst(cdg)


class MaxMatchingScheduler(_BaseScheduler):
    """Globally optimal pairing scheduler over the coexistence graph."""

    def _solve(self, cdg, cug):
        return mm_schedule(cug, cdg)
