"""scikit-learn style front end over (delta21, r) operating points.

Nothing is learned from data: ``fit`` only validates the configuration and
the input layout. ``transform`` returns the phase-averaged response and
``predict`` the branch-tracked refractive index, so the object drops into
pipelines and grid tooling that expect the estimator protocol.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .atomsys import SystemConfig
from .errors import InvalidInputError
from .index import track_branch
from .response import phase_averaged_response
from .steady import SolverSettings


class IndexEstimator(TransformerMixin, BaseEstimator):
    """Response coefficients and refractive index of the driven gas.

    Parameters
    ----------
    system : SystemConfig, optional
        Operating point; ``delta21`` and ``pump`` are taken from ``X``.
    phases : int
        Loop-phase samples averaged per point.
    method : {"scf", "integrate"}
        Steady-state solver.

    Input ``X`` has shape (n_samples, 2) with columns ``delta21`` and ``r``.
    """

    def __init__(self, system=None, phases=16, method="scf"):
        self.system = system
        self.phases = phases
        self.method = method

    def _check_X(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != 2:
            raise InvalidInputError("X must have shape (n_samples, 2): columns delta21, r")
        if not np.all(np.isfinite(X)):
            raise InvalidInputError("X must be finite")
        if np.any(X[:, 1] < 0):
            raise InvalidInputError("pump rates must be non-negative")
        return X

    def fit(self, X, y=None):
        self._check_X(X)
        if self.phases < 1:
            raise InvalidInputError("phases must be at least 1")
        self.system_ = self.system if self.system is not None else SystemConfig()
        self.settings_ = SolverSettings(method=self.method)
        self.n_features_in_ = 2
        return self

    def _response(self, delta, r):
        cfg = self.system_.replace(delta21=float(delta), pump=float(r))
        return phase_averaged_response(cfg, self.phases, self.settings_)

    def transform(self, X):
        """Complex array (n_samples, 4): eps, mu, xi_EH, xi_HE."""
        check_is_fitted(self)
        X = self._check_X(X)
        out = np.empty((len(X), 4), dtype=complex)
        for k, (d, r) in enumerate(X):
            rc = self._response(d, r)
            out[k] = rc.eps, rc.mu, rc.xi_eh, rc.xi_he
        return out

    def predict(self, X):
        """Refractive index, with the branch threaded along r at each delta21."""
        check_is_fitted(self)
        X = self._check_X(X)
        n = np.empty(len(X), dtype=complex)
        pol = self.system_.drive.polarization
        for d in np.unique(X[:, 0]):
            rows = np.flatnonzero(X[:, 0] == d)
            rows = rows[np.argsort(X[rows, 1], kind="stable")]
            path = track_branch([(X[i, 1], self._response(d, X[i, 1])) for i in rows], pol, d)
            n[rows] = path.n
        return n
