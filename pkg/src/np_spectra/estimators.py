"""scikit-learn style front end.

``NeumannPoincareSpectrum`` fits a Nystrom discretization to a geometry and
acts as a transformer on sampled densities; ``RefinementStudy`` repeats the
fit over a grid sequence to find the resolved eigenvalues; ``PowerLawDecay``
is a regressor for ``|lambda_j| ~ C j^{-q}``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import as_geometry, check_grid_sizes, check_window
from .analysis import PLAUSIBLE_R2, DecayFit, fit_decay
from .discretize import ROW_SUM, assemble, make_grid
from .kernels import NP_STAR
from .spectral import eigen_spectrum, singular_spectrum, with_resolution

__all__ = ["NeumannPoincareSpectrum", "RefinementStudy", "PowerLawDecay"]


class NeumannPoincareSpectrum(TransformerMixin, BaseEstimator):
    """Discretize K* (or K) on a boundary and compute its spectrum.

    Parameters
    ----------
    n_nodes : int
        Nodes on a curve, or Gauss-Legendre polar nodes on a surface.
    n_phi : int, optional
        Azimuthal nodes on a surface (default ``2 * n_nodes``).
    operator : {"np_star", "np"}
    rule : {"row_sum", "diagonal_limit"}
    singular : bool
        Also compute singular values.
    """

    def __init__(self, n_nodes=256, n_phi=None, operator=NP_STAR, rule=ROW_SUM, singular=True):
        self.n_nodes = n_nodes
        self.n_phi = n_phi
        self.operator = operator
        self.rule = rule
        self.singular = singular

    def fit(self, X, y=None):
        geom = as_geometry(X)
        self.geometry_ = geom
        self.grid_ = make_grid(geom, self.n_nodes, self.n_phi)
        self.matrix_ = assemble(geom, self.grid_, self.operator, self.rule)
        spec = eigen_spectrum(self.matrix_)
        if self.singular:
            spec = singular_spectrum(self.matrix_, spec)
        self.spectrum_ = spec
        self.eigenvalues_ = spec.eigenvalues
        self.singular_values_ = spec.singular_values
        self.n_features_in_ = self.grid_.size
        return self

    def transform(self, X):
        """Apply the discrete operator to each row of ``X`` (densities at the nodes)."""
        check_is_fitted(self, "matrix_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns; the grid has {self.n_features_in_} nodes")
        return X @ self.matrix_.entries.T


class RefinementStudy(BaseEstimator):
    """Spectra over an increasing grid sequence.

    ``fit`` takes one geometry, or one geometry per grid size when the
    geometry is refined jointly with the grid.  The finest spectrum gets its
    resolved count from comparison with the one before it.
    """

    def __init__(self, grid_sizes=(256, 512), rule=ROW_SUM, operator=NP_STAR, singular=True):
        self.grid_sizes = grid_sizes
        self.rule = rule
        self.operator = operator
        self.singular = singular

    def fit(self, X, y=None):
        sizes = check_grid_sizes(self.grid_sizes)
        geoms = list(X) if isinstance(X, (list, tuple)) else [X] * len(sizes)
        if len(geoms) != len(sizes):
            raise ValueError(f"{len(geoms)} geometries for {len(sizes)} grid sizes")
        self.estimators_ = []
        last = len(sizes) - 1
        for i, (geom, size) in enumerate(zip(geoms, sizes)):
            n_nodes, n_phi = (size, None) if np.isscalar(size) else size
            est = NeumannPoincareSpectrum(n_nodes, n_phi, self.operator, self.rule,
                                          self.singular and i == last)
            self.estimators_.append(est.fit(geom))
        finest = self.estimators_[-1].spectrum_
        if len(self.estimators_) > 1:
            finest = with_resolution(finest, self.estimators_[-2].spectrum_)
        self.spectrum_ = finest
        self.j_resolved_ = finest.j_resolved
        return self


class PowerLawDecay(RegressorMixin, BaseEstimator):
    """Least-squares power law ``y = C x^{-q}`` in log-log coordinates.

    ``window`` is a 1-based inclusive ``(j_min, j_max)`` applied to the
    index array; ``j_max = None`` keeps everything from ``j_min`` on.
    """

    def __init__(self, window=(4, None), q_predicted=None, slack_delta=0.3):
        self.window = window
        self.q_predicted = q_predicted
        self.slack_delta = slack_delta

    def fit(self, X, y):
        j = check_array(X, ensure_2d=False).ravel()
        y = np.abs(np.asarray(y, dtype=float).ravel())
        j_min, j_max = check_window(self.window, j)
        sel = (j >= j_min) & (j <= j_max)
        order = np.argsort(j[sel])
        values = np.zeros(int(j_max))
        values[j[sel][order].astype(int) - 1] = y[sel][order]
        self.fit_ = fit_decay(values, (int(j_min), int(j_max)), q_predicted=self.q_predicted,
                              slack_delta=self.slack_delta)
        self.q_ = self.fit_.q_hat
        self.c_ = self.fit_.c_hat
        self.r2_ = self.fit_.r_squared
        self.power_law_plausible_ = self.r2_ >= PLAUSIBLE_R2
        return self

    def fit_spectrum(self, spectrum, use="eigen") -> DecayFit:
        """Fit directly on a :class:`Spectrum`, honouring its resolved count."""
        j_min = self.window[0] if self.window else 4
        j_max = self.window[1] if self.window and self.window[1] else spectrum.j_resolved
        self.fit_ = fit_decay(spectrum, (j_min, j_max), use, self.q_predicted, self.slack_delta)
        self.q_, self.c_, self.r2_ = self.fit_.q_hat, self.fit_.c_hat, self.fit_.r_squared
        self.power_law_plausible_ = self.fit_.power_law_plausible
        return self.fit_

    def predict(self, X):
        check_is_fitted(self, "q_")
        j = check_array(X, ensure_2d=False).ravel()
        return self.c_ * j ** (-self.q_)

    def score(self, X, y, sample_weight=None):
        """Coefficient of determination in log-log coordinates."""
        from sklearn.metrics import r2_score

        return r2_score(np.log(np.abs(y)), np.log(self.predict(X)), sample_weight=sample_weight)
