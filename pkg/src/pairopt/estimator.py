"""scikit-learn style wrappers.

Pairs are passed as integer arrays of shape ``(n, 2K)``: the first ``K``
columns hold the levels of the first alternative, the last ``K`` those of
the second, with ``0`` marking an attribute that is not shown.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .closed_form import variance
from .design_core import DesignProblem, make_uniform, parameter_layout
from .effects import regression_matrix
from .optimizer import KW_TOL, WEIGHT_TOL, optimal_depth, optimize_full

__all__ = ["PairDifferenceEncoder", "PairedDesignOptimizer", "split_pairs"]


def split_pairs(X, n_attributes: int, levels: int, strength: int | None = None):
    """Validate a pair array and return ``(first, second)`` level arrays."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] != 2 * n_attributes:
        raise ValueError(f"expected shape (n, {2 * n_attributes}), got {X.shape}")
    if not np.issubdtype(X.dtype, np.integer):
        if not np.all(np.equal(np.mod(X, 1), 0)):
            raise ValueError("level codes must be integers")
        X = X.astype(np.int64)
    if X.size and (X.min() < 0 or X.max() > levels):
        raise ValueError(f"level codes must lie in [0, {levels}]")
    first, second = X[:, :n_attributes], X[:, n_attributes:]
    if np.any((first == 0) != (second == 0)):
        raise ValueError("both alternatives of a pair must show the same attributes")
    if strength is not None and np.any((first != 0).sum(axis=1) != strength):
        raise ValueError(f"every pair must show exactly {strength} attributes")
    return first, second


class PairDifferenceEncoder(TransformerMixin, BaseEstimator):
    """Map pairs to effects-coded difference vectors ``f(i) - f(j)``."""

    def __init__(self, n_attributes: int = 3, levels: int = 2):
        self.n_attributes = n_attributes
        self.levels = levels

    def fit(self, X, y=None):
        split_pairs(X, self.n_attributes, self.levels)
        self.n_features_in_ = 2 * self.n_attributes
        self.n_parameters_ = regression_matrix(
            np.zeros((1, self.n_attributes), dtype=np.int64), self.levels).shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_parameters_")
        first, second = split_pairs(X, self.n_attributes, self.levels)
        return regression_matrix(first, self.levels) - regression_matrix(second, self.levels)


class PairedDesignOptimizer(BaseEstimator):
    """Optimal invariant design for a ``(K, S, v)`` problem.

    ``fit`` ignores its data arguments; the design depends only on the
    hyperparameters.  ``target="full"`` solves for the whole parameter
    vector and stores the certified design; the other targets store the
    uniform design on the optimal single depth for that block.
    ``predict`` returns the variance function of the fitted design at
    each pair, which is constant across pairs of equal depth.
    """

    def __init__(self, n_attributes: int = 4, strength: int = 3, levels: int = 2,
                 target: str = "full", tol: float = WEIGHT_TOL, kw_tol: float = KW_TOL):
        self.n_attributes = n_attributes
        self.strength = strength
        self.levels = levels
        self.target = target
        self.tol = tol
        self.kw_tol = kw_tol

    def _problem(self) -> DesignProblem:
        return DesignProblem(self.n_attributes, self.strength, self.levels)

    def fit(self, X=None, y=None):
        problem = self._problem()
        self.problem_ = problem
        self.n_parameters_ = parameter_layout(problem).p
        if self.target == "full":
            result = optimize_full(problem, self.tol, self.kw_tol)
            self.design_ = result.design
            self.certificate_ = result.certificate
            self.objective_ = result.objective
        else:
            self.design_ = make_uniform(problem, optimal_depth(problem, self.target))
            self.certificate_ = None
            self.objective_ = None
        self.support_ = np.array(self.design_.support)
        self.weights_ = np.array([float(self.design_.weights[d]) for d in self.design_.support])
        return self

    def depths(self, X) -> np.ndarray:
        check_is_fitted(self, "design_")
        first, second = split_pairs(X, self.n_attributes, self.levels, self.strength)
        return (first != second).sum(axis=1)

    def predict(self, X) -> np.ndarray:
        """Variance function ``V(x, xi)`` of the fitted design at each pair."""
        depths = self.depths(X)
        by_depth = {d: float(variance(self.design_, d)) for d in np.unique(depths).tolist()}
        return np.array([by_depth[d] for d in depths.tolist()], dtype=float)

    def normalized_variance(self) -> np.ndarray:
        """``V(d, xi) / p`` for ``d = 1..S``."""
        check_is_fitted(self, "design_")
        return np.array([float(variance(self.design_, d)) / self.n_parameters_
                         for d in range(1, self.strength + 1)])
