"""scikit-learn style wrapper around the approximation algorithms and AMM."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .algorithms import Rank1Solution, Variant, run_algorithm
from .amm import AmmConfig, amm_solve, random_init
from .tensor_core import multilinear_value
from .validation import check_omega, check_tensor


class SparseRank1Approximation(TransformerMixin, BaseEstimator):
    """l1-regularised sparse rank-1 approximation of a dense tensor.

    Parameters
    ----------
    init : {'v1', 'v2', 'random'}, default='v1'
        How the factors are produced. ``'v1'`` extracts dominant singular
        vectors along the unfolding chain, ``'v2'`` uses max-energy rows and
        is linear in the tensor size, ``'random'`` draws sparse random unit
        vectors (only sensible with ``refine=True``).
    omega : 'default', float or sequence of float, default='default'
        Regularisation weight per mode. ``'default'`` is
        ``1/sqrt(n_j) - 1e-5``.
    refine : bool, default=False
        Polish the initial factors with alternating maximisation.
    stop_tol : float, default=1e-6
        AMM stops when no factor moves more than this in a sweep.
    max_sweeps : int, default=200
    prescale : bool, default=True
        Work on ``X / max|X|`` and rescale the result.
    tol : float, default=1e-10
        Relative residual tolerance of the power iteration.
    max_iter : int, default=2000
    random_state : int, default=0
        Seed for ``init='random'``.

    Attributes
    ----------
    factors_ : list of ndarray
        Unit-norm factor vectors.
    lambda_ : float
        ``<X, x_1 o ... o x_d>`` for the fitted factors.
    objective_ : float
        ``lambda_`` minus the l1 penalty.
    bound_ratio_ : float or None
        Guaranteed approximation ratio of the V1/V2 stage; ``None`` when the
        weights are outside the range covered by the guarantee or
        ``init='random'``.
    upper_bound_ : float or None
        Upper bound on ``lambda_`` from the mode unfoldings.
    report_ : AlgoReport or AmmTrace or None
    """

    def __init__(self, init="v1", omega="default", refine=False, stop_tol=1e-6,
                 max_sweeps=200, prescale=True, tol=1e-10, max_iter=2000, random_state=0):
        self.init = init
        self.omega = omega
        self.refine = refine
        self.stop_tol = stop_tol
        self.max_sweeps = max_sweeps
        self.prescale = prescale
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_tensor(X)
        params = check_omega(self.omega, X.shape)
        if self.init not in ("v1", "v2", "random"):
            raise ValueError(f"init must be 'v1', 'v2' or 'random', got {self.init!r}")
        self.n_modes_ = X.ndim
        self.shape_ = X.shape
        self.params_ = params
        self.bound_ratio_ = None
        self.upper_bound_ = None
        self.report_ = None

        if self.init == "random":
            solution = Rank1Solution.from_factors(
                X, random_init(X.shape, params, self.random_state), params)
        else:
            report = run_algorithm(X, params, Variant(self.init), prescale=self.prescale,
                                   tol=self.tol, max_iter=self.max_iter)
            solution = report.solution
            self.bound_ratio_ = report.bound_ratio
            self.upper_bound_ = report.upper_bound
            self.report_ = report
        if self.refine:
            config = AmmConfig(stop_tol=self.stop_tol, max_sweeps=self.max_sweeps,
                               prescale=self.prescale)
            trace = amm_solve(X, params, config, init_xs=solution.xs, tol=self.tol,
                              max_iter=self.max_iter)
            solution = trace.final
            self.report_ = trace
        self.solution_ = solution
        self.factors_ = [x.copy() for x in solution.xs]
        self.lambda_ = solution.lam
        self.objective_ = solution.objective
        return self

    def transform(self, X):
        """Rank-1 tensor ``<X, x_1 o ... o x_d> * x_1 o ... o x_d`` built from the fitted factors."""
        check_is_fitted(self, "factors_")
        X = check_tensor(X)
        if X.shape != self.shape_:
            raise ValueError(f"X has shape {X.shape}, fitted on {self.shape_}")
        lam = multilinear_value(X, self.factors_)
        return lam * self._outer()

    def inverse_transform(self, X=None):
        """The fitted rank-1 approximation ``lambda_ * x_1 o ... o x_d``."""
        check_is_fitted(self, "factors_")
        return self.lambda_ * self._outer()

    def score(self, X, y=None):
        """Penalised objective of the fitted factors on ``X``."""
        check_is_fitted(self, "factors_")
        X = check_tensor(X)
        penalty = sum(w * float(np.abs(x).sum()) for w, x in zip(self.params_.omegas, self.factors_))
        return multilinear_value(X, self.factors_) - penalty

    def _outer(self):
        out = self.factors_[0]
        for x in self.factors_[1:]:
            out = np.multiply.outer(out, x)
        return out
