"""scikit-learn style wrappers around the allocation algorithms.

Each estimator is fitted on a :class:`~rcialloc.model.Scenario` rather than
a feature matrix.  Hyperparameters live in ``__init__`` so that
``get_params``, ``set_params`` and ``sklearn.base.clone`` work as usual;
fitted state carries the trailing-underscore convention.

Examples
--------
>>> from rcialloc.scenario_io import ScenarioSpec, generate_scenario
>>> scn = generate_scenario(ScenarioSpec(seed=3))
>>> est = A2RCI(K1=5).fit(scn)
>>> est.allocation_.shape
(3, 6)
>>> est.score(scn) == est.report_.objective
True
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import allocators as alg
from .model import Scenario, evaluate_metrics
from .pgd import PgdConfig


class _AllocatorBase(BaseEstimator):
    """Shared ``fit`` / ``score`` plumbing.

    Subclasses implement ``_solve(scenario) -> SolveReport``.
    """

    def fit(self, X: Scenario, y=None):
        if not isinstance(X, Scenario):
            raise TypeError(f"{type(self).__name__}.fit expects a Scenario, got {type(X).__name__}")
        report = self._solve(X)
        self.report_ = report
        self.allocation_ = report.allocation
        self.metrics_ = report.metrics
        self.objective_ = report.objective
        self.n_platforms_, self.n_targets_ = X.num_platforms, X.num_targets
        return self

    def predict(self, X: Scenario = None) -> np.ndarray:
        """Return the fitted allocation (``X`` is accepted for API symmetry)."""
        check_is_fitted(self, "allocation_")
        if X is not None and X.shape != self.allocation_.shape:
            raise ValueError(f"fitted on shape {self.allocation_.shape}, got scenario of shape {X.shape}")
        return self.allocation_.copy()

    def score(self, X: Scenario, y=None) -> float:
        """Scalarized objective of the fitted allocation on ``X``."""
        check_is_fitted(self, "allocation_")
        return alg.scalarized_value(self.allocation_, X, self._weight())

    def metrics(self, X: Scenario):
        check_is_fitted(self, "allocation_")
        return evaluate_metrics(self.allocation_, X)

    def _weight(self):
        return getattr(self, "w0", 1.0)


class A2RCI(_AllocatorBase):
    """Joint capacity and localization allocation (MM with projected gradient).

    Parameters
    ----------
    K1, K2 : int
        Outer MM and inner PGD iteration counts.
    w0 : float or "balanced"
        Unification weight between the capacity and localization objectives.
    step_rule, t0 : see :class:`~rcialloc.pgd.PgdConfig`.
    rounding_mode : {"faithful", "relaxed"}
    seed : int
        Seed of the initial-point jitter.
    """

    def __init__(self, K1=20, K2=50, w0="balanced", step_rule="normalized", t0=10.0,
                 rounding_mode="faithful", seed=0):
        self.K1 = K1
        self.K2 = K2
        self.w0 = w0
        self.step_rule = step_rule
        self.t0 = t0
        self.rounding_mode = rounding_mode
        self.seed = seed

    def _config(self, eta=0.0) -> alg.SolverConfig:
        return alg.SolverConfig(
            K1=self.K1,
            pgd=PgdConfig(K2=self.K2, step_rule=self.step_rule, t0=self.t0),
            w0=self.w0,
            eta=eta,
            seed=self.seed,
            rounding_mode=self.rounding_mode,
        )

    def _solve(self, scenario):
        return alg.a2rci(scenario, self._config())


class A2RCI2(A2RCI):
    """Capacity-threshold allocation: reserve links for ``eta``, then localize."""

    def __init__(self, eta=1.0, K1=20, K2=50, w0="balanced", step_rule="normalized", t0=10.0,
                 rounding_mode="faithful", seed=0):
        super().__init__(K1=K1, K2=K2, w0=w0, step_rule=step_rule, t0=t0,
                         rounding_mode=rounding_mode, seed=seed)
        self.eta = eta

    def _solve(self, scenario):
        return alg.a2rci2(scenario, self._config(self.eta))


class UniformAllocator(_AllocatorBase):
    def __init__(self, w0="balanced"):
        self.w0 = w0

    def _solve(self, scenario):
        return alg.baseline_uniform(scenario, self.w0)


class RandomAllocator(_AllocatorBase):
    def __init__(self, seed=0, w0="balanced"):
        self.seed = seed
        self.w0 = w0

    def _solve(self, scenario):
        return alg.baseline_random(scenario, self.seed, self.w0)


class GreedyAllocator(_AllocatorBase):
    def __init__(self, w0="balanced"):
        self.w0 = w0

    def _solve(self, scenario):
        return alg.baseline_greedy(scenario, self.w0)


class ExhaustiveAllocator(_AllocatorBase):
    """Brute-force optimum; refuses instances above ``limit`` candidates."""

    def __init__(self, w0="balanced", limit=alg.ORACLE_LIMIT):
        self.w0 = w0
        self.limit = limit

    def _solve(self, scenario):
        return alg.run_algorithm("oracle", scenario, alg.SolverConfig(w0=self.w0), oracle_limit=self.limit)
