import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from rcialloc.allocators import SolverConfig, a2rci
from rcialloc.estimators import (
    A2RCI,
    A2RCI2,
    ExhaustiveAllocator,
    GreedyAllocator,
    RandomAllocator,
    UniformAllocator,
)
from rcialloc.exceptions import SearchSpaceTooLargeError


def test_params_round_trip():
    est = A2RCI(K1=7, w0=2.0)
    params = est.get_params()
    assert params["K1"] == 7 and params["w0"] == 2.0 and params["rounding_mode"] == "faithful"
    est.set_params(K2=11)
    assert clone(est).get_params()["K2"] == 11


def test_fit_matches_functional_api(scenario3):
    est = A2RCI(K1=4, seed=2).fit(scenario3)
    rep = a2rci(scenario3, SolverConfig(K1=4, seed=2))
    assert np.array_equal(est.allocation_, rep.allocation)
    assert est.score(scenario3) == pytest.approx(rep.objective)
    assert est.metrics(scenario3).alc == pytest.approx(rep.metrics.alc)


def test_predict_returns_copy(scenario3):
    est = UniformAllocator().fit(scenario3)
    est.predict()[0, 1] = -5
    assert est.allocation_[0, 1] >= 0


def test_unfitted():
    with pytest.raises(NotFittedError):
        A2RCI().predict()


def test_rejects_arrays():
    with pytest.raises(TypeError, match="Scenario"):
        A2RCI().fit(np.zeros((3, 6)))


def test_threshold_estimator(scenario3):
    est = A2RCI2(eta=2.0).fit(scenario3)
    off = ~np.eye(3, dtype=bool)
    assert np.all(est.metrics_.per_channel_capacity[off] >= 2.0)


@pytest.mark.parametrize("cls", [UniformAllocator, RandomAllocator, GreedyAllocator])
def test_baselines_fit(cls, scenario3):
    assert cls().fit(scenario3).report_.feasible


def test_exhaustive_respects_limit(tiny, scenario3):
    assert ExhaustiveAllocator().fit(tiny).objective_ >= UniformAllocator().fit(tiny).objective_
    with pytest.raises(SearchSpaceTooLargeError):
        ExhaustiveAllocator(limit=10).fit(tiny)
