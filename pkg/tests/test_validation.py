import time

from rcialloc.validation import rank_one_logdet, run_validation


def test_suite_passes_quickly():
    t = time.perf_counter()
    results = run_validation()
    assert time.perf_counter() - t < 30
    assert all(r.passed for r in results), [r.line() for r in results if not r.passed]
    assert all(r.margin >= 0 for r in results)


def test_flipped_ascent_is_caught_by_monotonicity_only():
    failed = [r.name for r in run_validation("flip-ascent") if not r.passed]
    assert failed == ["mm_monotonicity"]


def test_rank_one_logdet_small_case():
    # det(I_3 + 3*J_3) = 1 + 3*3 = 10
    assert abs(rank_one_logdet(3, 1.0) - 3.321928094887362) < 1e-12
