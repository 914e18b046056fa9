import pytest

from cocyclekit.verify import CHECKS, CheckResult, run_suite


@pytest.mark.parametrize("d", [1, 2])
def test_invariant_suite_passes(d):
    results = run_suite(d, seed=1)
    assert len(results) == len(CHECKS)
    failed = [r for r in results if not r.passed]
    assert not failed, failed


def test_check_result_threshold():
    assert CheckResult("x", 1e-9, 1e-8).passed
    assert not CheckResult("x", 1e-7, 1e-8).passed
