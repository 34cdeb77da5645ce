import pytest

from pbitswitch.verify import CHECKS, SUITES, run_suite


@pytest.mark.parametrize("suite", SUITES)
def test_suites_pass(suite):
    results = run_suite(suite, seed=0, trials=10)
    assert len(results) == len(CHECKS[suite])
    assert all(r.passed for r in results), [r for r in results if not r.passed]


def test_fault_is_detected():
    results = run_suite("coherent", seed=0, trials=10, faults={"flagged-sign"})
    failed = [r.name for r in results if not r.passed]
    assert failed == ["flagged decomposition"]


def test_unknown_fault_rejected():
    with pytest.raises(ValueError):
        run_suite("linalg", faults={"nope"})


def test_seed_changes_details_not_verdicts():
    a = run_suite("linalg", seed=1, trials=5)
    b = run_suite("linalg", seed=2, trials=5)
    assert [r.passed for r in a] == [r.passed for r in b]
    assert [r.detail for r in a] != [r.detail for r in b]
