import numpy as np
import pytest

# Filled by tests/test_acceptance.py: criterion number -> (title, passed, detail).
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} [{num}] {title}: {detail}")
