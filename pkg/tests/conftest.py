import re

import numpy as np
import pytest

from depmark.catalog import EXAMPLES, example_model, random_model_suite

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture(scope="session")
def catalog():
    return {k: example_model(k) for k in EXAMPLES}


@pytest.fixture(scope="session")
def suite():
    return random_model_suite()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    k = int(m.group(1))
    if report.when == "call" or report.failed:
        if report.failed:
            _ACCEPTANCE[k] = "FAIL"
        else:
            _ACCEPTANCE.setdefault(k, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"criterion {k}: {_ACCEPTANCE[k]}")
