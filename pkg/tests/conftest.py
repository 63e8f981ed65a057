import warnings

import pytest

from metabic.kernels import available_backends

ACCEPTANCE = {}


@pytest.fixture(params=sorted(available_backends()))
def backend(request):
    return available_backends()[request.param]


@pytest.fixture
def report(request):
    """Record a measured value for the acceptance summary."""
    def _report(text):
        ACCEPTANCE.setdefault(request.node.name, {"detail": []})["detail"].append(text)
    return _report


@pytest.fixture
def ed_mode():
    from metabic.cdos import preset
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return preset("ed_finite")


@pytest.fixture
def md_mode():
    from metabic.cdos import preset
    return preset("md_finite")


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        name = report.nodeid.split("::")[-1]
        ACCEPTANCE.setdefault(name, {"detail": []})["outcome"] = report.outcome


def pytest_terminal_summary(terminalreporter):
    rows = [(k, v) for k, v in ACCEPTANCE.items() if "outcome" in v]
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, v in sorted(rows):
        status = "PASS" if v["outcome"] == "passed" else "FAIL"
        detail = "; ".join(v["detail"])
        terminalreporter.write_line(f"{status}  {name}  {detail}")
