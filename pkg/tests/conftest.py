import numpy as np
import pytest

# criterion number -> (title, list of (test id, passed, detail))
_CRITERIA: dict[int, tuple[str, list]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    n, title = marker.args
    detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    _CRITERIA.setdefault(n, (title, []))[1].append((item.name, rep.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, runs = _CRITERIA[n]
        ok = all(p for _, p, _ in runs)
        tr.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}")
        for name, passed, detail in runs:
            tr.write_line(f"    {'ok  ' if passed else 'FAIL'} {name}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def measure(record_property):
    """Record ``name=value`` for the acceptance summary and assert ``value < tol``."""
    def check(name, value, tol):
        record_property(name, f"{value:.3e} (tol {tol:g})")
        assert value < tol, f"{name} = {value:.3e} exceeds {tol:g}"
    return check
