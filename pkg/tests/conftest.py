import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

CRITERIA = {
    1: "a(eps) regression and analytic agreement",
    2: "USD landmark values",
    3: "dense and sparse regime agreement",
    4: "disk/spoke limit of the USD bound",
    5: "dual-basis exactness and USD amplifier",
    6: "Kraus closed forms vs matrix application",
    7: "origin success probability",
    8: "k-ordering certificate suite",
    9: "do-nothing dominance",
    10: "resolvability bound and number-SNR witness",
    11: "Gaussian family and cloning fidelity",
    12: "circle projection",
}

_outcomes: dict[int, list[tuple[str, bool]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion this test checks")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    n = report.user_properties and dict(report.user_properties).get("criterion")
    if n:
        _outcomes.setdefault(n, []).append((report.nodeid, report.passed))


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_setup(item):
    m = item.get_closest_marker("criterion")
    if m:
        item.user_properties.append(("criterion", m.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERIA):
        runs = _outcomes.get(n)
        if not runs:
            tr.write_line(f"criterion {n:2d}: NOT RUN  {CRITERIA[n]}")
            continue
        failed = [nid for nid, ok in runs if not ok]
        status = "PASS" if not failed else "FAIL"
        tail = f" ({len(failed)}/{len(runs)} cases failed)" if failed else f" ({len(runs)} cases)"
        tr.write_line(f"criterion {n:2d}: {status}  {CRITERIA[n]}{tail}")
