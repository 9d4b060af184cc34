import pytest

CRITERIA = {
    1: "Gaussian SIQR product 0.2275 +- 0.0005, < 5 s",
    2: "Cauchy gamma=1..4 SIQR_p and product invariance, < 30 s",
    3: "Student t(2) quartiles and product",
    4: "Student t(3) quartiles, product and ordering",
    5: "F(5,2) product above the Gaussian value",
    6: "moment divergence classification",
    7: "variance product >= hbar/2 on catalog and Haar samples",
    8: "Hermite functions transform with phase (-i)^n",
    9: "Haar searches: SIQR min <= 0.175, variance min near 1/2",
    10: "qubit SIQR_x^2 + SIQR_y^2 >= 1 on a 1001 x 1001 grid",
    11: "property suites runnable standalone",
    12: "reproduce exits 0 with every row passing",
}

_outcomes: dict[int, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes.setdefault(crit, []).append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        rep.criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, text in CRITERIA.items():
        results = _outcomes.get(n)
        if not results:
            status = "NOT RUN"
        elif all(r == "passed" for r in results):
            status = "PASS"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status:7s} {text}")
