import pytest
from hypothesis import HealthCheck, settings

from bellpara.core_bellman import Exponents, coefficients_default

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

TRIPLES = [(2.0, 6.0, 3.0), (3.0, 6.0, 2.0), (4.0, 8.0, 1.6)]


@pytest.fixture(params=TRIPLES, ids=lambda t: "p{}q{}r{}".format(*t))
def exps(request):
    return Exponents(*request.param)


@pytest.fixture
def e263():
    return Exponents(2.0, 6.0, 3.0)


@pytest.fixture
def c263(e263):
    return coefficients_default(e263)


# acceptance reporting: one line per criterion in the terminal summary

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    detail = getattr(item, "criterion_detail", "")
    _CRITERIA[number] = (title, "PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, verdict, detail = _CRITERIA[number]
        line = f"criterion {number:>2}: {verdict}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
