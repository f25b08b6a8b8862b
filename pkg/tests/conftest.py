from fractions import Fraction

import pytest

from torusfiber.polytope import load_polytope


def poly(name, **params):
    return load_polytope(name, {k: Fraction(v) for k, v in params.items()})


def pt(*xs):
    return tuple(Fraction(x) for x in xs)


@pytest.fixture
def cp2():
    return poly("cp2")


@pytest.fixture
def rect():
    return poly("rectangle", a=1, b=2)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep
