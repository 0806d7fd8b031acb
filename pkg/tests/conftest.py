import random
from fractions import Fraction

import pytest

from expflow.exactnum import Quad
from expflow.iem import IntervalExchange
from expflow.suspension import is_irreducible

SQRT2 = Quad.sqrt(2)
SQRT5 = Quad.sqrt(5)


def golden_321() -> IntervalExchange:
    return IntervalExchange([(3 - SQRT5) / 2, (3 - SQRT5) / 2, SQRT5 - 2], [3, 2, 1])


def random_irreducible(rng: random.Random, n: int) -> list[int]:
    while True:
        p = list(range(1, n + 1))
        rng.shuffle(p)
        if is_irreducible(p):
            return p


def random_sqrt2_lengths(rng: random.Random, n: int) -> list[Quad]:
    raw = [Quad(Fraction(rng.randint(1, 40), 7), Fraction(rng.randint(0, 30), 11), 2)
           for _ in range(n)]
    total = sum(raw, Quad(0))
    return [x / total for x in raw]


def random_rational_lengths(rng: random.Random, n: int, qmax: int = 500) -> list[Fraction]:
    q = rng.randint(n, qmax)
    cuts = sorted(rng.sample(range(1, q), n - 1))
    pts = [0, *cuts, q]
    return [Fraction(pts[i + 1] - pts[i], q) for i in range(n)]


@pytest.fixture
def rng():
    return random.Random(20240611)


# -- acceptance report: one line per criterion --------------------------------

_CRITERIA: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        detail = getattr(item, "criterion_detail", "")
        _CRITERIA[n] = ("PASS" if rep.passed else "FAIL", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status, title, detail = _CRITERIA[n]
        line = f"criterion {n:>2} {status}: {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
