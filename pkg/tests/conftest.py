import os

import numpy as np
import pytest

from hopavg.graph import build_family, build_random_geometric


def pytest_addoption(parser):
    parser.addoption("--full-grid", action="store_true", default=False,
                     help="also run the full n in 100..500, avg degree up to 60 sweep grid")


def pytest_configure(config):
    config.addinivalue_line("markers", "full_grid: only with --full-grid or HOPAVG_FULL_GRID=1")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--full-grid") or os.environ.get("HOPAVG_FULL_GRID") == "1":
        return
    skip = pytest.mark.skip(reason="full grid is opt-in (--full-grid)")
    for item in items:
        if "full_grid" in item.keywords:
            item.add_marker(skip)


def fixture_graphs(small_only=False):
    """Deterministic fixture set shared by several test modules."""
    out = []
    for fam in ("path", "cycle", "complete"):
        for n in range(3, 13):
            out.append(build_family(fam, n))
    out.append(build_family("strongly-regular"))
    out.append(build_family("k-regular", 10, 4))
    out.append(build_family("k-regular", 12, 3))
    if not small_only:
        rng = np.random.default_rng(2024)
        for n in (10, 15, 20, 30):
            out.append(build_random_geometric(n, 2 * n, rng))
    return out


@pytest.fixture(scope="session")
def graphs():
    return fixture_graphs()


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert on it."""

    def report(number, title, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}"
        if detail:
            line += f"  [{detail}]"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
