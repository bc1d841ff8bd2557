import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from covarc.arrays import CoveringArray, parse_catalog

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def oa9():
    """The all-pairs 9x2 array over Z_3."""
    return CoveringArray(3, [(x, y) for x in range(3) for y in range(3)])


@pytest.fixture(scope="session")
def ca10_base():
    """CA(10;2,3): all pairs plus one duplicate row."""
    return CoveringArray(3, [(x, y) for x in range(3) for y in range(3)] + [(0, 0)])


@pytest.fixture(scope="session")
def oa16():
    """OA(16;2,4) built from all pairs over Z_4 (extended to 5 columns when
    needed by the test itself)."""
    return CoveringArray(4, [(x, y) for x in range(4) for y in range(4)])


@pytest.fixture(scope="session")
def uca_11_5_3():
    """The three classified UCA(11;5,3) representatives."""
    return parse_catalog((FIXTURES / "uca_11_5_3.cat").read_text())


@pytest.fixture(scope="session")
def oa_16_5_4():
    """OA(16;5,4) over GF(4): rows (a, b, a+b, a+xb, a+(x+1)b)."""

    def add(a, b):
        return a ^ b

    def mul(a, b):
        # GF(4) with elements {0,1,x,x+1} encoded 0..3, modulus x^2+x+1
        table = [
            [0, 0, 0, 0],
            [0, 1, 2, 3],
            [0, 2, 3, 1],
            [0, 3, 1, 2],
        ]
        return table[a][b]

    rows = []
    for a in range(4):
        for b in range(4):
            rows.append((a, b, add(a, b), add(a, mul(2, b)), add(a, mul(3, b))))
    return CoveringArray(4, rows)


# ---------------------------------------------------------------------------
# acceptance reporting: one line per criterion at the end of the run


def pytest_configure(config):
    config._criterion_results = {}


def pytest_runtest_makereport(item, call):
    if call.when != "call":
        return
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    store = item.config._criterion_results.setdefault(n, {"passed": 0, "failed": 0})
    if call.excinfo is None:
        store["passed"] += 1
    else:
        store["failed"] += 1


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_criterion_results", None)
    if not results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(results):
        r = results[n]
        status = "PASS" if r["failed"] == 0 else "FAIL"
        tr.write_line(
            f"CRITERION {n}: {status} "
            f"({r['passed']} checks passed, {r['failed']} failed)"
        )
