from functools import lru_cache

import numpy as np
import pytest

from pcgeom.examples import load_builtin
from pcgeom.expr import parse
from pcgeom.geometry import ChartManifold


@lru_cache(maxsize=None)
def builtin(name):
    return load_builtin(name)


def make_chart(coords, entries, box=None, name="test"):
    """Chart from ``{(i, j): source}`` lower-triangle metric entries (0-based)."""
    coords = tuple(coords)
    n = len(coords)
    zero = parse("0", coords)
    rows = [[zero] * n for _ in range(n)]
    for (i, j), src in entries.items():
        e = parse(src, coords)
        rows[i][j] = rows[j][i] = e
    box = box or [(-1.0, 1.0)] * n
    return ChartManifold(coords, tuple(tuple(r) for r in rows), tuple(box), name=name)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: dict[str, str] = {}


def record(criterion: str, ok: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = f"{criterion} {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[1:])):
        terminalreporter.write_line(ACCEPTANCE[key])
