import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hufftok import FrequencyTable  # noqa: E402

TOY_COUNTS = {"the": 4, "is": 3, "blue": 2, "house": 2, ".": 1, "hill": 1, "on": 1, "sky": 1}

# hand trace of the ternary tree: N1=(., hill, on) N2=(sky, blue, house)
# N3=(is, N1, the) root=(N2, N3)
TOY_CODES = {
    "sky": (0, 0), "blue": (0, 1), "house": (0, 2),
    "is": (1, 0), "the": (1, 2),
    ".": (1, 1, 0), "hill": (1, 1, 1), "on": (1, 1, 2),
}

TOY_TOKENS = "the house is on the hill the house is blue the sky is blue .".split()


@pytest.fixture
def toy_table():
    return FrequencyTable(TOY_COUNTS)


_RESULTS = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(_RESULTS, [])

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_RESULTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
