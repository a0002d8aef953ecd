import numpy as np
import pytest

_CRITERIA: dict[str, tuple[bool, str]] = {}


class Criterion:
    """Collects named sub-checks for one acceptance criterion."""

    def __init__(self, key: str, title: str):
        self.key, self.title = key, title
        self.items: list[tuple[str, bool, str]] = []

    def check(self, name: str, ok, detail: str = ""):
        self.items.append((name, bool(ok), detail))
        return bool(ok)

    def close(self):
        failed = [f"{n} ({d})" if d else n for n, ok, d in self.items if not ok]
        ok = not failed
        detail = f"{len(self.items)} checks" if ok else "failed: " + "; ".join(failed)
        _CRITERIA[self.key] = (ok, f"{self.title}: {detail}")
        print(f"\n[criterion {self.key}] {'PASS' if ok else 'FAIL'} {self.title}: {detail}")
        assert ok, detail


@pytest.fixture
def criterion():
    made = []

    def make(key, title):
        c = Criterion(key, title)
        made.append(c)
        return c

    return make


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: (int(k.split("-")[0]), k)):
        ok, text = _CRITERIA[key]
        tr.write_line(f"criterion {key:>6}  {'PASS' if ok else 'FAIL'}  {text}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
