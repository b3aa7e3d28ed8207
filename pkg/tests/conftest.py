import numpy as np
import pytest

from timbresep.core import DEFAULT_GRID


@pytest.fixture
def grid():
    return DEFAULT_GRID


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def tone(freq, seconds=1.0, sr=22050, amps=(1.0,), amp=1.0):
    """Band-limited harmonic tone, used by several modules' tests."""
    t = np.arange(int(seconds * sr)) / sr
    out = np.zeros_like(t)
    for h, a in enumerate(amps, start=1):
        if h * freq < sr / 2:
            out += a * np.sin(2 * np.pi * h * freq * t)
    return amp * out


# acceptance results, keyed by criterion number: list of (label, ok, detail)
ACCEPTANCE: dict = {}


def record(criterion: int, label: str, ok: bool, detail: str = "") -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'} criterion {criterion} [{label}] {detail}")
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[c]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{label}: {'ok' if good else 'FAILED'} {d}".rstrip() for label, good, d in parts)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {c}  {detail}")
