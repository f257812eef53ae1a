import os
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


@pytest.fixture(scope="session")
def full_scale_job():
    """Cached single-threaded 5000-point benchmark jobs, keyed by (surface, sigma, seed)."""
    from pccurv.metrics import run_job

    cache = {}

    def get(surface, sigma=0.0, seed=0, n=5000):
        key = (surface, float(sigma), int(seed), n)
        if key not in cache:
            start = time.perf_counter()
            job = run_job(surface, n, sigma, seed, workers=1)
            cache[key] = (job, time.perf_counter() - start)
        return cache[key]

    return get


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
