import itertools
from fractions import Fraction

import numpy as np
import pytest

from rds_ss.domain import RdsSample

_acceptance_lines = []


def brute_force_inclusion(sizes, n):
    """Inclusion probabilities by enumerating every ordered n-sequence (exact Fractions)."""
    N = len(sizes)
    total = sum(sizes)
    pi = [Fraction(0)] * N
    for seq in itertools.permutations(range(N), n):
        p = Fraction(1)
        used = 0
        for i in seq:
            p *= Fraction(sizes[i], total - used)
            used += sizes[i]
        for i in seq:
            pi[i] += p
    return pi


def random_sample(rng, n, max_degree=20, assoc=0.0):
    """Unlinked sample with degrees 1..max_degree; outcome odds rise with degree when assoc > 0."""
    d = rng.integers(1, max_degree + 1, size=n)
    p = np.clip(0.2 + assoc * (d - d.mean()) / max_degree, 0.02, 0.98)
    z = (rng.random(n) < p).astype(float)
    return RdsSample.from_arrays(d.tolist(), z.tolist())


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion for the terminal summary."""

    def record(number, title, passed, detail=""):
        _acceptance_lines.append((number, title, bool(passed), detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_acceptance_lines, key=lambda t: t[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title} :: {detail}")
