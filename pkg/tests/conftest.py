import numpy as np
import pytest

ACCEPTANCE_LINES = []


def random_sequence(rng, T, n, p):
    """Independent G(n, p) layers as a (T, n, n) uint8 array."""
    upper = np.triu(rng.random((T, n, n)) < p, k=1)
    return (upper | upper.transpose(0, 2, 1)).astype(np.uint8)


def symmetric(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) * scale
    return (a + a.T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def blocks(n, lengths, start_empty=True):
    """Alternating empty / complete layers."""
    full = (np.ones((n, n)) - np.eye(n)).astype(np.uint8)
    out, on = [], not start_empty
    for length in lengths:
        out.extend([full if on else np.zeros_like(full)] * length)
        on = not on
    return np.stack(out)
