import numpy as np
import pytest

from qba.channels import KrausChannel, amplitude_damping, random_kraus_channel
from qba.linalg import random_unitary

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def rotated_amplitude_damping(p, rng):
    """``U_out . AD_p . U_in`` -- degradable for p < 1/2, so less noisy."""
    u_in = random_unitary(2, rng)
    u_out = random_unitary(2, rng)
    ops = [u_out @ a @ u_in for a in amplitude_damping(p).kraus_ops]
    return KrausChannel(ops)


def random_channels(n, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        a = int(rng.integers(2, 4))
        b = int(rng.integers(2, 4))
        k = int(rng.integers(-(-a // b), a * b + 1))
        out.append(random_kraus_channel(a, b, k, rng))
    return out
