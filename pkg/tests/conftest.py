import math
import random

import pytest

from pcfrac.alpha import IrrationalSpec, Surd

ACCEPTANCE_LINES: list[str] = []


def random_surds(n: int, seed: int) -> list[IrrationalSpec]:
    """Reproducible quadratic irrationals ``(A + B sqrt(D)) / C`` with small coefficients."""
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        D = rng.randint(2, 60)
        if math.isqrt(D) ** 2 == D:
            continue
        B = rng.choice([-1, 1]) * rng.randint(1, 9)
        spec = IrrationalSpec(Surd(rng.randint(-30, 30), B, D, rng.randint(1, 12)))
        out.append(spec)
    return out


@pytest.fixture(scope="session")
def surd_corpus():
    return random_surds(20, seed=20240611)


def report(line: str):
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
