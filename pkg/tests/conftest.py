import numpy as np
import pytest

from semsketch.synth import generate_video


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_video():
    """64x48, 6 frames, two movers and one static fixture."""
    return generate_video(np.random.default_rng(5), width=64, height=48, frames=6, n_movers=2, n_static=1)


def random_sketch(rng, shape, density=0.2):
    return np.where(rng.random(shape) < density, 255, 0).astype(np.uint8)


ACCEPTANCE_RESULTS = []


@pytest.fixture
def record():
    """Log one acceptance line; the line is printed in the terminal summary."""

    def _record(number, ok, detail):
        ACCEPTANCE_RESULTS.append((number, bool(ok), detail))
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
