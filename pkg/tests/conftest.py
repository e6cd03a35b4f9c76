import numpy as np
import pytest
from hypothesis import strategies as st

from endocam.camera import CameraModel
from endocam.scenario import load_scenario
from endocam.simulator import run

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)
angles = st.floats(min_value=-2 * np.pi, max_value=2 * np.pi, allow_nan=False, allow_infinity=False)


@st.composite
def unit_vectors(draw, min_horizontal=2e-3):
    """Unit vectors bounded away from +-z by ``min_horizontal`` in xy-norm.

    The default clears the degenerate band |z.up| >= 1 - 1e-6 (xy-norm ~1.4e-3).
    """
    v = np.array(draw(st.tuples(finite, finite, finite)), dtype=float)
    n = np.linalg.norm(v)
    if n < 1e-6 or np.linalg.norm(v[:2]) / n < min_horizontal:
        v = np.array([1.0, 0.0, 0.0]) + v * 1e-3
    return v / np.linalg.norm(v)


@pytest.fixture
def camera_model():
    return CameraModel()


@pytest.fixture(scope="session")
def preset_runs():
    """Cached ``(samples, summary, poses, setup)`` per (preset, mode)."""
    cache = {}

    def get(preset, mode=None):
        key = (preset, mode)
        if key not in cache:
            sc = load_scenario(preset)
            if mode is not None:
                sc.mode = mode
            setup = sc.to_setup()
            samples, summary, poses = run(setup, record_poses=True)
            cache[key] = (samples, summary, poses, setup)
        return cache[key]

    return get
