import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from endocam.geometry import Pose
from endocam.safety import CoincidentPoints, ConeWorkspace, cone_contains, cone_from_scene, gate_goal


def ray_disc_oracle(cone: ConeWorkspace, p) -> bool:
    """Independent membership: the ray from the apex through p must cross the
    base disc no closer to the apex than p itself."""
    rel = np.asarray(p, dtype=float) - cone.apex
    if not rel.any():
        return True
    along = rel @ cone.axis
    if along <= 0:
        return False
    scale = cone.height / along  # ray parameter where it meets the base plane
    if scale < 1.0:
        return False
    hit = rel * scale
    return bool(np.linalg.norm(hit - cone.height * cone.axis) <= cone.base_radius)


@pytest.fixture
def cone():
    return cone_from_scene([0.0, 0.0, 0.3], [0.0, 0.0, 0.0], 0.3, 0.1)


class TestConeFromScene:
    def test_reference_cone(self, cone):
        np.testing.assert_allclose(cone.axis, [0, 0, -1])
        assert cone.height == pytest.approx(0.285)
        assert cone.base_radius == 0.1

    def test_coincident(self):
        with pytest.raises(CoincidentPoints):
            cone_from_scene([0.1, 0.2, 0.3], [0.1, 0.2, 0.3], 0.3)

    @given(st.tuples(*[st.floats(-1, 1)] * 3))
    def test_axis_unit(self, feature):
        f = np.array(feature)
        if np.linalg.norm(f - [0, 0, 0.3]) < 1e-6:
            return
        assert np.linalg.norm(cone_from_scene([0, 0, 0.3], f, 0.4).axis) == pytest.approx(1.0, abs=1e-12)

    def test_immutable(self, cone):
        with pytest.raises(dataclasses.FrozenInstanceError):
            cone.height = 1.0
        with pytest.raises(ValueError):
            cone.apex[0] = 5.0


class TestMembership:
    def test_apex_and_base_center(self, cone):
        assert cone_contains(cone, cone.apex)
        assert cone_contains(cone, cone.apex + cone.height * cone.axis)

    def test_hand_evaluated_taper(self, cone):
        assert cone_contains(cone, [0.09, 0.0, 0.02])
        assert not cone_contains(cone, [0.11, 0.0, 0.02])

    def test_beyond_base_and_behind_apex(self, cone):
        assert not cone_contains(cone, [0.0, 0.0, -0.001])
        assert not cone_contains(cone, [0.0, 0.0, 0.31])

    def test_agrees_with_oracle(self, cone):
        rng = np.random.default_rng(7)
        pts = rng.uniform([-0.15, -0.15, -0.05], [0.15, 0.15, 0.35], size=(10_000, 3))
        mismatches = sum(cone_contains(cone, p) != ray_disc_oracle(cone, p) for p in pts)
        assert mismatches == 0


class TestGate:
    def test_inside_passes(self, cone):
        cmd = Pose(np.array([0.0, 0.0, 0.1]))
        assert gate_goal(cone, cmd, Pose(np.array([0.0, 0.0, 0.2]))) is cmd

    def test_outside_holds(self, cone):
        held = Pose(np.array([0.0, 0.0, 0.2]))
        assert gate_goal(cone, Pose(np.array([0.5, 0.0, 0.1])), held) is held

    @given(st.lists(st.tuples(st.floats(-0.2, 0.2), st.floats(-0.2, 0.2), st.floats(-0.1, 0.4)), max_size=30))
    def test_output_always_in_cone(self, positions):
        cone = cone_from_scene([0.0, 0.0, 0.3], [0.0, 0.0, 0.0], 0.3, 0.1)
        held = Pose(np.array([0.0, 0.0, 0.1]))
        for p in positions:
            out = gate_goal(cone, Pose(np.array(p)), held)
            assert cone_contains(cone, out.position)
            if out is not held:
                assert cone_contains(cone, p)
            held = out
