import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from endocam.autocam import CameraMode
from endocam.scenario import (
    Scenario,
    load_scenario,
    parse_scenario,
    preset_names,
    read_trajectory,
    serialize_scenario,
    write_trajectory,
)
from endocam.simulator import ConfigError


class TestParse:
    def test_minimal_document_fills_defaults(self):
        sc = parse_scenario("rail: {builtin: wire-chaser}\nmode: centering\n")
        assert sc.mode is CameraMode.CENTERING
        assert sc.autocam.d_f == 0.10
        assert sc.lag.dt == 0.02
        assert sc.camera.width == 640
        assert sc.touch.min_gap_ticks == 5

    def test_empty_document(self):
        assert parse_scenario("") == Scenario()

    def test_hardest_thresholds(self):
        sc = parse_scenario("noise: {position_threshold: 0.0035, angular_threshold_deg: 30}\ntrajectory: {control_points: 71}")
        noise = sc.noise_spec()
        assert noise.position_threshold == 0.0035
        assert noise.angular_threshold == pytest.approx(math.radians(30))

    @pytest.mark.parametrize(
        "text, path",
        [
            ("noise: {position_threshold: -1}", "noise.position_threshold"),
            ("autocam: {d_f: 0.5}", "autocam"),
            ("camera: {fx: 500, focal: 2}", "camera.focal"),
            ("colour: red", "colour"),
            ("mode: orbit", "mode"),
            ("rail: {builtin: spiral}", "rail"),
            ("base_dir: /tmp", "base_dir"),
        ],
    )
    def test_errors_name_the_key(self, text, path):
        with pytest.raises(ConfigError) as info:
            parse_scenario(text)
        assert info.value.path == path

    def test_not_yaml(self):
        with pytest.raises(ConfigError):
            parse_scenario("a: [1, 2")

    def test_custom_rail_points(self):
        sc = parse_scenario("rail: {points: [[0, 0, 0], [0.1, 0, 0], [0.1, 0.1, 0.05]]}")
        assert sc.rail.builtin is None
        assert len(sc.wire()) == 3

    def test_both_rail_sources_rejected(self):
        with pytest.raises(ConfigError):
            parse_scenario("rail: {builtin: wire-chaser, points: [[0, 0, 0], [1, 0, 0]]}")


@settings(max_examples=40, deadline=None)
@given(
    mode=st.sampled_from(list(CameraMode)),
    seed=st.integers(0, 10**6),
    d_f=st.floats(0.05, 0.2),
    pos=st.floats(0, 0.01),
    ang=st.floats(0, 1.0),
    speed=st.one_of(st.just(math.inf), st.floats(0.01, 1.0)),
    n=st.integers(2, 200),
)
def test_round_trip(mode, seed, d_f, pos, ang, speed, n):
    sc = Scenario.model_validate(
        {
            "mode": mode,
            "seed": seed,
            "autocam": {"d_f": d_f},
            "noise": {"position_threshold": pos, "angular_threshold": ang},
            "lag": {"max_linear_speed": speed},
            "trajectory": {"control_points": n},
        }
    )
    assert parse_scenario(serialize_scenario(sc)) == sc


class TestPresets:
    def test_shipped(self):
        assert preset_names() == ["ideal", "noisy-path1", "noisy-path2", "noisy-path3"]

    @pytest.mark.parametrize(
        "name, points, pos, ang_deg",
        [("noisy-path1", 36, 0.003, 10), ("noisy-path2", 36, 0.0035, 20), ("noisy-path3", 71, 0.0035, 30)],
    )
    def test_noise_levels(self, name, points, pos, ang_deg):
        sc = load_scenario(name)
        assert sc.trajectory.control_points == points
        assert sc.noise.position_threshold == pos
        assert sc.noise.angular_threshold == pytest.approx(math.radians(ang_deg))

    def test_unknown(self):
        with pytest.raises(ConfigError):
            load_scenario("no-such-preset")

    def test_file_beats_preset_name(self, tmp_path):
        f = tmp_path / "s.yaml"
        f.write_text("name: mine\n")
        assert load_scenario(str(f)).name == "mine"


class TestTrajectoryFiles:
    def test_round_trip_exact(self, tmp_path):
        sc = load_scenario("noisy-path2")
        points = sc.control_points()
        path = tmp_path / "t.yaml"
        write_trajectory(path, points, sc)
        assert read_trajectory(path) == points

    def test_relative_path_resolves_next_to_scenario(self, tmp_path):
        sc = load_scenario("noisy-path1")
        write_trajectory(tmp_path / "t.yaml", sc.control_points(), sc)
        (tmp_path / "s.yaml").write_text("trajectory: {file: t.yaml}\n")
        replay = load_scenario(str(tmp_path / "s.yaml"))
        np.testing.assert_array_equal(replay.to_setup().trajectory.positions, sc.to_setup().trajectory.positions)

    @pytest.mark.parametrize(
        "text",
        ["format: other\ncontrol_points: []\n", "format: endocam-trajectory/1\ncontrol_points: [[0, 0, 0]]\n",
         "format: endocam-trajectory/1\ncontrol_points: [[0, 0, 0, 0, 0, 0]]\n"],
    )
    def test_malformed(self, tmp_path, text):
        path = tmp_path / "t.yaml"
        path.write_text(text)
        with pytest.raises(ConfigError):
            read_trajectory(path)

    def test_missing_file(self, tmp_path):
        sc = parse_scenario(f"trajectory: {{file: {tmp_path / 'nope.yaml'}}}")
        with pytest.raises(ConfigError) as info:
            sc.to_setup()
        assert "trajectory.file" in str(info.value)
