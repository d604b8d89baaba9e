"""Scenario file round-trips, validation messages, and generators."""

import dataclasses

import numpy as np
import pytest

from uavplan.scenario import (
    AreaSpec,
    Scenario,
    ScenarioParseError,
    ScenarioValidationError,
    UePoint,
    default_area,
    default_channel_params,
    default_system_params,
    dumps,
    generate_clustered_scenario,
    generate_random_scenario,
    load_scenario,
    loads,
    save_scenario,
    validate,
)

from conftest import make_scenario


def test_roundtrip_exact(tmp_path):
    sc = generate_random_scenario(seed=9, ue_count=12, obstacle_count=3)
    path = tmp_path / "sc.toml"
    save_scenario(sc, path)
    back = load_scenario(path)
    assert back == sc


def test_roundtrip_preserves_float_bits(tmp_path):
    # repr() of a float is exact, so coordinates must survive untouched
    sc = make_scenario([(1234.5678901234567, 9.000000001)])
    path = tmp_path / "sc.toml"
    save_scenario(sc, path)
    back = load_scenario(path)
    assert back.ues[0].x == 1234.5678901234567
    assert back.ues[0].y == 9.000000001


def test_loads_dumps_without_files():
    sc = generate_random_scenario(seed=3, ue_count=5, obstacle_count=1)
    assert loads(dumps(sc)) == sc


def test_optional_snr_gate_roundtrip():
    sys_a = dataclasses.replace(default_system_params(), attraction_snr_threshold=2.5)
    sc = Scenario(
        area=default_area(),
        channel=default_channel_params(),
        system=sys_a,
        ues=(UePoint(0, 100.0, 100.0, -5.0),),
        obstacles=(),
    )
    back = loads(dumps(sc))
    assert back.system.attraction_snr_threshold == 2.5

    sys_b = dataclasses.replace(sys_a, attraction_snr_threshold=None)
    sc2 = dataclasses.replace(sc, system=sys_b)
    text = dumps(sc2)
    assert "attraction_snr_threshold" not in text
    assert loads(text).system.attraction_snr_threshold is None


def test_missing_key_raises_parse_error():
    sc = generate_random_scenario(seed=1, ue_count=2, obstacle_count=0)
    text = dumps(sc)
    stripped = "\n".join(
        line for line in text.splitlines() if not line.startswith("uav_bandwidth")
    )
    with pytest.raises(ScenarioParseError, match="uav_bandwidth"):
        loads(stripped)


def test_missing_section_raises_parse_error():
    with pytest.raises(ScenarioParseError, match="area"):
        loads("")


def test_unknown_key_rejected():
    sc = generate_random_scenario(seed=1, ue_count=2, obstacle_count=0)
    text = dumps(sc).replace("[system]", "[system]\nbogus_knob = 3")
    with pytest.raises(ScenarioParseError, match="bogus_knob"):
        loads(text)


def test_malformed_toml_raises_parse_error():
    with pytest.raises(ScenarioParseError):
        loads("[area\nwidth = 100")


def test_validate_ue_outside_area():
    sc = make_scenario([(20000.0, 50.0)])
    with pytest.raises(ScenarioValidationError, match="UE 0"):
        validate(sc)


def test_validate_duplicate_ue_ids():
    base = make_scenario([(10.0, 10.0), (20.0, 20.0)])
    dup = dataclasses.replace(
        base, ues=(base.ues[0], dataclasses.replace(base.ues[1], id=0))
    )
    with pytest.raises(ScenarioValidationError, match="duplicate"):
        validate(dup)


def test_validate_nonpositive_dimensions():
    bad_area = AreaSpec(width=0.0, height=10_000.0)
    sc = dataclasses.replace(make_scenario([(10.0, 10.0)]), area=bad_area)
    with pytest.raises(ScenarioValidationError, match="dimensions"):
        validate(sc)


def test_validate_obstacle_radius():
    sc = make_scenario([(10.0, 10.0)], obstacles=((500.0, 500.0, -3.0),))
    with pytest.raises(ScenarioValidationError, match="radius"):
        validate(sc)


def test_validate_obstacle_containment():
    sc = make_scenario([(10.0, 10.0)], obstacles=((50.0, 50.0, 200.0),))
    with pytest.raises(ScenarioValidationError, match="inside area"):
        validate(sc)


def test_validate_system_params():
    sc = make_scenario([(10.0, 10.0)], max_velocity=0.0)
    with pytest.raises(ScenarioValidationError, match="max_velocity"):
        validate(sc)


def test_validate_no_ues():
    sc = dataclasses.replace(make_scenario([(10.0, 10.0)]), ues=())
    with pytest.raises(ScenarioValidationError, match="no UEs"):
        validate(sc)


def test_validate_accepts_defaults():
    validate(generate_random_scenario(seed=5, ue_count=10, obstacle_count=2))


def test_random_generator_deterministic():
    a = generate_random_scenario(seed=11, ue_count=30, obstacle_count=4)
    b = generate_random_scenario(seed=11, ue_count=30, obstacle_count=4)
    assert a == b
    c = generate_random_scenario(seed=12, ue_count=30, obstacle_count=4)
    assert a != c


def test_random_generator_counts_and_bounds():
    sc = generate_random_scenario(seed=7, ue_count=50, obstacle_count=3)
    assert len(sc.ues) == 50
    assert len(sc.obstacles) == 3
    xy = sc.ue_positions()
    assert xy.shape == (50, 2)
    assert np.all(xy[:, 0] >= 0) and np.all(xy[:, 0] <= sc.area.width)
    assert np.all(xy[:, 1] >= 0) and np.all(xy[:, 1] <= sc.area.height)
    for ob in sc.obstacles:
        assert 100.0 <= ob.radius <= 500.0
    # no UE may start inside an obstacle disc
    centers = sc.obstacle_centers()
    radii = sc.obstacle_radii()
    d = np.hypot(
        xy[:, None, 0] - centers[None, :, 0], xy[:, None, 1] - centers[None, :, 1]
    )
    assert np.all(d > radii[None, :])


def test_clustered_generator_layout():
    sc = generate_clustered_scenario(
        seed=4, ue_count=24, cluster_count=4, cluster_sigma=80.0, obstacle_count=2
    )
    assert len(sc.ues) == 24
    xy = sc.ue_positions()
    assert np.all(xy >= 0.0)
    assert np.all(xy[:, 0] <= sc.area.width)
    assert np.all(xy[:, 1] <= sc.area.height)
    # round-robin assignment: UE k belongs to blob k % 4, and blobs are tight
    labels = np.arange(24) % 4
    for k in range(4):
        pts = xy[labels == k]
        spread = np.max(np.linalg.norm(pts - pts.mean(axis=0), axis=1))
        assert spread < 80.0 * 5


def test_clustered_generator_rejects_bad_counts():
    with pytest.raises(ScenarioValidationError):
        generate_clustered_scenario(seed=1, ue_count=3, cluster_count=5)


def test_reference_scenario_file():
    sc = load_scenario("scenarios/forest_50ue.toml")
    validate(sc)
    assert len(sc.ues) == 50
    assert len(sc.obstacles) == 3
    assert sc.system.uav_max_power == 38.0
    assert sc.channel.carrier_frequency == 1.4e9
    assert all(u.snr_threshold == -5.0 for u in sc.ues)


def test_demo_scenario_file():
    sc = load_scenario("scenarios/demo_clustered.toml")
    validate(sc)
    assert all(u.snr_threshold == -40.0 for u in sc.ues)


def test_ue_accessors():
    sc = make_scenario([(1.0, 2.0), (3.0, 4.0)], snr_threshold=-12.0)
    assert np.allclose(sc.ue_thresholds_db(), [-12.0, -12.0])
    assert sc.ue_positions().tolist() == [[1.0, 2.0], [3.0, 4.0]]
    assert sc.ue_count == 2


def test_obstacle_accessors():
    sc = make_scenario(
        [(1000.0, 1000.0)], obstacles=((300.0, 400.0, 100.0), (800.0, 900.0, 160.0))
    )
    assert sc.obstacle_centers().tolist() == [[300.0, 400.0], [800.0, 900.0]]
    assert sc.obstacle_radii().tolist() == [100.0, 160.0]
    empty = make_scenario([(1.0, 1.0)])
    assert empty.obstacle_centers().shape == (0, 2)
    assert empty.obstacle_radii().shape == (0,)
