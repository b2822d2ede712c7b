import logging
from pathlib import Path

import pytest
import yaml

from salpeter.errors import ConfigurationError
from salpeter.potential import SmoothTanh
from salpeter.utils.scenario import (
    TimeRange,
    apply_overrides,
    load_scenario,
    scan_packet,
    validate_scenario,
)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def _data(**changes):
    data = {
        "grid": {"x_min": -20.0, "x_max": 20.0, "n_points": 512},
        "potential": {"kind": "smooth_tanh", "v0": 20.0, "length": 1.0, "alpha": 20.0},
        "packet": {"x0": -3.5, "p0": 1.0, "delta_x": 2.0},
        "times": [0.0, 5.0, 10.0],
    }
    data.update(changes)
    return data


def _paths(exc: pytest.ExceptionInfo[ConfigurationError]) -> list[str]:
    return [path for path, _ in exc.value.problems]


def _write(tmp_path: Path, data, name="case.yaml") -> Path:
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return path


@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.yaml")), ids=lambda p: p.stem)
def test_bundled_scenarios_validate(path):
    scenario = load_scenario(path)
    assert scenario.name == path.stem
    assert scenario.time_list


def test_defaults():
    scenario = validate_scenario(_data())

    assert isinstance(scenario.potential, SmoothTanh)
    assert scenario.units.rest_energy == 1.0
    assert scenario.observables.density and scenario.observables.olc
    assert scenario.olc_denominator == "total"
    assert scenario.scan is None
    assert scenario.make_grid().n_points == 512


def test_time_range_includes_stop():
    assert TimeRange(start=0.0, stop=1.0, step=0.25).values() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert validate_scenario(_data(times={"stop": 0.3, "step": 0.1})).time_list == pytest.approx([0.0, 0.1, 0.2, 0.3])


def test_empty_times_are_rejected():
    with pytest.raises(ConfigurationError) as exc:
        validate_scenario(_data(times=[]))
    assert _paths(exc) == ["times"]
    assert exc.value.exit_code == 2


def test_schema_errors_are_reported_together():
    data = _data()
    data["grid"]["n_points"] = 2
    data["packet"]["delta_x"] = -1.0
    data["potential"]["v0"] = -5.0

    with pytest.raises(ConfigurationError) as exc:
        validate_scenario(data)

    paths = _paths(exc)
    assert "grid.n_points" in paths
    assert "packet.delta_x" in paths
    assert any(p.startswith("potential.") and p.endswith("v0") for p in paths)


def test_cross_module_problems_are_reported_together():
    data = _data(times=[1.0, 0.0])
    data["grid"]["n_points"] = 511

    with pytest.raises(ConfigurationError) as exc:
        validate_scenario(data)

    assert _paths(exc) == ["grid.n_points", "times"]


def test_cross_checks_run_alongside_schema_errors():
    data = _data(packet={"x0": -19.5, "p0": 1.0, "delta_x": 2.0})
    data["potential"]["v0"] = -5.0

    with pytest.raises(ConfigurationError) as exc:
        validate_scenario(data)

    paths = _paths(exc)
    assert "packet" in paths
    assert any(p.startswith("potential.") for p in paths)


def test_misaligned_time_step_warns(caplog):
    # dx = 40/512 = 0.078125
    with caplog.at_level(logging.WARNING, logger="salpeter.utils.scenario"):
        validate_scenario(_data(times={"stop": 1.0, "step": 0.1}))
    assert "not a multiple of dx/c" in caplog.text

    caplog.clear()
    with caplog.at_level(logging.WARNING, logger="salpeter.utils.scenario"):
        validate_scenario(_data(times={"stop": 1.5625, "step": 0.15625}))
    assert caplog.text == ""


def test_packet_must_fit_the_grid():
    with pytest.raises(ConfigurationError) as exc:
        validate_scenario(_data(packet={"x0": -19.5, "p0": 1.0, "delta_x": 2.0}))
    assert _paths(exc) == ["packet"]


def test_grid_size_cap():
    data = _data()
    data["grid"]["n_points"] = 8192
    with pytest.raises(ConfigurationError) as exc:
        validate_scenario(data)
    assert "grid.n_points" in _paths(exc)


def test_unknown_fields_are_rejected():
    with pytest.raises(ConfigurationError) as exc:
        validate_scenario(_data(colour="blue"))
    assert _paths(exc) == ["colour"]


def test_scan_packet_keeps_gap_to_barrier():
    scenario = validate_scenario(_data(scan={"v0": [1.0, 2.0], "length": [1.0, 10.0], "packet_gap": 3.0}))

    assert scan_packet(scenario, 1.0).x0 == -3.5
    assert scan_packet(scenario, 10.0).x0 == -8.0
    assert scan_packet(scenario, 10.0).delta_x == 2.0


def test_scan_without_gap_reuses_packet():
    scenario = validate_scenario(_data(scan={"v0": [1.0], "length": [2.0]}))
    assert scan_packet(scenario, 2.0) == scenario.packet


def test_scan_packets_must_fit():
    with pytest.raises(ConfigurationError) as exc:
        validate_scenario(_data(scan={"v0": [1.0], "length": [1.0, 40.0], "packet_gap": 3.0}))
    assert _paths(exc) == ["scan.length.1"]


def test_overrides():
    data = apply_overrides(_data(), ["potential.v0=3", "times=[0, 1]", "units.mass=2.5"])

    assert data["potential"]["v0"] == 3
    assert data["times"] == [0, 1]
    assert data["units"] == {"mass": 2.5}


def test_bad_override():
    with pytest.raises(ConfigurationError):
        apply_overrides(_data(), ["potential.v0"])


def test_load_scenario_with_overrides(tmp_path):
    path = _write(tmp_path, _data())

    scenario = load_scenario(path, ["potential.v0=0", "name=free"])

    assert scenario.name == "free"
    assert scenario.potential.v0 == 0.0


def test_unreadable_yaml(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("grid: [unclosed\n", encoding="utf-8")

    with pytest.raises(ConfigurationError):
        load_scenario(path)


def test_top_level_must_be_a_mapping(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")

    with pytest.raises(ConfigurationError):
        load_scenario(path)
