"""
Scenario files: YAML documents validated against pydantic models.

Every problem found (schema errors and cross-module preconditions alike) is reported in one
ConfigurationError with dotted field paths.
"""

import logging
import math
import os
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from salpeter.errors import ConfigurationError
from salpeter.grid import MIN_POINTS, Grid, make_grid
from salpeter.potential import NarrowDelta, Potential
from salpeter.types import Units
from salpeter.wavepacket import PacketSpec, support_problems

logger = logging.getLogger(__name__)

MAX_POINTS = 4096


class GridConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    x_min: float
    x_max: float
    n_points: int = Field(ge=MIN_POINTS)


class TimeRange(BaseModel):
    """Evenly spaced times start, start+step, ... up to and including stop."""

    model_config = ConfigDict(extra="forbid")

    start: float = 0.0
    stop: float
    step: float = Field(gt=0)

    def values(self) -> list[float]:
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [self.start + k * self.step for k in range(max(count, 0))]


class ObservableFlags(BaseModel):
    model_config = ConfigDict(extra="forbid")

    density: bool = True
    olc: bool = True
    transmitted: bool = False
    free_reference: bool = True


class ScanConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    v0: list[float] = Field(min_length=1)
    length: list[float] = Field(min_length=1)
    packet_gap: float | None = Field(
        default=None, gt=0, description="place the packet at x0 = -(L/2 + gap) for each width"
    )


class DeltaCheckConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    energy: float = 1.02
    parity: Literal["even", "odd", "any"] = "even"


class Scenario(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "scenario"
    grid: GridConfig
    units: Units = Units()
    potential: Potential
    packet: PacketSpec
    times: list[float] | TimeRange
    observables: ObservableFlags = ObservableFlags()
    scan: ScanConfig | None = None
    delta_check: DeltaCheckConfig = DeltaCheckConfig()
    olc_denominator: Literal["total", "transmitted"] = "total"

    @property
    def time_list(self) -> list[float]:
        return self.times.values() if isinstance(self.times, TimeRange) else list(self.times)

    def make_grid(self) -> Grid:
        return make_grid(self.grid.x_min, self.grid.x_max, self.grid.n_points)


def scan_packet(scenario: Scenario, length: float) -> PacketSpec:
    """Packet used at one scan width; the gap rule keeps its distance to the barrier fixed."""
    scan = scenario.scan
    if scan is None or scan.packet_gap is None:
        return scenario.packet
    return scenario.packet.model_copy(update={"x0": -(0.5 * length + scan.packet_gap)})


def _grid_problems(grid_cfg: GridConfig) -> list[tuple[str, str]]:
    problems: list[tuple[str, str]] = []
    if not grid_cfg.x_max > grid_cfg.x_min:
        problems.append(("grid.x_max", f"must exceed grid.x_min ({grid_cfg.x_min})"))
    if grid_cfg.n_points % 2 != 0:
        problems.append(("grid.n_points", "must be even"))
    if grid_cfg.n_points > MAX_POINTS:
        problems.append(("grid.n_points", f"dense diagonalization is capped at {MAX_POINTS} nodes"))
    return problems


def _time_problems(times: list[float]) -> list[tuple[str, str]]:
    if not times:
        return [("times", "at least one time is required")]
    if any(b < a for a, b in zip(times, times[1:])):
        return [("times", "must be sorted ascending")]
    return []


def cross_check(scenario: Scenario) -> list[tuple[str, str]]:
    problems = _grid_problems(scenario.grid) + _time_problems(scenario.time_list)
    if problems:
        # the remaining checks need a valid grid
        return problems
    grid = scenario.make_grid()
    for msg in support_problems(scenario.packet, grid):
        problems.append(("packet", msg))

    if scenario.scan is not None:
        if isinstance(scenario.potential, NarrowDelta):
            problems.append(("scan.length", "a narrow delta barrier cannot be scanned over widths"))
        for i, v0 in enumerate(scenario.scan.v0):
            if v0 < 0:
                problems.append((f"scan.v0.{i}", "only repulsive barriers (v0 >= 0) are supported"))
        for i, length in enumerate(scenario.scan.length):
            if length <= 0:
                problems.append((f"scan.length.{i}", "must be positive"))
                continue
            for msg in support_problems(scan_packet(scenario, length), grid):
                problems.append((f"scan.length.{i}", msg))
    return problems


_TIMES: TypeAdapter[list[float] | TimeRange] = TypeAdapter(list[float] | TimeRange)


def partial_cross_check(data: dict[str, Any]) -> list[tuple[str, str]]:
    """Cross-checks on the sections that parse on their own, for a scenario with schema errors."""
    problems: list[tuple[str, str]] = []
    grid_cfg = _parse_section(GridConfig, data.get("grid"))
    if grid_cfg is not None:
        problems += _grid_problems(grid_cfg)
    times = _parse_section(_TIMES, data.get("times"))
    if times is not None:
        problems += _time_problems(times.values() if isinstance(times, TimeRange) else list(times))
    packet = _parse_section(PacketSpec, data.get("packet"))
    if grid_cfg is not None and packet is not None and not _grid_problems(grid_cfg):
        grid = make_grid(grid_cfg.x_min, grid_cfg.x_max, grid_cfg.n_points)
        problems += [("packet", msg) for msg in support_problems(packet, grid)]
    return problems


def _parse_section(model: Any, raw: Any) -> Any:
    adapter = model if isinstance(model, TypeAdapter) else TypeAdapter(model)
    try:
        return adapter.validate_python(raw)
    except ValidationError:
        return None


def time_step_warnings(scenario: Scenario) -> list[str]:
    """
    Time steps that are not whole multiples of dx/c. The light cone then moves across the nodes
    unevenly and the OLC series picks up a sawtooth from the node-inclusion rule.
    """
    if not (scenario.observables.olc or scenario.scan is not None):
        return []
    times = scenario.time_list
    cone_step = scenario.make_grid().dx / scenario.units.c
    for a, b in zip(times, times[1:]):
        ratio = (b - a) / cone_step
        if abs(ratio - round(ratio)) > 1e-6:
            return [
                f"time step {b - a} is not a multiple of dx/c = {cone_step}; "
                "expect lattice artifacts in the OLC series"
            ]
    return []


def _set_path(data: dict[str, Any], dotted: str, value: Any) -> None:
    node = data
    keys = dotted.split(".")
    for key in keys[:-1]:
        child = node.get(key)
        if not isinstance(child, dict):
            child = {}
            node[key] = child
        node = child
    node[keys[-1]] = value


def apply_overrides(data: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Apply `key.path=value` overrides; values are parsed as YAML scalars or lists."""
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigurationError("bad override", [(item, "expected key.path=value")])
        _set_path(data, key.strip(), yaml.safe_load(raw))
    return data


def validate_scenario(data: dict[str, Any]) -> Scenario:
    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as e:
        problems = [(".".join(str(p) for p in err["loc"]) or "<root>", err["msg"]) for err in e.errors()]
        problems += [p for p in partial_cross_check(data) if p not in problems]
        raise ConfigurationError("invalid scenario", problems) from e
    problems = cross_check(scenario)
    if problems:
        raise ConfigurationError("invalid scenario", problems)
    for msg in time_step_warnings(scenario):
        logger.warning(msg)
    return scenario


def load_scenario(path: str | os.PathLike[str], overrides: list[str] | None = None) -> Scenario:
    logger.info(f"Loading scenario from {path}...")
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError("unreadable scenario", [("<root>", str(e))]) from e
    if not isinstance(data, dict):
        raise ConfigurationError("invalid scenario", [("<root>", "expected a mapping")])
    data.setdefault("name", Path(path).stem)
    return validate_scenario(apply_overrides(data, overrides or []))
