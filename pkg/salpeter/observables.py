"""
Diagnostics on position-space snapshots: region masses, transmission, the transmitted
packet's mean and peak, and the outside-the-light-cone (OLC) fraction.

All region sums are left-endpoint Riemann sums over lower <= x_j < upper, consistent with the
norm convention of the grid.
"""

import logging
from collections.abc import Callable, Sequence
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from salpeter.errors import ArgumentError, ConfigurationError, UndefinedObservableError
from salpeter.potential import NarrowDelta, Potential, Rectangular, SmoothTanh, eval_position
from salpeter.types import ObservableRecord, OlcRecord, RegionProbability, Representation, Units, Wavepacket

logger = logging.getLogger(__name__)

MIN_TRANSMITTED_MASS = 1e-12
CUT_LEVEL = 1e-3
EDGE_NODES = 5

Denominator = Literal["total", "transmitted"]


def _require_position(psi: Wavepacket) -> None:
    if psi.rep is not Representation.POSITION:
        raise ConfigurationError(f"observables need a position-space wavepacket, got {psi.rep}")


def region_mass(psi: Wavepacket, a: float, b: float) -> RegionProbability:
    _require_position(psi)
    g = psi.grid
    if not a < b:
        raise ArgumentError(f"region bounds must satisfy a < b, got [{a}, {b})")
    lower, upper = max(a, g.x_min), min(b, g.x_max)
    clipped = (lower, upper) != (a, b)
    if clipped:
        logger.debug(f"Region [{a}, {b}) clipped to the box [{lower}, {upper})")
    x = g.x_nodes
    mask = (x >= lower) & (x < upper)
    mass = float(np.sum(psi.density[mask]) * g.dx)
    return RegionProbability(lower=lower, upper=upper, mass=mass, clipped=clipped)


def transmitted_cut(v: Potential) -> float:
    """Right-hand position beyond which the packet counts as transmitted."""
    match v:
        case Rectangular(length=length):
            return 0.5 * length
        case SmoothTanh(v0=v0, length=length, alpha=alpha):
            if v0 == 0:
                return 0.5 * length
            level = CUT_LEVEL * v0

            def excess(x: float) -> float:
                return float(eval_position(v, x)) - level

            lo, hi = 0.5 * length, 0.5 * length + 50.0 / alpha
            # a soft barrier can already sit below the level at its nominal edge
            if excess(lo) <= 0:
                return lo
            if excess(hi) > 0:
                raise ConfigurationError(f"barrier tail stays above {level} beyond x={hi}")
            return float(brentq(excess, lo, hi, xtol=1e-14))
        case NarrowDelta():
            return 0.0


def transmission(psi: Wavepacket, x_cut: float) -> float:
    return region_mass(psi, x_cut, psi.grid.x_max)["mass"]


def reflection(psi: Wavepacket, x_cut: float) -> float:
    """Mass left of the mirrored cut -x_cut."""
    return region_mass(psi, psi.grid.x_min, -x_cut)["mass"]


def light_cone(left: float, right: float, t: float, u: Units) -> tuple[float, float]:
    return left - u.c * t, right + u.c * t


def olc_fraction(
    psi: Wavepacket,
    right_edge: float,
    t: float,
    u: Units,
    denominator: Denominator = "total",
    x_cut: float | None = None,
) -> OlcRecord:
    """
    Probability beyond the forward light cone right_edge + c*t.

    With the transmitted denominator only mass beyond max(cone, x_cut) counts and it is divided by
    the transmitted mass; `undefined` is set when that mass vanishes.
    """
    _require_position(psi)
    g = psi.grid
    cone = right_edge + u.c * t
    record = OlcRecord(t=t, light_cone_pos=cone, fraction=0.0, out_of_window=False)
    if cone >= g.x_max:
        record["out_of_window"] = True
        return record

    if denominator == "total":
        record["fraction"] = region_mass(psi, cone, g.x_max)["mass"]
        return record

    if x_cut is None:
        raise ArgumentError("the transmitted denominator needs x_cut")
    transmitted = transmission(psi, x_cut)
    if transmitted <= MIN_TRANSMITTED_MASS:
        record["undefined"] = True
        return record
    beyond = region_mass(psi, max(cone, x_cut), g.x_max)["mass"]
    record["fraction"] = min(beyond / transmitted, 1.0)
    return record


def olc_series(
    snapshots: Sequence[Wavepacket],
    right_edge: float,
    u: Units,
    denominator: Denominator = "total",
    x_cut: float | None = None,
    t0: float = 0.0,
) -> list[OlcRecord]:
    """One record per snapshot, time measured from t0 (the preparation time)."""
    records = [olc_fraction(psi, right_edge, psi.time - t0, u, denominator, x_cut) for psi in snapshots]
    stamps = [r["t"] for r in records]
    if any(b < a for a, b in zip(stamps, stamps[1:])):
        raise ConfigurationError("snapshots must be ordered in time")
    return records


def olc_global_max(series: Sequence[OlcRecord]) -> tuple[float, float]:
    if not series:
        raise ArgumentError("cannot take the maximum of an empty OLC series")
    best = series[0]
    for record in series[1:]:
        # strict comparison keeps the first occurrence on ties
        if record["fraction"] > best["fraction"]:
            best = record
    return best["t"], best["fraction"]


def _transmitted_part(psi: Wavepacket, x_cut: float) -> tuple[np.ndarray, np.ndarray]:
    _require_position(psi)
    x = psi.grid.x_nodes
    mask = x > x_cut
    xs, density = x[mask], psi.density[mask]
    if np.sum(density) * psi.grid.dx <= MIN_TRANSMITTED_MASS:
        raise UndefinedObservableError(
            f"no transmitted mass beyond x_cut={x_cut}",
            {"mass": float(np.sum(density) * psi.grid.dx)},
        )
    return xs, density


def conditional_mean_position(psi: Wavepacket, x_cut: float) -> float:
    xs, density = _transmitted_part(psi, x_cut)
    return float(np.sum(xs * density) / np.sum(density))


def peak_position(psi: Wavepacket, x_cut: float) -> float:
    xs, density = _transmitted_part(psi, x_cut)
    # argmax returns the first maximum, i.e. the smallest x on ties
    return float(xs[int(np.argmax(density))])


def edge_mass(psi: Wavepacket, nodes: int = EDGE_NODES) -> float:
    """Mass within `nodes` lattice sites of either box edge."""
    _require_position(psi)
    density = psi.density
    return float((np.sum(density[:nodes]) + np.sum(density[-nodes:])) * psi.grid.dx)


def _defined(fn: Callable[[Wavepacket, float], float], psi: Wavepacket, x_cut: float) -> float | None:
    try:
        return fn(psi, x_cut)
    except UndefinedObservableError:
        return None


def observable_series(
    snapshots: Sequence[Wavepacket],
    x_cut: float,
    right_edge: float,
    u: Units,
    denominator: Denominator = "total",
    t0: float = 0.0,
) -> list[ObservableRecord]:
    records: list[ObservableRecord] = []
    for psi in snapshots:
        t = psi.time - t0
        olc = olc_fraction(psi, right_edge, t, u, denominator, x_cut)
        records.append(
            ObservableRecord(
                t=t,
                norm=psi.norm(),
                transmission=transmission(psi, x_cut),
                reflection=reflection(psi, x_cut),
                conditional_mean=_defined(conditional_mean_position, psi, x_cut),
                peak_position=_defined(peak_position, psi, x_cut),
                olc_fraction=olc["fraction"],
            )
        )
    return records


def local_maxima(values: Sequence[float], min_height: float = 0.0) -> list[int]:
    """Interior indices i with values[i-1] < values[i] >= values[i+1] and values[i] > min_height."""
    return [
        i
        for i in range(1, len(values) - 1)
        if values[i - 1] < values[i] >= values[i + 1] and values[i] > min_height
    ]
