import logging
from collections.abc import Sequence
from typing import TypedDict

from joblib import Parallel, delayed  # type: ignore

from salpeter.cache import EigenCache
from salpeter.grid import Grid
from salpeter.observables import Denominator, olc_global_max, olc_series, transmitted_cut
from salpeter.potential import Potential, with_height, with_width
from salpeter.propagate import evolve_series
from salpeter.types import OlcRecord, Units
from salpeter.wavepacket import PacketSpec, cos8_packet, support_edges

logger = logging.getLogger(__name__)


class ScanPoint(TypedDict):
    length: float
    v0: float
    t_max: float
    olc_max: float
    free_t_max: float
    free_olc_max: float


def olc_run(
    grid: Grid,
    potential: Potential | None,
    units: Units,
    packet: PacketSpec,
    times: Sequence[float],
    cache: EigenCache,
    denominator: Denominator = "total",
) -> list[OlcRecord]:
    """OLC series of one packet; `potential=None` gives free propagation."""
    psi0 = cos8_packet(packet, grid)
    _, right = support_edges(packet)
    if potential is None:
        snapshots = evolve_series(units, psi0, times)
        x_cut = 0.0
    else:
        basis = cache.load_or_solve(grid, potential, units)
        snapshots = evolve_series(basis, psi0, times)
        x_cut = transmitted_cut(potential)
    return olc_series(snapshots, right, units, denominator, x_cut)


def olc_scan(
    grid: Grid,
    base: Potential,
    units: Units,
    packets: dict[float, PacketSpec],
    v0s: Sequence[float],
    times: Sequence[float],
    cache: EigenCache,
    denominator: Denominator = "total",
    n_jobs: int = 1,
) -> list[ScanPoint]:
    """
    Global OLC maximum over (width, height). `packets` maps each width to the packet used there;
    the free baseline of that packet is reported on every row.
    """
    lengths = list(packets)
    free_max = {}
    for length in lengths:
        # the free baseline has no barrier, so only the total denominator applies
        free_max[length] = olc_global_max(olc_run(grid, None, units, packets[length], times, cache))

    def point(length: float, v0: float) -> ScanPoint:
        potential = with_height(with_width(base, length), v0)
        logger.info(f"Scan point L={length} V0={v0}")
        t_max, f_max = olc_global_max(olc_run(grid, potential, units, packets[length], times, cache, denominator))
        free_t, free_f = free_max[length]
        return ScanPoint(length=length, v0=v0, t_max=t_max, olc_max=f_max, free_t_max=free_t, free_olc_max=free_f)

    jobs = [(length, v0) for length in lengths for v0 in v0s]
    return list(Parallel(n_jobs=n_jobs, prefer="threads")(delayed(point)(length, v0) for length, v0 in jobs))
