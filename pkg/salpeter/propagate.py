"""
Time evolution of momentum-space wavepackets.

Spectral: psi(t, p_i) = sum_n phi_n(p_i) exp(-i eps_n t) c_n,  c_n = sum_j phi_n*(p_j) psi0(p_j) dp
Free:     psi(t, p_k) = exp(-i E(p_k) t) psi0(p_k)
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from joblib import Parallel, delayed  # type: ignore

from salpeter.errors import ConfigurationError, ShapeError
from salpeter.grid import Grid, to_momentum, to_position
from salpeter.kernel import EigenBasis, dispersion
from salpeter.types import ComplexArray, FloatArray, Representation, Units, Wavepacket

logger = logging.getLogger(__name__)


def _as_momentum(psi: Wavepacket, g: Grid) -> Wavepacket:
    if psi.grid != g:
        raise ShapeError(f"wavepacket grid {psi.grid} does not match {g}")
    if psi.rep is Representation.POSITION:
        return to_momentum(psi, g)
    if psi.amps.shape != (g.n_points,):
        raise ShapeError(f"amplitude shape {psi.amps.shape} does not match grid of {g.n_points} nodes")
    return psi


@dataclass(frozen=True, eq=False)
class SpectralEvolution:
    """Evolution in a barrier eigenbasis; expansion coefficients are computed once."""

    basis: EigenBasis
    psi0: Wavepacket

    @cached_property
    def initial(self) -> Wavepacket:
        return _as_momentum(self.psi0, self.basis.grid)

    @cached_property
    def coefficients(self) -> ComplexArray:
        return self.basis.vecs.conj().T @ self.initial.amps * self.basis.grid.dp

    @property
    def grid(self) -> Grid:
        return self.basis.grid

    def at(self, t: float) -> Wavepacket:
        phases = np.exp(-1j * self.basis.eps * t)
        amps = self.basis.vecs @ (phases * self.coefficients)
        return Wavepacket(amps, Representation.MOMENTUM, self.grid, self.initial.time + t)


@dataclass(frozen=True, eq=False)
class FreeEvolution:
    grid: Grid
    psi0: Wavepacket
    units: Units

    @cached_property
    def initial(self) -> Wavepacket:
        return _as_momentum(self.psi0, self.grid)

    @cached_property
    def energies(self) -> FloatArray:
        return dispersion(self.grid.p_nodes, self.units)

    def at(self, t: float) -> Wavepacket:
        amps = np.exp(-1j * self.energies * t) * self.initial.amps
        return Wavepacket(amps, Representation.MOMENTUM, self.grid, self.initial.time + t)


Evolution = SpectralEvolution | FreeEvolution


def spectral_propagate(basis: EigenBasis, psi0: Wavepacket, t: float) -> Wavepacket:
    return SpectralEvolution(basis, psi0).at(t)


def free_propagate(g: Grid, psi0: Wavepacket, t: float, u: Units) -> Wavepacket:
    return FreeEvolution(g, psi0, u).at(t)


def make_evolution(source: EigenBasis | Units, psi0: Wavepacket) -> Evolution:
    """Barrier evolution for an eigenbasis, free evolution for bare units."""
    if isinstance(source, EigenBasis):
        return SpectralEvolution(source, psi0)
    return FreeEvolution(psi0.grid, psi0, source)


def check_times(times: Sequence[float]) -> None:
    if len(times) == 0:
        raise ConfigurationError("at least one time is required")
    if any(b < a for a, b in zip(times, times[1:])):
        raise ConfigurationError("times must be sorted ascending")


def evolve_series(
    source: EigenBasis | Units | Evolution,
    psi0: Wavepacket | None,
    times: Sequence[float],
    n_jobs: int = 1,
) -> list[Wavepacket]:
    """Position-space snapshots at every time in `times`."""
    check_times(times)
    if isinstance(source, (SpectralEvolution, FreeEvolution)):
        evolution = source
    else:
        if psi0 is None:
            raise ConfigurationError("an initial wavepacket is required")
        evolution = make_evolution(source, psi0)
    # touch the cached coefficients before fanning out to threads
    _ = evolution.initial
    if isinstance(evolution, SpectralEvolution):
        _ = evolution.coefficients

    def snapshot(t: float) -> Wavepacket:
        return to_position(evolution.at(t), evolution.grid)

    if n_jobs == 1:
        return [snapshot(t) for t in times]
    return list(Parallel(n_jobs=n_jobs, prefer="threads")(delayed(snapshot)(t) for t in times))
