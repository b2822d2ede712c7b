"""
Conjugate position/momentum lattices and the unitary transforms between them.

The position nodes are x_j = x_min + j*dx (j = 0..N-1) and the momentum nodes are
p_k = (k - N/2)*dp, with dp = 2*pi/(x_max - x_min) so that dx*dp*N = 2*pi.
The transforms are Riemann sums of the continuum pair

    psi(p) = (1/sqrt(2*pi)) * integral dx exp(-i p x) psi(x)
    psi(x) = (1/sqrt(2*pi)) * integral dp exp(+i p x) psi(p)

evaluated with the actual node coordinates, so they are unitary in the weighted
norms sum |psi(x_j)|^2 dx and sum |psi(p_k)|^2 dp.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft

from salpeter.errors import ConfigurationError, ShapeError
from salpeter.types import ComplexArray, FloatArray, Representation, Wavepacket

logger = logging.getLogger(__name__)

MIN_POINTS = 4


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n_points: int

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def dp(self) -> float:
        return 2.0 * math.pi / self.length

    @cached_property
    def x_nodes(self) -> FloatArray:
        return self.x_min + np.arange(self.n_points) * self.dx

    @cached_property
    def p_nodes(self) -> FloatArray:
        return (np.arange(self.n_points) - self.n_points // 2) * self.dp

    @cached_property
    def _offset_phase(self) -> ComplexArray:
        # exp(-i p_k x_min): moves the FFT origin from index 0 to x_min
        return np.exp(-1j * self.p_nodes * self.x_min)

    @cached_property
    def _alternating(self) -> FloatArray:
        # (-1)^j: moves the FFT frequency origin to the centre of the p lattice
        return np.where(np.arange(self.n_points) % 2 == 0, 1.0, -1.0)

    def mirror_index(self) -> np.ndarray:
        """Index of -p_k for every node; the unpaired endpoint -N/2*dp maps to itself."""
        idx = (self.n_points - np.arange(self.n_points)) % self.n_points
        idx[0] = 0
        return idx


def make_grid(x_min: float, x_max: float, n_points: int) -> Grid:
    if not x_max > x_min:
        raise ConfigurationError(f"x_max ({x_max}) must exceed x_min ({x_min})")
    if n_points % 2 != 0:
        raise ConfigurationError(f"n_points must be even, got {n_points}")
    if n_points < MIN_POINTS:
        raise ConfigurationError(f"n_points must be at least {MIN_POINTS}, got {n_points}")
    grid = Grid(float(x_min), float(x_max), int(n_points))
    logger.debug(f"Grid [{grid.x_min}, {grid.x_max}) N={grid.n_points} dx={grid.dx:.6g} dp={grid.dp:.6g}")
    return grid


def _check(psi: Wavepacket, g: Grid, rep: Representation) -> None:
    if psi.rep is not rep:
        raise ShapeError(f"expected a {rep} wavepacket, got {psi.rep}")
    if psi.amps.shape != (g.n_points,):
        raise ShapeError(f"amplitude shape {psi.amps.shape} does not match grid of {g.n_points} nodes")


def to_momentum(psi: Wavepacket, g: Grid) -> Wavepacket:
    _check(psi, g, Representation.POSITION)
    scale = g.dx / math.sqrt(2.0 * math.pi)
    amps = scale * g._offset_phase * fft.fft(g._alternating * psi.amps)
    return Wavepacket(amps.astype(np.complex128), Representation.MOMENTUM, g, psi.time)


def to_position(psi: Wavepacket, g: Grid) -> Wavepacket:
    _check(psi, g, Representation.MOMENTUM)
    scale = g.dp * g.n_points / math.sqrt(2.0 * math.pi)
    amps = scale * g._alternating * fft.ifft(np.conj(g._offset_phase) * psi.amps)
    return Wavepacket(amps.astype(np.complex128), Representation.POSITION, g, psi.time)


def columns_to_position(values: ComplexArray, g: Grid) -> ComplexArray:
    """Column-wise transform of a stack of momentum-space vectors to position space."""
    scale = g.dp * g.n_points / math.sqrt(2.0 * math.pi)
    shifted = np.conj(g._offset_phase)[:, None] * values
    return scale * g._alternating[:, None] * fft.ifft(shifted, axis=0)
