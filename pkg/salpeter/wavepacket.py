"""
Compact-support cos^8 initial state.

    psi(0, x) = cos^8[pi (x - x0) / delta_x] * exp(i p0 x)   on [x0 - delta_x/2, x0 + delta_x/2]

The eighth power keeps the momentum distribution narrow while the support stays compact.
"""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from salpeter.errors import ConfigurationError
from salpeter.grid import Grid
from salpeter.types import Representation, Wavepacket

logger = logging.getLogger(__name__)

MIN_SUPPORT_NODES = 16


class PacketSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    x0: float = Field(description="mean position")
    p0: float = Field(description="mean momentum")
    delta_x: float = Field(gt=0, description="width of the compact support")


def support_edges(spec: PacketSpec) -> tuple[float, float]:
    half = 0.5 * spec.delta_x
    return spec.x0 - half, spec.x0 + half


def support_problems(spec: PacketSpec, g: Grid) -> list[str]:
    """Reasons `spec` cannot be sampled on `g`; empty when it can."""
    problems: list[str] = []
    left, right = support_edges(spec)
    if not (g.x_min < left and right < g.x_max):
        problems.append(f"support [{left}, {right}] is clipped by the box [{g.x_min}, {g.x_max})")
    nodes = spec.delta_x / g.dx
    if nodes < MIN_SUPPORT_NODES:
        problems.append(
            f"support of width {spec.delta_x} spans {nodes:.1f} nodes, at least {MIN_SUPPORT_NODES} needed"
        )
    return problems


def cos8_packet(spec: PacketSpec, g: Grid) -> Wavepacket:
    problems = support_problems(spec, g)
    if problems:
        raise ConfigurationError("packet does not fit the grid", [("packet", p) for p in problems])

    x = g.x_nodes
    left, right = support_edges(spec)
    inside = (x >= left) & (x <= right)
    envelope = np.where(inside, np.cos(math.pi * (x - spec.x0) / spec.delta_x) ** 8, 0.0)
    # cos(pi/2) is only zero up to rounding; pin the support edges exactly
    envelope[np.isclose(np.abs(x - spec.x0), 0.5 * spec.delta_x, rtol=0.0, atol=1e-12)] = 0.0
    amps = envelope * np.exp(1j * spec.p0 * x)
    psi = Wavepacket(amps.astype(np.complex128), Representation.POSITION, g, 0.0)
    return psi.normalized()


def mean_position(psi: Wavepacket) -> float:
    if psi.rep is not Representation.POSITION:
        raise ConfigurationError("mean_position needs a position-space wavepacket")
    density = psi.density
    return float(np.sum(psi.grid.x_nodes * density) / np.sum(density))


def mean_momentum(psi: Wavepacket) -> float:
    if psi.rep is not Representation.MOMENTUM:
        raise ConfigurationError("mean_momentum needs a momentum-space wavepacket")
    density = psi.density
    return float(np.sum(psi.grid.p_nodes * density) / np.sum(density))
