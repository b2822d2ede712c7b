from dataclasses import dataclass, replace
from enum import StrEnum
from typing import TYPE_CHECKING, Literal, NotRequired, TypedDict

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

if TYPE_CHECKING:
    from salpeter.grid import Grid

ComplexArray = NDArray[np.complex128]
FloatArray = NDArray[np.float64]


class Units(BaseModel):
    """Natural units. hbar is pinned to 1 by the lattice convention dp = 2*pi/(x_max - x_min)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    hbar: Literal[1] = 1
    c: float = Field(default=1.0, gt=0)
    mass: float = Field(default=1.0, gt=0)

    @property
    def rest_energy(self) -> float:
        return self.mass * self.c**2


class Representation(StrEnum):
    POSITION = "position"
    MOMENTUM = "momentum"


@dataclass(frozen=True, eq=False)
class Wavepacket:
    """Amplitudes on one of the two lattices of `grid`, tagged with the time they belong to."""

    amps: ComplexArray
    rep: Representation
    grid: "Grid"
    time: float = 0.0

    @property
    def step(self) -> float:
        return self.grid.dx if self.rep is Representation.POSITION else self.grid.dp

    @property
    def nodes(self) -> FloatArray:
        return self.grid.x_nodes if self.rep is Representation.POSITION else self.grid.p_nodes

    @property
    def density(self) -> FloatArray:
        return np.abs(self.amps) ** 2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.density) * self.step))

    def normalized(self) -> "Wavepacket":
        return replace(self, amps=self.amps / self.norm())


class RegionProbability(TypedDict):
    """Probability mass on lower <= x_j < upper."""

    lower: float
    upper: float
    mass: float
    clipped: bool  # requested bounds reached outside the box


class OlcRecord(TypedDict):
    t: float
    light_cone_pos: float
    fraction: float
    out_of_window: bool  # light cone already past x_max
    undefined: NotRequired[bool]  # transmitted denominator vanished


class ObservableRecord(TypedDict):
    t: float
    norm: float
    transmission: float
    reflection: float
    conditional_mean: float | None
    peak_position: float | None
    olc_fraction: float
