"""
Repulsive barrier family centred at x = 0.

Momentum-transfer elements follow

    V(q) = (1/sqrt(2*pi)) * integral dx V(x) exp(i q x),   q = p - p'

which is real and even for these barriers.
"""

import logging
import math
from typing import Annotated, Any, Literal

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter

from salpeter.errors import UnsupportedOperationError
from salpeter.types import ComplexArray, FloatArray

logger = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)


class Rectangular(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["rectangular"] = "rectangular"
    v0: float = Field(ge=0, description="barrier height; only repulsive barriers are supported")
    length: float = Field(gt=0)


class SmoothTanh(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["smooth_tanh"] = "smooth_tanh"
    v0: float = Field(ge=0)
    length: float = Field(gt=0)
    alpha: float = Field(gt=0, description="edge smoothness (inverse length)")


class NarrowDelta(BaseModel):
    """Zero-width limit of a barrier with fixed strength g = V0*L."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["narrow_delta"] = "narrow_delta"
    g: float = Field(ge=0)


Potential = Annotated[Rectangular | SmoothTanh | NarrowDelta, Field(discriminator="kind")]


def eval_position(v: Potential, x: ArrayLike) -> FloatArray:
    xs = np.asarray(x, dtype=np.float64)
    match v:
        case Rectangular(v0=v0, length=length):
            half = 0.5 * length
            inside = np.where(np.abs(xs) < half, v0, 0.0)
            return np.where(np.abs(xs) == half, 0.5 * v0, inside)
        case SmoothTanh(v0=v0, length=length, alpha=alpha):
            half = 0.5 * length
            return 0.5 * v0 * (np.tanh(alpha * (xs + half)) - np.tanh(alpha * (xs - half)))
        case NarrowDelta():
            raise UnsupportedOperationError("a narrow delta barrier has no pointwise value; use momentum_element")


def _u_over_sinh(u: FloatArray) -> FloatArray:
    au = np.abs(u)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ratio = au / np.sinh(au)
    # sinh overflows to inf for large |u|, which correctly sends the ratio to 0
    return np.where(au < 1e-8, 1.0 - au**2 / 6.0, ratio)


def momentum_element(v: Potential, q: ArrayLike) -> ComplexArray:
    """V(q) for momentum transfer q. np.sinc(z) = sin(pi z)/(pi z) handles q -> 0."""
    qs = np.asarray(q, dtype=np.float64)
    match v:
        case Rectangular(v0=v0, length=length):
            values = v0 * length / SQRT_2PI * np.sinc(qs * length / (2.0 * math.pi))
        case SmoothTanh(v0=v0, length=length, alpha=alpha):
            u = math.pi * qs / (2.0 * alpha)
            values = v0 * length / SQRT_2PI * np.sinc(qs * length / (2.0 * math.pi)) * _u_over_sinh(u)
        case NarrowDelta(g=g):
            values = np.full_like(qs, g / SQRT_2PI)
    return values.astype(np.complex128)


def with_height(v: Potential, v0: float) -> Potential:
    """Same barrier shape with another height (strength g for the delta)."""
    if isinstance(v, NarrowDelta):
        return v.model_copy(update={"g": v0})
    return v.model_copy(update={"v0": v0})


def with_width(v: Potential, length: float) -> Potential:
    if isinstance(v, NarrowDelta):
        raise UnsupportedOperationError("a narrow delta barrier has no width")
    return v.model_copy(update={"length": length})


def describe(v: Potential) -> str:
    return ", ".join(f"{k}={val}" for k, val in v.model_dump().items())


_POTENTIAL_ADAPTER: TypeAdapter[Potential] = TypeAdapter(Potential)


def parse_potential(data: dict[str, Any]) -> Potential:
    return _POTENTIAL_ADAPTER.validate_python(data)
