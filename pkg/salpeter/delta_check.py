"""
Narrow-barrier validation.

For a barrier of vanishing width at fixed V0*L the eigenfunctions take the shape
1/(eps_n - E(p)) times an undetermined constant, so a numerical eigenvector is compared
with that shape after a least-squares complex rescale.
"""

import logging
from dataclasses import dataclass

import numpy as np

from salpeter.grid import Grid
from salpeter.kernel import EigenBasis, delta_limit_eigenfunction, select_state
from salpeter.types import ComplexArray, Units

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DeltaComparison:
    index: int
    eps_n: float
    rel_l2_error: float
    scale: complex  # fitted global factor of the pole shape


def fit_global_scale(shape: ComplexArray, target: ComplexArray) -> tuple[complex, float]:
    """scale = <shape, target>/<shape, shape> and the relative L2 residual of scale*shape."""
    scale = complex(np.vdot(shape, target) / np.vdot(shape, shape))
    residual = np.linalg.norm(target - scale * shape) / np.linalg.norm(target)
    return scale, float(residual)


def compare_to_delta_limit(basis: EigenBasis, n: int, g: Grid, u: Units) -> DeltaComparison:
    eps_n = float(basis.eps[n])
    shape = delta_limit_eigenfunction(eps_n, g, u).astype(np.complex128)
    scale, residual = fit_global_scale(shape, basis.vecs[:, n])
    logger.info(f"Delta-limit fit for state {n} (eps={eps_n:.6f}): relative L2 residual {residual:.3e}")
    return DeltaComparison(index=n, eps_n=eps_n, rel_l2_error=residual, scale=scale)


def compare_near_energy(basis: EigenBasis, energy: float, u: Units) -> DeltaComparison:
    """Compare the even state closest to `energy`; odd states do not couple to a delta barrier."""
    n = select_state(basis, energy, "even")
    return compare_to_delta_limit(basis, n, basis.grid, u)
