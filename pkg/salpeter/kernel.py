"""
Momentum-space Hamiltonian on the Nystrom nodes and its full eigen-decomposition.

The integral eigen-equation

    eps * phi(p) = E(p) phi(p) + (1/sqrt(2*pi)) * integral dp' V(p - p') phi(p')

sampled on the p lattice becomes M phi = eps phi with

    M_ij = E(p_i) delta_ij + dp * V(p_i - p_j) / sqrt(2*pi).
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike

from salpeter.errors import NumericalError, SingularityError
from salpeter.grid import Grid, columns_to_position
from salpeter.potential import Potential, momentum_element
from salpeter.types import ComplexArray, FloatArray, Units

logger = logging.getLogger(__name__)

POLE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    m: ComplexArray
    grid: Grid


@dataclass(frozen=True, eq=False)
class EigenBasis:
    """eps ascending; vecs[:, n] is phi_n(p_i), normalized so sum |phi_n|^2 dp = 1."""

    eps: FloatArray
    vecs: ComplexArray
    grid: Grid

    def __len__(self) -> int:
        return self.eps.shape[0]

    def orthonormality_residual(self) -> float:
        gram = self.vecs.conj().T @ self.vecs * self.grid.dp
        return float(np.max(np.abs(gram - np.eye(len(self)))))

    def completeness_residual(self) -> float:
        # sum_n phi_n(p_i) phi_n*(p_j) = delta_ij / dp
        outer = self.vecs @ self.vecs.conj().T * self.grid.dp
        return float(np.max(np.abs(outer - np.eye(len(self)))))

    def nearest(self, energy: float) -> int:
        return int(np.argmin(np.abs(self.eps - energy)))


def dispersion(p: ArrayLike, u: Units) -> FloatArray:
    ps = np.asarray(p, dtype=np.float64)
    return np.sqrt(ps**2 * u.c**2 + u.rest_energy**2)


def build_hamiltonian(g: Grid, v: Potential, u: Units) -> HamiltonianMatrix:
    # V(p_i - p_j) only depends on i - j on the uniform lattice
    steps = np.arange(g.n_points) * g.dp
    scale = g.dp / math.sqrt(2.0 * math.pi)
    column = scale * momentum_element(v, steps)
    row = scale * momentum_element(v, -steps)
    upper = np.triu(scipy.linalg.toeplitz(column, row))
    # mirror the upper triangle so Hermiticity holds exactly
    m = upper + np.triu(upper, 1).conj().T
    m[np.diag_indices_from(m)] += dispersion(g.p_nodes, u)
    return HamiltonianMatrix(m.astype(np.complex128), g)


def _fix_phases(vecs: ComplexArray) -> ComplexArray:
    """Rotate each column so its largest-magnitude component is real positive."""
    lead = np.argmax(np.abs(vecs), axis=0)
    pivots = vecs[lead, np.arange(vecs.shape[1])]
    return vecs * (np.abs(pivots) / pivots)[None, :]


def diagonalize(h: HamiltonianMatrix) -> EigenBasis:
    try:
        eps, vecs = scipy.linalg.eigh(h.m, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        diagnostics = {
            "n": h.m.shape[0],
            "frobenius_norm": float(np.linalg.norm(h.m)),
            "hermiticity_defect": float(np.max(np.abs(h.m - h.m.conj().T))),
            "finite": bool(np.all(np.isfinite(h.m))),
        }
        logger.error(f"Eigensolver failed: {e}")
        raise NumericalError(f"Hermitian eigensolver did not converge: {e}", diagnostics) from e
    vecs = _fix_phases(vecs) / math.sqrt(h.grid.dp)
    return EigenBasis(eps.astype(np.float64), vecs.astype(np.complex128), h.grid)


def solve(g: Grid, v: Potential, u: Units) -> EigenBasis:
    basis = diagonalize(build_hamiltonian(g, v, u))
    logger.info(f"Diagonalized N={g.n_points}: eps in [{basis.eps[0]:.6g}, {basis.eps[-1]:.6g}]")
    return basis


def delta_limit_eigenfunction(eps_n: float, g: Grid, u: Units) -> FloatArray:
    """Unnormalized narrow-barrier shape 1/(eps_n - E(p_i))."""
    energies = dispersion(g.p_nodes, u)
    gaps = eps_n - energies
    worst = int(np.argmin(np.abs(gaps)))
    if abs(gaps[worst]) < POLE_TOLERANCE:
        raise SingularityError(
            f"energy {eps_n!r} hits the pole E(p) at node {worst}",
            node=worst,
            momentum=float(g.p_nodes[worst]),
        )
    return 1.0 / gaps


def parity(vec: ComplexArray, g: Grid) -> float:
    """Overlap of phi(p) with phi(-p): +1 for even states, -1 for odd ones."""
    mirrored = vec[g.mirror_index()]
    paired = slice(1, None)
    overlap = np.vdot(vec[paired], mirrored[paired])
    weight = np.vdot(vec[paired], vec[paired]).real
    return float(overlap.real / weight) if weight > 0 else 0.0


def select_state(basis: EigenBasis, energy: float, kind: Literal["even", "odd", "any"] = "any") -> int:
    """Index of the eigenvector closest to `energy` with the requested parity."""
    order = np.argsort(np.abs(basis.eps - energy), kind="stable")
    for n in order:
        if kind == "any":
            return int(n)
        sign = parity(basis.vecs[:, n], basis.grid)
        if (kind == "even" and sign > 0.5) or (kind == "odd" and sign < -0.5):
            return int(n)
    raise NumericalError(f"no {kind} eigenvector in the basis", {"energy": energy})


def eigenfunction_position(basis: EigenBasis, n: int) -> ComplexArray:
    """phi_n transformed to the position lattice."""
    return columns_to_position(basis.vecs[:, [n]], basis.grid)[:, 0]
