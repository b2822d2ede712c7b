import numpy as np
import pytest
import scipy.linalg

from salpeter.errors import NumericalError, SingularityError
from salpeter.grid import make_grid
from salpeter.kernel import (
    HamiltonianMatrix,
    build_hamiltonian,
    delta_limit_eigenfunction,
    diagonalize,
    dispersion,
    eigenfunction_position,
    parity,
    select_state,
    solve,
)
from salpeter.potential import NarrowDelta, Rectangular, SmoothTanh
from salpeter.types import Units

UNITS = Units()


@pytest.fixture(scope="module")
def small_grid():
    return make_grid(-20.0, 20.0, 256)


@pytest.fixture(scope="module")
def barrier_basis(small_grid):
    return solve(small_grid, SmoothTanh(v0=20.0, length=1.0, alpha=20.0), UNITS)


def _negative_count(a: np.ndarray, shift: float) -> int:
    """Eigenvalues of a Hermitian matrix below `shift`, by Sylvester inertia of an LDL^H factorization."""
    _, d, _ = scipy.linalg.ldl(a - shift * np.eye(a.shape[0]), hermitian=True)
    count, i, n = 0, 0, d.shape[0]
    while i < n:
        if i + 1 < n and d[i + 1, i] != 0:
            block = d[i : i + 2, i : i + 2]
            det = (block[0, 0] * block[1, 1] - abs(block[0, 1]) ** 2).real
            trace = (block[0, 0] + block[1, 1]).real
            count += 1 if det < 0 else (2 if trace < 0 else 0)
            i += 2
        else:
            count += 1 if d[i, i].real < 0 else 0
            i += 1
    return count


def _bisection_eigenvalues(a: np.ndarray) -> np.ndarray:
    bound = float(np.linalg.norm(a)) + 1.0
    values = []
    for k in range(a.shape[0]):
        lo, hi = -bound, bound
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if _negative_count(a, mid) > k:
                hi = mid
            else:
                lo = mid
        values.append(0.5 * (lo + hi))
    return np.array(values)


def test_dispersion():
    np.testing.assert_allclose(dispersion([0.0, 3.0, -4.0], Units(c=1.0, mass=1.0)), [1.0, np.sqrt(10), np.sqrt(17)])
    assert dispersion(0.0, Units(c=2.0, mass=0.5)) == pytest.approx(2.0)


def test_hamiltonian_is_exactly_hermitian(small_grid):
    h = build_hamiltonian(small_grid, Rectangular(v0=3.0, length=2.0), UNITS)

    assert h.m.shape == (256, 256)
    assert np.array_equal(h.m, h.m.conj().T)


def test_free_spectrum_is_sorted_dispersion(small_grid):
    basis = solve(small_grid, Rectangular(v0=0.0, length=1.0), UNITS)
    np.testing.assert_allclose(basis.eps, np.sort(dispersion(small_grid.p_nodes, UNITS)), atol=1e-12)


def test_orthonormal_and_complete(barrier_basis):
    assert len(barrier_basis) == 256
    assert barrier_basis.orthonormality_residual() < 1e-10
    assert barrier_basis.completeness_residual() < 1e-8


@pytest.mark.parametrize("v0", [2.0, 3.0, 20.0])
def test_spectrum_bounded_by_rest_energy(small_grid, v0):
    for v in (Rectangular(v0=v0, length=1.0), SmoothTanh(v0=v0, length=1.0, alpha=20.0)):
        basis = solve(small_grid, v, UNITS)
        assert basis.eps[0] >= UNITS.rest_energy - 1e-9


def test_barrier_raises_every_level(small_grid):
    # V(x) >= 0 adds a positive semidefinite term, so each ordered level can only go up
    free = solve(small_grid, Rectangular(v0=0.0, length=1.0), UNITS)
    low = solve(small_grid, Rectangular(v0=2.0, length=1.0), UNITS)
    high = solve(small_grid, Rectangular(v0=20.0, length=1.0), UNITS)

    assert np.all(low.eps >= free.eps - 1e-9)
    assert np.all(high.eps >= low.eps - 1e-9)


def test_phase_convention(barrier_basis):
    vecs = barrier_basis.vecs
    mags = np.abs(vecs)
    top = mags.max(axis=0)
    for n in range(vecs.shape[1]):
        # near-ties in magnitude (e.g. +p and -p of one state) may pick either pivot
        leads = vecs[mags[:, n] >= top[n] * (1 - 1e-9), n]
        assert np.any((leads.real > 0) & (np.abs(leads.imag) < 1e-12 * top[n]))


def test_random_hermitian_eigenvalues_match_bisection():
    g = make_grid(-np.pi, np.pi, 8)
    for seed in range(100):
        rng = np.random.default_rng(seed)
        z = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        a = 0.5 * (z + z.conj().T)

        basis = diagonalize(HamiltonianMatrix(a, g))

        np.testing.assert_allclose(basis.eps, _bisection_eigenvalues(a), atol=1e-10)


def test_diagonalize_reports_non_finite_input():
    g = make_grid(-1.0, 1.0, 4)
    m = np.eye(4, dtype=np.complex128)
    m[1, 1] = np.nan

    with pytest.raises(NumericalError) as exc:
        diagonalize(HamiltonianMatrix(m, g))

    assert exc.value.exit_code == 3
    assert exc.value.diagnostics["finite"] is False
    assert exc.value.diagnostics["n"] == 4


def test_typical_eigenvalue_near_threshold():
    g = make_grid(-40.0, 40.0, 1024)
    basis = solve(g, Rectangular(v0=20.0, length=5.0), UNITS)

    n = basis.nearest(1.02)
    assert abs(basis.eps[n] - 1.02) < 0.01

    phi_x = np.abs(eigenfunction_position(basis, n))
    # normalized in x as well, since the transform is unitary
    assert np.sum(phi_x**2) * g.dx == pytest.approx(1.0, rel=1e-8)


def test_delta_shape_raises_on_pole():
    g = make_grid(-np.pi, np.pi, 8)
    energy = float(dispersion(g.p_nodes, UNITS)[3])

    with pytest.raises(SingularityError) as exc:
        delta_limit_eigenfunction(energy, g, UNITS)

    assert exc.value.node == 3
    assert exc.value.momentum == pytest.approx(g.p_nodes[3])


def test_delta_shape_away_from_poles():
    g = make_grid(-np.pi, np.pi, 8)
    shape = delta_limit_eigenfunction(0.5, g, UNITS)
    np.testing.assert_allclose(shape, 1.0 / (0.5 - dispersion(g.p_nodes, UNITS)))


def test_ground_state_is_even(barrier_basis):
    assert parity(barrier_basis.vecs[:, 0], barrier_basis.grid) > 0.99


def test_select_state_by_parity(small_grid):
    basis = solve(small_grid, NarrowDelta(g=1.0), UNITS)

    even = select_state(basis, 1.02, "even")
    odd = select_state(basis, 1.02, "odd")

    assert parity(basis.vecs[:, even], small_grid) > 0.5
    assert parity(basis.vecs[:, odd], small_grid) < -0.5
    assert select_state(basis, 1.02, "any") == basis.nearest(1.02)
