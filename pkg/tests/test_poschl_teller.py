import math

import numpy as np
import pytest

from zalka.evolution import build_grid
from zalka.poschl_teller import (
    TWO_MODE_COEFFS,
    PtParams,
    bound_count,
    eigenfunction_unnormalized,
    energy,
    gegenbauer,
    grid_eigenstate,
    potential,
    reference_state,
)
from zalka.quantum_core import fidelity

LAM4 = PtParams(4.0, 1.0)


def spectral_hamiltonian(psi, grid, V):
    # FFT-based kinetic term, independent of the QFT circuit
    k = 2 * np.pi * np.fft.fftfreq(grid.N, d=grid.dx)
    return np.fft.ifft(0.5 * k**2 * np.fft.fft(psi)) + V(grid.x) * psi


def test_params():
    assert LAM4.V0 == 6.0
    assert PtParams(3.0, 2.0).V0 == pytest.approx(3 * 2 / 8)
    with pytest.raises(ValueError):
        PtParams(1.0)
    with pytest.raises(ValueError):
        PtParams(2.0, 0.0)


def test_potential_shape():
    V = potential(LAM4)
    assert V(0.0) == pytest.approx(-6.0)
    x = np.linspace(0.1, 8, 17)
    np.testing.assert_array_equal(V(x), V(-x))
    assert abs(V(10.0)) < 6 * 4 * math.exp(-20)


def test_energies():
    assert energy(0, LAM4) == -4.5
    assert energy(1, LAM4) == -2.0
    assert energy(2, LAM4) == -0.5
    assert energy(0, PtParams(4.0, 2.0)) == pytest.approx(-4.5 / 4)
    with pytest.raises(ValueError):
        energy(3, LAM4)
    with pytest.raises(ValueError):
        energy(-1, LAM4)


@pytest.mark.parametrize("lam,count", [(4.0, 3), (1.5, 1), (2.0, 1), (3.2, 3)])
def test_bound_count(lam, count):
    assert bound_count(PtParams(lam)) == count


def test_gegenbauer():
    assert gegenbauer(0, 2.7, 0.4) == 1
    assert gegenbauer(1, 2.5, 0.5) == pytest.approx(2.5)
    assert gegenbauer(2, 1.5, 0.3) == pytest.approx(-0.825, abs=1e-14)
    # alpha = 1/2 gives Legendre polynomials; P_3(z) = (5z^3 - 3z)/2
    z = np.linspace(-1, 1, 11)
    np.testing.assert_allclose(gegenbauer(3, 0.5, z), 0.5 * (5 * z**3 - 3 * z), atol=1e-14)


def test_eigenfunction_closed_forms():
    x = np.linspace(-4, 4, 41)
    psi0 = eigenfunction_unnormalized(0, LAM4, x)
    np.testing.assert_allclose(psi0, 1 / np.cosh(x) ** 3, rtol=1e-14)
    psi1 = eigenfunction_unnormalized(1, LAM4, x)
    np.testing.assert_allclose(psi1, 5 * np.sinh(x) / np.cosh(x) ** 3, rtol=1e-12, atol=1e-15)
    for n in range(3):
        f = eigenfunction_unnormalized(n, LAM4, x)
        np.testing.assert_allclose(f[::-1], (-1) ** n * f, atol=1e-14)
    with pytest.raises(ValueError):
        eigenfunction_unnormalized(3, LAM4, x)


def test_eigenfunction_solves_schrodinger():
    # finite-difference check of -psi''/2 + V psi = E psi in the continuum
    h = 1e-3
    x = np.linspace(-3, 3, 13)
    V = potential(LAM4)
    for n in range(3):
        f = lambda y: eigenfunction_unnormalized(n, LAM4, y)
        lap = (f(x + h) - 2 * f(x) + f(x - h)) / h**2
        np.testing.assert_allclose(-0.5 * lap + V(x) * f(x), energy(n, LAM4) * f(x), atol=1e-5)


def test_grid_eigenstates_orthonormal_and_residual():
    grid = build_grid(9, 20.0)
    V = potential(LAM4)
    modes = [grid_eigenstate(n, LAM4, grid) for n in range(3)]
    gram = np.array([[np.vdot(a, b) for b in modes] for a in modes])
    np.testing.assert_allclose(gram, np.eye(3), atol=1e-8)
    for n, psi in enumerate(modes):
        assert np.linalg.norm(psi) == pytest.approx(1, abs=1e-14)
        resid = spectral_hamiltonian(psi, grid, V) - energy(n, LAM4) * psi
        assert np.linalg.norm(resid) < 1e-6


def test_lowest_modes_on_default_box():
    grid = build_grid(9, 10.0)
    V = potential(LAM4)
    # mode 1 still carries a small wrap-around error from the periodic box
    for n, tol in [(0, 1e-6), (1, 1e-5)]:
        psi = grid_eigenstate(n, LAM4, grid)
        resid = spectral_hamiltonian(psi, grid, V) - energy(n, LAM4) * psi
        assert np.linalg.norm(resid) < tol
    # mode 2 decays only like 1/cosh(x); L = 10 is too small for it
    with pytest.raises(ValueError):
        grid_eigenstate(2, LAM4, grid)


def test_parity_under_index_reversal():
    grid = build_grid(8, 20.0)
    for n in range(3):
        psi = grid_eigenstate(n, LAM4, grid)
        # x_j = -x_{N-j}; index 0 (x = -L) has no partner
        np.testing.assert_allclose(psi[1:][::-1], (-1) ** n * psi[1:], atol=1e-14)


def test_reference_state():
    grid = build_grid(9, 10.0)
    psi0 = reference_state(grid, 0.0, LAM4)
    assert np.linalg.norm(psi0) == pytest.approx(1, abs=1e-14)
    m0 = grid_eigenstate(0, LAM4, grid)
    m1 = grid_eigenstate(1, LAM4, grid)
    assert abs(np.vdot(m0, psi0)) ** 2 == pytest.approx(0.5, abs=1e-8)
    assert np.vdot(m1, psi0) / np.vdot(m0, psi0) == pytest.approx(1j, abs=1e-8)
    psi1 = reference_state(grid, 1.0, LAM4)
    assert fidelity(psi1, psi1) == pytest.approx(1, abs=1e-14)
    assert fidelity(psi0, psi1) == pytest.approx((1 + math.cos(2.5)) / 2, abs=1e-8)
    assert (1 + math.cos(2.5)) / 2 == pytest.approx(0.0994, abs=1e-4)
    with pytest.raises(ValueError):
        reference_state(grid, 0.0, LAM4, [(0, 1.0), (1, 1.0)])


def test_density_periodic_in_time():
    grid = build_grid(9, 10.0)
    period = 2 * math.pi / 2.5
    for t in (0.0, 0.37, 1.0):
        a = np.abs(reference_state(grid, t, LAM4)) ** 2
        b = np.abs(reference_state(grid, t + period, LAM4)) ** 2
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_two_mode_coefficients():
    assert sum(abs(c) ** 2 for _, c in TWO_MODE_COEFFS) == pytest.approx(1)
    assert [n for n, _ in TWO_MODE_COEFFS] == [0, 1]
