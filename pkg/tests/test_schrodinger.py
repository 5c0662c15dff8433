import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from pylevytools.core.exceptions import SpectrumError
from pylevytools.reconstruct.entities import GridSpec, GridFunction
from pylevytools.reconstruct.lib import potential
from pylevytools.reference.entities import HarmonicOscillator
from pylevytools.schrodinger.entities import MatrixElements
from pylevytools.schrodinger.lib import (solve, rayleigh_quotients, convergence_sweep, refine_potential,
                                         hamiltonian_bands)


def test_oscillator_energies(ho_spectrum):
    n = np.arange(1, 9)
    np.testing.assert_allclose(ho_spectrum.energies[1:], n, rtol=1e-3)
    assert ho_spectrum.energies[0] == 0.0
    assert ho_spectrum.raw_e0 == pytest.approx(0.0, abs=1e-4)


def test_oscillator_parity_and_signs(ho_spectrum):
    assert ho_spectrum.parity == tuple((-1) ** k for k in range(9))
    for k, phi in enumerate(ho_spectrum.states):
        np.testing.assert_array_equal(phi, (-1) ** k * phi[::-1])
        first = np.flatnonzero(np.abs(phi) > 1e-6 * np.max(np.abs(phi)))[0]
        assert phi[first] > 0


def test_states_normalized_with_walls(ho_spectrum):
    for phi in ho_spectrum.states:
        assert trapezoid(phi * phi, dx=ho_spectrum.dx) == pytest.approx(1.0, abs=1e-12)
        assert phi[0] == 0.0 and phi[-1] == 0.0


def test_oscillator_matrix_elements(ho_numeric_q):
    q = ho_numeric_q.q
    # first significant value from the left is positive, so phi_1 ~ -x exp(-x^2/2)
    assert q[0, 1] == pytest.approx(-1.0 / math.sqrt(2.0), abs=1e-4)
    assert abs(q[1, 2]) == pytest.approx(1.0, abs=1e-4)
    assert abs(q[2, 3]) == pytest.approx(math.sqrt(1.5), abs=1e-4)
    assert q[0, 1] * q[1, 2] * q[2, 1] * q[1, 0] == pytest.approx(0.5, abs=2e-4)
    np.testing.assert_array_equal(q, q.T)
    assert ho_numeric_q.parity_violation() < 1e-10


def test_rayleigh_quotients(ho_forms, ho_spectrum, default_grid):
    v = GridFunction.from_function(default_grid, ho_forms.potential)
    np.testing.assert_allclose(rayleigh_quotients(v, ho_spectrum), ho_spectrum.raw_energies, atol=1e-8)


def test_too_many_states():
    v = GridFunction.from_function(GridSpec(L=4.0, n=41), lambda x: x * x / 2.0)
    with pytest.raises(ValueError):
        solve(v, 11)


def test_solve_uses_retained_block(ho_phi0):
    v = potential(ho_phi0)
    spectrum = solve(v, 5)
    assert spectrum.n == np.count_nonzero(v.mask)
    # hard walls near |x| = 4.29 push the levels slightly up
    np.testing.assert_allclose(spectrum.energies[1:3], [1.0, 2.0], rtol=1e-2)


def test_degenerate_double_well():
    grid = GridSpec(L=4.0, n=401)
    v = GridFunction.from_function(grid, lambda x: np.where(np.abs(x) < 1.0, 1e4, 0.0))
    with pytest.raises(SpectrumError):
        solve(v, 2)


def test_hamiltonian_bands():
    d, e = hamiltonian_bands([0.0, 1.0, 2.0], 0.5)
    np.testing.assert_array_equal(d, [4.0, 5.0, 6.0])
    np.testing.assert_array_equal(e, [-2.0, -2.0])


def test_matrix_elements_entity():
    with pytest.raises(ValueError):
        MatrixElements(q=np.array([[0.0, 1.0], [1.0 + 1e-15, 0.0]]), energies=np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        MatrixElements(q=np.zeros((2, 2)), energies=np.array([0.0, 1.0, 2.0]))
    m = MatrixElements(q=np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 2.0], [0.0, 2.0, 0.0]]),
                       energies=np.array([0.0, 1.0, 2.0]))
    assert m.truncated(2).K == 2
    flipped = m.with_flipped_signs([1])
    np.testing.assert_array_equal(flipped.q, [[0.0, -1.0, 0.0], [-1.0, 0.0, -2.0], [0.0, -2.0, 0.0]])
    assert m.parity_violation() == 0.0
    assert list(m.to_frame().columns) == ["0", "1", "2"]


def test_spectrum_frames(ho_spectrum, tmp_path):
    df = ho_spectrum.to_frame()
    assert list(df.columns) == ["k", "E_k", "parity"]
    ho_spectrum.states_to_csv(tmp_path / "states.csv")
    assert (tmp_path / "states.csv").exists()
    assert ho_spectrum.with_flipped_signs([2]).states[2][500] == -ho_spectrum.states[2][500]


def test_refine_potential_keeps_quadratics():
    v = GridFunction.from_function(GridSpec(L=4.0, n=81), lambda x: x * x / 2.0)
    fine = refine_potential(v, 2)
    assert fine.n == 161
    np.testing.assert_allclose(fine.values, fine.x ** 2 / 2.0, atol=1e-12)


def test_convergence_sweep():
    forms = HarmonicOscillator(1.0).closed_forms()
    v = GridFunction.from_function(GridSpec(L=8.0, n=801), forms.potential)
    df = convergence_sweep(v, 5, levels=(1, 2))
    assert list(df.columns) == ["k", "E_coarse", "E_fine", "richardson_error", "relative_error", "flagged"]
    assert not df["flagged"].any()
    # second order: the fine grid error is a third of the coarse/fine difference
    np.testing.assert_allclose(df["E_fine"][1:] - np.arange(1, 5), df["richardson_error"][1:], rtol=0.05)


def test_convergence_sweep_with_refinement_ratio_three():
    forms = HarmonicOscillator(1.0).closed_forms()
    v = GridFunction.from_function(GridSpec(L=8.0, n=801), forms.potential)
    df = convergence_sweep(v, 4, levels=(1, 3))
    # error of the fine grid is (E_coarse - E_fine) / (3^2 - 1)
    np.testing.assert_allclose(df["E_fine"][1:] - np.arange(1, 4), df["richardson_error"][1:], rtol=0.05)
    with pytest.raises(ValueError):
        convergence_sweep(v, 4, levels=(2, 1))
