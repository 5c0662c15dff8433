import math

import numpy as np
import pytest

from pylevytools.core.exceptions import SpectrumError
from pylevytools.correlators.integrals import ordered_integral, pair_integral, _matrix_exponential
from pylevytools.correlators.lib import (chi2_small, chi2_large, chi2_exact, chi2_scale, two_point, sharp_moment4,
                                         window_cumulant, stationarity_check, term_breakdown, build_chi2_report,
                                         parity_allowed, small_window_ratio)
from pylevytools.data.tools import to_json
from pylevytools.schrodinger.entities import MatrixElements


def single_path(e1):
    return MatrixElements(q=np.array([[0.0, 1.0], [1.0, 0.0]]), energies=np.array([0.0, e1]))


def test_oscillator_chi2_vanishes(ho_exact_q):
    assert abs(chi2_small(ho_exact_q)) < 1e-12
    assert abs(chi2_large(ho_exact_q)) < 1e-12
    for T in (0.1, 1.0, 10.0):
        assert abs(chi2_exact(ho_exact_q, T)) < 1e-10


def test_two_point_function(ho_exact_q):
    assert two_point(ho_exact_q, 0.0) == pytest.approx(0.5, rel=1e-15)
    np.testing.assert_allclose(two_point(ho_exact_q, [0.5, 1.0]), 0.5 * np.exp(-np.array([0.5, 1.0])), rtol=1e-14)
    with pytest.raises(ValueError):
        two_point(ho_exact_q, -1.0)


def test_sharp_moment_consistency(anharmonic_q):
    expected = sharp_moment4(anharmonic_q) - 3.0 * two_point(anharmonic_q, 0.0) ** 2
    assert chi2_small(anharmonic_q) == pytest.approx(expected, rel=1e-12)


def test_small_window_limit(anharmonic_q):
    assert chi2_exact(anharmonic_q, 1e-4) / chi2_small(anharmonic_q) == pytest.approx(1.0, abs=1e-2)


def test_small_window_ratio_removes_the_scale_factor():
    q, T = single_path(0.1), 0.01
    plain = chi2_exact(q, T) / chi2_small(q)
    assert plain == pytest.approx(1.02 ** 3, rel=2e-2)
    assert plain > 1.05
    assert 0.95 <= small_window_ratio(chi2_exact(q, T), chi2_small(q), T) <= 1.05
    scaled = small_window_ratio(chi2_exact(q, T, energy_scale=2.0), chi2_small(q, energy_scale=2.0), T, 2.0)
    assert scaled == pytest.approx(small_window_ratio(chi2_exact(q, T), chi2_small(q), T), rel=1e-12)


def test_large_window_limit():
    q = single_path(1.5)
    assert chi2_large(q) == pytest.approx(-24.0 / 1.5 ** 3, rel=1e-14)
    assert chi2_exact(q, 1e4) == pytest.approx(chi2_large(q), rel=1e-3)


def test_energy_scale(anharmonic_q):
    assert chi2_small(anharmonic_q, energy_scale=2.0) == pytest.approx(chi2_small(anharmonic_q) / 16.0, rel=1e-14)
    assert chi2_large(anharmonic_q, energy_scale=2.0) == pytest.approx(chi2_large(anharmonic_q) / 2.0, rel=1e-14)
    assert chi2_scale(0.5, 2.0) == pytest.approx(27.0 / 16.0)
    with pytest.raises(ValueError):
        chi2_exact(anharmonic_q, 0.0)


def test_sign_flip_invariance(ho_numeric_q, anharmonic_q):
    for q in (ho_numeric_q, anharmonic_q):
        flipped = q.with_flipped_signs([1, q.K - 1])
        assert chi2_small(flipped) == pytest.approx(chi2_small(q), rel=1e-14, abs=1e-15)
        assert chi2_large(flipped) == pytest.approx(chi2_large(q), rel=1e-14, abs=1e-15)
        assert chi2_exact(flipped, 1.0) == pytest.approx(chi2_exact(q, 1.0), rel=1e-14, abs=1e-15)


def test_parity_forbidden_elements_are_ignored(anharmonic_q):
    q = np.array(anharmonic_q.q)
    q[0, 2] = q[2, 0] = 0.3
    perturbed = MatrixElements(q, anharmonic_q.energies)
    assert perturbed.parity_violation() > 0.1
    np.testing.assert_array_equal(parity_allowed(perturbed), anharmonic_q.q)
    assert chi2_small(perturbed) == chi2_small(anharmonic_q)


def test_stationarity(anharmonic_q):
    assert stationarity_check(anharmonic_q, 3.7, [0.0, 0.4, 2.0], base=1.1) <= 1e-14


def test_excited_energies_must_be_positive():
    q = MatrixElements(q=np.array([[0.0, 1.0], [1.0, 0.0]]), energies=np.array([0.0, 0.0]))
    with pytest.raises(SpectrumError):
        chi2_large(q)
    with pytest.raises(SpectrumError):
        window_cumulant(q, 1.0)


@pytest.mark.parametrize("a,b,c,T", [
    (1.0, 2.0, 3.0, 0.1),
    (1.0, 2.0, 3.0, 2.0),
    (0.5, 0.0, 0.5, 5.0),
    (1.0, 1.0 + 1e-9, 1.0, 3.0),
    (4.0, 0.0, 1.0, 0.05),
])
def test_ordered_integral_matches_matrix_exponential(a, b, c, T):
    S = 2.0 * T
    reference = S ** 4 * _matrix_exponential((-a * S, -b * S, -c * S))
    assert ordered_integral(a, b, c, T) == pytest.approx(reference, rel=1e-8)


def test_ordered_integral_is_symmetric():
    value = ordered_integral(1.0, 2.0, 3.0, 1.0)
    for a, b, c in [(3.0, 1.0, 2.0), (2.0, 3.0, 1.0), (3.0, 2.0, 1.0)]:
        assert ordered_integral(a, b, c, 1.0) == pytest.approx(value, rel=1e-12)


def test_ordered_integral_continuous_across_branches():
    # S max(E) = 1 separates the series from the residue formula
    below = ordered_integral(1.0, 2.0, 3.0, 1.0 / 6.0 * (1.0 - 1e-9))
    above = ordered_integral(1.0, 2.0, 3.0, 1.0 / 6.0 * (1.0 + 1e-9))
    assert above == pytest.approx(below, rel=1e-7)


def test_ordered_integral_small_window():
    T = 1e-3
    assert ordered_integral(1.0, 2.0, 3.0, T) == pytest.approx((2.0 * T) ** 4 / 24.0, rel=1e-2)


def test_pair_integral():
    e, T = 0.01, 1.0
    x = 2.0 * e * T
    assert pair_integral(e, T) == pytest.approx(4.0 * (1.0 - x / 3.0 + x * x / 12.0), rel=1e-6)
    e = 2.0
    assert pair_integral(e, T) == pytest.approx(2.0 * (2.0 / e - (1.0 - math.exp(-2.0 * e)) / e ** 2), rel=1e-14)
    # continuity at the series switch
    assert pair_integral(0.05 * (1 - 1e-9), 1.0) == pytest.approx(pair_integral(0.05 * (1 + 1e-9), 1.0), rel=1e-8)


def test_term_breakdown(ho_exact_q):
    df = term_breakdown(ho_exact_q)
    assert list(df.columns) == ["k", "l", "m", "small_term", "large_term"]
    assert len(df) <= 20
    assert (df["k"] >= 1).all()
    top = df.iloc[0]
    assert (top["k"], top["l"], top["m"]) == (1, 2, 1)


def test_build_chi2_report(ho_exact_q, tmp_path):
    report = build_chi2_report(ho_exact_q, [0.1, 1.0, 10.0])
    assert report.truncation_K == 30
    assert report.converged
    assert list(report.curve["T"]) == [0.1, 1.0, 10.0]
    assert report.two_point_0 == pytest.approx(0.5)
    report.to_json(tmp_path / "report.json")
    again = build_chi2_report(ho_exact_q, [0.1, 1.0, 10.0])
    assert to_json(report.to_dict()) == to_json(again.to_dict())


def test_report_flags_small_truncations(anharmonic_q):
    report = build_chi2_report(anharmonic_q, [1.0], convergence_step=4)
    assert not report.converged
    assert all(math.isnan(d) for d in report.convergence_deltas.values())
