import math
import warnings

import numpy as np
import pytest
from conftest import ALPHA_RB, synthetic_table
from hypothesis import given, settings
from hypothesis import strategies as st

from rydline.scattering import (
    PhaseShiftModel,
    PhaseShiftRangeError,
    born_coefficient,
    calibrate_alpha_bar,
    phase_shift,
    phase_shift_slope,
    scattering_volume,
)


@pytest.mark.parametrize("L, expected", [(2, 3.04), (3, 1.0133333333), (4, 0.4606060606)])
def test_born_coefficients(L, expected):
    assert born_coefficient(L, ALPHA_RB) == pytest.approx(expected, rel=1e-9)


def test_born_coefficient_rejects_low_L_and_bad_alpha():
    with pytest.raises(ValueError, match="L >= 2"):
        born_coefficient(1, ALPHA_RB)
    with pytest.raises(ValueError, match="positive"):
        born_coefficient(2, -1.0)


def test_born_values_at_n30_midpoint(born2):
    # k_30(900) = 1/30 exactly
    k = 1.0 / 30.0
    assert phase_shift(born2, k) == pytest.approx(1.0611601852e-2, rel=1e-9)
    assert phase_shift_slope(born2, k) == pytest.approx(0.6366961111, rel=1e-9)
    assert scattering_volume(born2, k) == pytest.approx(-2.578716044e5, rel=1e-9)


def test_born_zero_at_threshold(born2):
    assert phase_shift(born2, 0.0) == 0.0


def test_scattering_volume_diverges_at_threshold(born2):
    with pytest.raises(ValueError, match="threshold"):
        scattering_volume(born2, 0.0)


def test_negative_momentum_rejected(born2):
    with pytest.raises(ValueError):
        phase_shift(born2, -0.1)


def test_table_no_extrapolation():
    m = PhaseShiftModel.from_table(synthetic_table(1, 2.0, k_max=0.3))
    with pytest.raises(PhaseShiftRangeError, match="outside"):
        m.delta(0.31)


@pytest.mark.parametrize("interp", ["pchip", "cubic", "linear"])
def test_table_slope_matches_finite_difference(interp):
    m = PhaseShiftModel.from_table(synthetic_table(1, 2.0), interp)
    k = np.linspace(0.05, 0.45, 9)
    h = 1e-6
    fd = (m.delta(k + h) - m.delta(k - h)) / (2 * h)
    tol = 1e-2 if interp == "linear" else 1e-5
    np.testing.assert_allclose(m.slope(k), fd, rtol=tol, atol=1e-8)


def test_table_interpolation_accuracy():
    m = PhaseShiftModel.from_table(synthetic_table(1, 2.0))
    k = np.linspace(0.03, 0.49, 50)
    exact = 2.0 * k**3 / (1 + k * k)
    np.testing.assert_allclose(m.delta(k), exact, rtol=1e-4, atol=1e-9)
    exact_slope = 2.0 * (3 * k**2 * (1 + k * k) - 2 * k**4) / (1 + k * k) ** 2
    np.testing.assert_allclose(m.slope(k), exact_slope, rtol=5e-3, atol=1e-8)


def test_resonance_warning():
    k = np.linspace(0.0, 0.5, 51)
    d = 0.5 * math.pi * (k / k[30]) ** 3
    from rydline.species import PhaseShiftTable

    m = PhaseShiftModel.from_table(PhaseShiftTable(L=1, k=k, delta=d))
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        scattering_volume(m, k[30])
    assert any("resonance" in str(x.message) for x in w)


def test_calibrated_alpha_bar_recovers_born():
    k = np.linspace(0, 0.1, 40)
    from rydline.species import PhaseShiftTable

    table = PhaseShiftTable(L=2, k=k, delta=math.pi * 3.04 * k**2)
    m = PhaseShiftModel.from_table(table)
    assert calibrate_alpha_bar(m) == pytest.approx(3.04, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(k=st.floats(1e-4, 0.5), L=st.integers(2, 6))
def test_born_scaling_law(k, L):
    m = PhaseShiftModel.born(L, ALPHA_RB)
    assert phase_shift(m, 2 * k) == pytest.approx(4 * phase_shift(m, k), rel=1e-12)
    assert phase_shift_slope(m, k) == pytest.approx(2 * phase_shift(m, k) / k, rel=1e-12)
