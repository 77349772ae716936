import math

import numpy as np
import pytest
from conftest import ALPHA_RB, synthetic_table
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from rydline import ionpair as ip
from rydline.basis import local_momentum
from rydline.scattering import PhaseShiftModel
from rydline.species import PhaseShiftTable

M_AB = 86.909 * 1822.888486209 / 2


def test_born_charge_is_R_invariant(born2):
    R = np.linspace(50, 1710, 500)
    Q = ip.effective_charge(born2, 30, R)
    np.testing.assert_allclose(Q, -6.08 / 27000, rtol=1e-13)
    assert ip.effective_charge(born2, 30, 1800.0) == pytest.approx(-6.08 / 27000, rel=1e-13)
    assert np.all(ip.charge_magnitude(born2, 30, R) > 0)


def test_table_charge_undefined_at_threshold():
    m = PhaseShiftModel.from_table(synthetic_table(2, 10.0))
    with pytest.raises(ValueError, match="k = 0"):
        ip.effective_charge(m, 30, 1800.0)


def test_charge_sign_follows_time_delay():
    m = PhaseShiftModel.from_table(synthetic_table(1, 5.0))
    assert ip.effective_charge(m, 30, 500.0) < 0
    k = np.linspace(0, 0.5, 100)
    neg = PhaseShiftModel.from_table(PhaseShiftTable(L=1, k=k, delta=-5.0 * k**3))
    assert ip.effective_charge(neg, 30, 500.0) > 0


def test_model_curve_hand_values(born2):
    n = 30
    d = 3.04 / 900.0  # delta/pi at k = 1/30
    expected = 0.5 / n**2 - 0.5 / (n - d) ** 2
    c = ip.model_curve(born2, n, np.array([900.0, 1800.0]))
    assert c.V[0] == pytest.approx(expected, rel=1e-13)
    assert c.V[0] == pytest.approx(-1.25124012e-7, rel=1e-8)
    assert c.V[1] == 0.0
    assert c.label == "dragonfly" and c.provenance == "ion-pair"


def test_model_curve_zero_beyond_turning_point(born2):
    c = ip.model_curve(born2, 30, np.array([1000.0, 1900.0, 3000.0]))
    assert c.V[0] < 0 and np.all(c.V[1:] == 0)


def test_model_curve_monotone(born2):
    c = ip.model_curve(born2, 30, np.linspace(50, 1800, 300))
    assert np.all(np.diff(c.V) > 0)


def test_nonphysical_shift_rejected():
    k = np.linspace(0, 1.5, 50)
    m = PhaseShiftModel.from_table(PhaseShiftTable(L=2, k=k, delta=500.0 * k**2))
    with pytest.raises(ValueError, match="nonphysical"):
        ip.model_curve(m, 30, np.array([10.0]))


def test_expansion_terms_at_midpoint():
    t = ip.expansion_terms(ALPHA_RB, 2, 30, 900.0)
    assert float(t["polarization"]) == pytest.approx(-2.43256e-10, rel=1e-5)
    assert float(t["offset"]) == pytest.approx(3.04 / 30**5, rel=1e-13)
    assert float(t["coulomb"]) == pytest.approx(-6.08 / (27000 * 900), rel=1e-13)
    assert float(t["quadratic"]) == pytest.approx(-6 * 3.04**2 / (30**4 * 900**2), rel=1e-13)
    total = ip.expansion_curve(ALPHA_RB, 2, 30, np.array([900.0])).V[0]
    assert total == pytest.approx(-1.2543065e-7, rel=1e-6)


def test_expansion_unknown_term():
    with pytest.raises(ValueError, match="unknown"):
        ip.expansion_curve(ALPHA_RB, 2, 30, np.array([900.0]), terms=("bogus",))


def test_expansion_converges_to_model(born2):
    diffs = []
    for n in (30, 60):
        R = np.linspace(n * n / 2, 2 * n * n, 1001)
        exact = ip.model_curve(born2, n, R).V
        approx = ip.expansion_curve(ALPHA_RB, 2, n, R, terms=("offset", "coulomb", "quadratic")).V
        diffs.append(np.max(np.abs(exact - approx)))
    assert diffs[0] / diffs[1] >= 2


def test_series_constants():
    sc = ip.series_constants(2, 30, M_AB, alpha=ALPHA_RB)
    assert sc.alpha_bar == pytest.approx(3.04)
    assert sc.rydberg == pytest.approx(2 * M_AB * 3.04**2 / 30**6, rel=1e-14)
    assert sc.rydberg == pytest.approx(2.0084e-3, rel=1e-4)
    assert sc.v_max == 126
    assert sc.threshold_shift == pytest.approx(3.04 / 30**5)
    assert sc.energy(100) == pytest.approx(3.04 / 30**5 - sc.rydberg / 100**2)
    back = ip.SeriesConstants.from_dict(sc.to_dict())
    assert back == sc


def test_series_energy_needs_v_above_eta():
    sc = ip.series_constants(2, 30, M_AB, alpha=ALPHA_RB, eta=2.5)
    with pytest.raises(ValueError, match="v > eta"):
        sc.energy(2)


def test_series_constants_from_table():
    k = np.linspace(0, 0.2, 50)
    m = PhaseShiftModel.from_table(PhaseShiftTable(L=2, k=k, delta=math.pi * 3.04 * k**2))
    assert ip.series_constants(2, 30, M_AB, model=m).alpha_bar == pytest.approx(3.04, rel=1e-10)
    with pytest.raises(ValueError):
        ip.series_constants(2, 30, M_AB)


# ---------------------------------------------------------------------------
# windowed charge
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("R", [300.0, 900.0, 1500.0])
def test_cycle_average_equals_effective_charge(born2, R):
    k = local_momentum(30, R)[0]
    for xi0 in (20 / k, 50 / k + 0.7):
        assert ip.cycle_average(born2, 30, R, xi0) == pytest.approx(ip.effective_charge(born2, 30, R), rel=1e-10)


class _SquareWell:
    """Exact s-wave scattering off an attractive square well of radius ``a``."""

    L = 0

    def __init__(self, depth, a):
        self.V0, self.a = depth, a

    def delta(self, k):
        K = math.sqrt(k * k + 2 * self.V0)
        return math.atan(k / K * math.tan(K * self.a)) - k * self.a

    def slope(self, k, h=1e-6):
        return (self.delta(k + h) - self.delta(k - h)) / (2 * h)

    def excess_probability(self, k, xi0):
        """``int_0^xi0 (|u|^2 - |u_0|^2)`` with energy-normalised waves."""
        K = math.sqrt(k * k + 2 * self.V0)
        d = self.delta(k)
        N2 = 2 / (math.pi * k)
        C2 = N2 * math.sin(k * self.a + d) ** 2 / math.sin(K * self.a) ** 2
        opts = dict(limit=1000, epsabs=0, epsrel=1e-13)
        inner = quad(lambda x: C2 * math.sin(K * x) ** 2, 0, self.a, **opts)[0]
        outer = quad(lambda x: N2 * math.sin(k * x + d) ** 2, self.a, xi0, **opts)[0]
        free = quad(lambda x: N2 * math.sin(k * x) ** 2, 0, xi0, **opts)[0]
        return inner + outer - free


@pytest.mark.parametrize("depth, a", [(0.2, 3.0), (0.05, 6.0), (1.0, 1.0)])
def test_windowed_charge_matches_direct_quadrature(depth, a):
    n, R = 30, 900.0
    k = local_momentum(n, R)[0]
    well = _SquareWell(depth, a)
    xi0 = 50 / k
    direct = -well.excess_probability(k, xi0) / n**3
    assert ip.windowed_charge(well, n, R, xi0) == pytest.approx(direct, rel=1e-6)


@settings(max_examples=25, deadline=None)
@given(R=st.floats(100, 1700), frac=st.floats(0, 1))
def test_windowed_charge_oscillates_about_average(born2, R, frac):
    k = local_momentum(30, R)[0]
    xi0 = 30 / k + frac * math.pi / k
    W = ip.windowed_charge(born2, 30, R, xi0)
    Q = ip.effective_charge(born2, 30, R)
    d = float(born2.delta(k))
    assert abs(W - Q) <= abs(math.sin(d)) / (math.pi * k * k * 27000) * (1 + 1e-12)


def test_windowed_charge_undefined_at_threshold(born2):
    with pytest.raises(ValueError):
        ip.windowed_charge(born2, 30, 1800.0, 100.0)
