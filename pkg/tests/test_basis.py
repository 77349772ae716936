import numpy as np
import pytest
from _oracles import hydrogen_du, hydrogen_u
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import simpson

from rydline import basis as rb


def test_hydrogen_1s_value():
    f = rb.radial_function(rb.RydbergChannel(1, 0))
    assert float(f(1.0)) == pytest.approx(2.0 / np.e, abs=1e-6)
    assert float(f(1.0)) == pytest.approx(0.735759, abs=1e-6)


@pytest.mark.parametrize("n, l", [(1, 0), (2, 1), (5, 0), (5, 4), (12, 3), (30, 0), (30, 2), (30, 29)])
def test_matches_analytic_hydrogen(n, l):
    f = rb.radial_function(rb.RydbergChannel(n, l))
    r = np.linspace(0.05, 2.5 * n * n, 400)
    ref = hydrogen_u(n, l, r)
    scale = np.max(np.abs(ref))
    np.testing.assert_allclose(f(r), ref, atol=2e-6 * scale)


@pytest.mark.parametrize("n, l", [(3, 1), (30, 2), (30, 11)])
def test_derivative_matches_analytic(n, l):
    f = rb.radial_function(rb.RydbergChannel(n, l))
    r = np.linspace(0.5, 2.0 * n * n, 200)
    _, du = f(r, derivative=True)
    ref = hydrogen_du(n, l, r)
    np.testing.assert_allclose(du, ref, atol=1e-5 * np.max(np.abs(ref)))


def test_manifold_orthonormal():
    chans = [rb.RydbergChannel(30, l) for l in range(30)]
    fs = rb.basis_radial_functions(chans)
    x = fs[0].x
    Y = np.array([f.y for f in fs])
    G = simpson(2 * x**2 * Y[:, None, :] * Y[None, :, :], x=x)
    # different l in one manifold are not orthogonal as radial functions of
    # different potentials; only the diagonal is a test of normalisation
    np.testing.assert_allclose(np.diag(G), 1.0, atol=1e-6)


def test_same_l_orthogonal():
    l = 2
    chans = [rb.RydbergChannel(n, l) for n in range(26, 33)]
    fs = rb.basis_radial_functions(chans)
    x = fs[0].x
    Y = np.array([f.y for f in fs])
    G = simpson(2 * x**2 * Y[:, None, :] * Y[None, :, :], x=x)
    np.testing.assert_allclose(G, np.eye(len(chans)), atol=1e-6)


@pytest.mark.parametrize("n, l", [(30, 0), (30, 2), (30, 15), (30, 29), (7, 3)])
def test_node_count(n, l):
    assert rb.radial_function(rb.RydbergChannel(n, l)).node_count() == n - l - 1


def test_circular_state_peak():
    f = rb.radial_function(rb.RydbergChannel(30, 29))
    r = np.linspace(700, 1100, 4001)
    assert r[np.argmax(np.abs(f(r)))] == pytest.approx(900.0, abs=0.5)


def test_positive_near_origin():
    for l in (0, 3, 10):
        f = rb.radial_function(rb.RydbergChannel(30, l))
        assert float(f(0.5 + l * l / 4)) > 0


def test_quantum_defect_channel_normalised_and_decaying():
    c = rb.RydbergChannel(33, 0, 0, 3.1311804)
    f = rb.radial_function(c)
    x = f.x
    assert simpson(2 * x**2 * f.y**2, x=x) == pytest.approx(1.0, abs=1e-9)
    r_tail = 2.6 * c.nu**2
    assert abs(float(f(r_tail))) < 1e-3 * np.max(np.abs(f.values))
    # the solution still satisfies the Coulomb equation away from the core
    r = np.linspace(50, 1500, 50)
    h = 1e-2
    u = f(r)
    upp = (f(r + h) - 2 * u + f(r - h)) / h**2
    resid = -0.5 * upp - u / r - c.energy * u
    assert np.max(np.abs(resid)) < 1e-6 * np.max(np.abs(u))


def test_channel_energies_and_dos():
    c = rb.RydbergChannel(30, 0, 0, 0.5)
    assert c.energy == pytest.approx(-0.5 / 29.5**2)
    assert rb.density_of_states(30) == 27000


def test_local_momentum_values():
    k, rc = rb.local_momentum(30, 900.0)
    assert k == pytest.approx(1 / 30, rel=1e-14)
    assert rc == 1800.0
    assert rb.local_momentum(30, 1800.0)[0] == 0.0


def test_beyond_turning_point():
    with pytest.raises(rb.BeyondTurningPoint, match="1800"):
        rb.local_momentum(30, 1800.5)


@pytest.mark.parametrize("kwargs", [dict(n=3, l=3), dict(n=3, l=1, m=2), dict(n=2, l=0, mu=2.5)])
def test_invalid_channels(kwargs):
    with pytest.raises(ValueError):
        rb.RydbergChannel(**kwargs)


def test_r_max_too_small():
    with pytest.raises(ValueError, match="3 nu"):
        rb.radial_function(rb.RydbergChannel(30, 0), r_max=2000.0)


def test_coarse_grid_rejected():
    with pytest.raises(ValueError, match="too coarse"):
        rb.radial_function(rb.RydbergChannel(30, 0), step=0.5)


def test_build_basis_hydrogenic():
    b = rb.build_basis(30, 2)
    assert len(b) == 28
    assert all(c.m == 2 and c.n == 30 for c in b)
    assert rb.is_degenerate(b)


def test_build_basis_with_defects():
    defects = (3.1311804, 2.6460774, 1.3471161, 0.0165332)
    b = rb.build_basis(30, 0, defects)
    assert not rb.is_degenerate(b)
    for c in b:
        assert abs(c.nu - 30) < 1.0
    assert {c.l for c in b} == set(range(30))
    assert any(c.l == 0 and c.n == 33 for c in b)


@settings(max_examples=30, deadline=None)
@given(l_max=st.integers(0, 12), m=st.integers(0, 4), x=st.floats(-1, 1))
def test_angular_functions_match_scipy(l_max, m, x):
    from scipy.special import sph_harm_y

    ang = rb.angular_functions(l_max, m, np.array([x]))
    for l in range(l_max + 1):
        ref = 0.0 if l < m else float(np.real(sph_harm_y(l, m, np.arccos(x), 0.0)))
        assert ang[l, 0] == pytest.approx(ref, abs=1e-12)
