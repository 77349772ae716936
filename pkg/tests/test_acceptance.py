"""End-to-end acceptance checks for Rb at n = 30.

Each test prints one ``PASS``/``FAIL`` line with the measured numbers and the
tolerance, then asserts.
"""

import math

import numpy as np
from _oracles import hydrogen_R
from conftest import synthetic_table
from scipy.integrate import quad, simpson
from scipy.special import roots_legendre

from rydline import basis, pec, softcore, vibronic
from rydline import ionpair as ip
from rydline.scattering import PhaseShiftModel, born_coefficient

N = 30


def _report(capsys, num, ok, msg):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {num:2d}: {msg}")
    assert ok, msg


def _rank(V):
    lam = np.linalg.eigvalsh(V)
    return int(np.sum(np.abs(lam) > 1e-12 * np.linalg.norm(V)))


def test_01_born_coefficient(capsys, rb):
    two_ab = 2 * born_coefficient(2, rb.polarizability)
    _report(capsys, 1, abs(two_ab - 6.08) <= 0.005, f"2 alpha_bar_2 = {two_ab:.6f} (target 6.08 +- 0.005)")


def test_02_charge_R_invariance(capsys, born2):
    R = np.linspace(50, 1710, 2000)
    Q = ip.charge_magnitude(born2, N, R)
    exact = 2 * born2.alpha_bar / N**3
    dev = float(np.max(np.abs(Q / exact - 1)))
    # the quoted 2.25185e-4 is the analytic value rounded to six digits
    rounds = f"{exact:.5e}" == "2.25185e-04"
    literal = float(np.max(np.abs(Q / 2.25185e-4 - 1)))
    ok = dev < 1e-10 and rounds
    _report(capsys, 2, ok, f"max rel dev of |Q| from 2 alpha_bar/n^3 = {exact:.9e} is {dev:.2e} (< 1e-10); rounds to 2.25185e-4: {rounds}; vs rounded literal {literal:.2e}")


def test_03_model_curve_point_value(capsys, born2):
    V900 = ip.model_curve(born2, N, np.array([900.0])).V[0]
    Vc = ip.model_curve(born2, N, np.array([basis.classical_radius(N)])).V[0]
    ok = abs(V900 - -1.2510e-7) <= 1e-11 and Vc == 0.0
    _report(capsys, 3, ok, f"V(900) = {V900:.8e} Eh (target -1.2510e-7 +- 1e-11, off by {V900 + 1.2510e-7:.2e}); V(R_c) = {Vc!r}")


def test_04_expansion_consistency(capsys, born2, rb):
    diffs = {}
    for n in (30, 60):
        R = np.linspace(n * n / 2, basis.classical_radius(n), 4001)
        exact = ip.model_curve(born2, n, R).V
        approx = ip.expansion_curve(rb.polarizability, 2, n, R, terms=("offset", "coulomb", "quadratic")).V
        diffs[n] = float(np.max(np.abs(exact - approx)))
    ratio = diffs[30] / diffs[60]
    _report(capsys, 4, ratio >= 2, f"max |Eq2 - expansion|: n=30 {diffs[30]:.3e}, n=60 {diffs[60]:.3e}, ratio {ratio:.1f} (>= 2)")


def test_05_diagonalization_vs_ionpair(capsys, rb, born2):
    R = np.linspace(200, 1500, 27)
    curves, _ = pec.adiabatic_curves(basis.build_basis(N, 2), 2, R, species=rb, born=True, keep_states=False)
    V_pp = pec.find_curve(curves, "dragonfly").V
    V_ip = ip.model_curve(born2, N, R).V
    dev = float(np.max(np.abs(V_pp / V_ip - 1)))
    _report(capsys, 5, dev < 0.05, f"Delta dragonfly vs ion-pair: max rel dev {dev:.4f} on R=[200,1500] (< 0.05)")


def test_06_rank_structure(capsys, rb_born_models, born2):
    ranks = {M: _rank(pec.assemble_interaction(basis.build_basis(N, M), M, 900.0, models=rb_born_models)) for M in (0, 1, 2)}
    models = {0: PhaseShiftModel.from_table(synthetic_table(0, 15.0)), 1: PhaseShiftModel.from_table(synthetic_table(1, 40.0)), 2: born2}
    r3 = _rank(pec.assemble_interaction(basis.build_basis(N, 0), 0, 900.0, included_L=(0, 1, 2), models=models))
    ok = all(r == 1 for r in ranks.values()) and r3 == 3
    _report(capsys, 6, ok, f"rank with L=2 only: {ranks} (all 1); L=0,1,2 at M=0: {r3} (3)")


def test_07_softcore(capsys, rb):
    beta = softcore.calibrate_beta(rb.polarizability)
    R = np.linspace(300, 1200, 7)
    chans = basis.build_basis(N, 2)
    sc, _ = softcore.softcore_curves(chans, 2, R, rb.polarizability, beta)
    pp, _ = pec.adiabatic_curves(chans, 2, R, species=rb, born=True, keep_states=False)
    dev = float(np.max(np.abs(pec.find_curve(sc, "dragonfly").V / pec.find_curve(pp, "dragonfly").V - 1)))
    _report(capsys, 7, dev < 0.10, f"soft-core (beta={beta:.4f}) vs pseudopotential dragonfly: max rel dev {dev:.4f} on R=[300,1200] (< 0.10)")


def test_08_radial_basis(capsys):
    chans = [basis.RydbergChannel(N, l) for l in range(N)]
    fs = basis.basis_radial_functions(chans)
    x = fs[0].x
    Y = np.array([f.y for f in fs])
    norms = simpson(2 * x**2 * Y * Y, x=x)
    # the full channel functions carry orthonormal spherical harmonics
    m = 0
    t, w = roots_legendre(64)
    A = basis.angular_functions(N - 1, m, t)
    G_ang = 2 * math.pi * (A * w) @ A.T
    res = max(float(np.max(np.abs(norms - 1))), float(np.max(np.abs(G_ang - np.eye(N)))))
    u1 = float(basis.radial_function(basis.RydbergChannel(1, 0))(1.0))
    ok = res < 1e-6 and abs(u1 - 0.735759) <= 1e-6
    _report(capsys, 8, ok, f"n=30 orthonormality residual {res:.2e} (< 1e-6); u_1s(1) = {u1:.7f} (0.735759 +- 1e-6)")


def test_09_hydrogen_levels(capsys):
    s = vibronic.bound_states(lambda r: -1.0 / r, 1.0, wall_R=0.0, box_R=400.0, step=2e-3, e_max=-1 / 200 + 1e-4)
    n = np.arange(1, 11)
    err = float(np.max(np.abs(s.energies - -0.5 / n**2))) if len(s) == 10 else math.inf
    _report(capsys, 9, err < 1e-8, f"{len(s)} levels n<=10, max |eps_n + 1/2n^2| = {err:.2e} (< 1e-8)")


def test_10_trimmed_series(capsys, rb, born2):
    curve = ip.model_curve(born2, N, np.linspace(30.0, basis.classical_radius(N), 3541), M=2)
    # the ion-pair curve omits the atomic polarization tail, so it is added here
    spec = vibronic.bound_states(vibronic.potential_function(curve, alpha=rb.polarizability), rb.reduced_mass, wall_R=30.0, box_R=3.0 * N**2)
    const = ip.series_constants(2, N, rb.reduced_mass, alpha=rb.polarizability)
    res = vibronic.analyze(spec, const, window=0.3)
    f, g = res["V_eff_fit"], res["delta_eps_fit"]
    count_ok = abs(len(spec) - 126) <= 3
    slope_ok = abs(f["slope"] - 1.0) <= 0.03 and f["r2"] > 0.999
    gap_ok = g["r2"] > 0.995
    msg = (
        f"{len(spec)} levels (126 +- 3: {count_ok}); V_eff slope {f['slope']:.4f}, R^2 {f['r2']:.6f} "
        f"(1.00 +- 0.03, > 0.999: {slope_ok}); delta_eps slope {g['slope']:.4f}, R^2 {g['r2']:.5f} (> 0.995: {gap_ok}); v_max {const.v_max}"
    )
    _report(capsys, 10, count_ok and slope_ok and gap_ok, msg)


def test_11_dipoles(capsys, rb):
    R = np.linspace(100, basis.classical_radius(N), 35)[:-1]
    curves, states = pec.adiabatic_curves(basis.build_basis(N, 0), 0, R, species=rb, born=True)
    j = [c.label for c in curves].index("dragonfly")
    d_max = float(np.max([abs(pec.dipole_moment(s)[1]) for s in states[j]]))

    chans = (basis.RydbergChannel(N, 0), basis.RydbergChannel(N, 1))
    st = pec.ElectronicState(R=900.0, eigenvalue=0.0, coefficients=np.array([1.0, 1.0]) / math.sqrt(2), basis=chans, M=0)
    d2 = pec.dipole_moment(st)[0]
    x, wx = roots_legendre(600)
    s = math.sqrt(3600.0)
    x, wx = 0.5 * s * (x + 1), 0.5 * s * wx
    t, wt = roots_legendre(8)
    r = x * x
    psi = (hydrogen_R(N, 0, r)[:, None] / math.sqrt(4 * math.pi) + hydrogen_R(N, 1, r)[:, None] * math.sqrt(3 / (4 * math.pi)) * t[None, :]) / math.sqrt(2)
    oracle = float(np.sum(2 * math.pi * (r**2 * 2 * x * wx)[:, None] * wt[None, :] * psi**2 * r[:, None] * t[None, :]))
    rel = abs(d2 / oracle - 1)
    _report(capsys, 11, d_max > 100 and rel < 1e-4, f"Sigma dragonfly max |d| = {d_max:.1f} D (> 100); two-channel dipole vs 3D quadrature rel {rel:.1e} (< 1e-4)")


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

    def excess(self, k, xi0):
        K = math.sqrt(k * k + 2 * self.V0)
        d = self.delta(k)
        N2 = 2 / (math.pi * k)
        C2 = N2 * math.sin(k * self.a + d) ** 2 / math.sin(K * self.a) ** 2
        opts = dict(limit=1000, epsabs=0, epsrel=1e-13)
        inner = quad(lambda x: C2 * math.sin(K * x) ** 2, 0, self.a, **opts)[0]
        outer = quad(lambda x: N2 * math.sin(k * x + d) ** 2, self.a, xi0, **opts)[0]
        free = quad(lambda x: N2 * math.sin(k * x) ** 2, 0, xi0, **opts)[0]
        return inner + outer - free


def test_12_windowed_charge(capsys, born2):
    worst_avg, worst_quad = 0.0, 0.0
    for R in (300.0, 900.0, 1500.0):
        k = basis.local_momentum(N, R)[0]
        xi0 = 50 / k
        avg = ip.cycle_average(born2, N, R, xi0)
        worst_avg = max(worst_avg, abs(avg / ip.effective_charge(born2, N, R) - 1))
        # Born shifts: the xi0 dependence is carried entirely by the asymptotic waves
        N2, d, L = 2 / (math.pi * k), float(born2.delta(k)), born2.L
        diff = lambda x: N2 * (math.sin(k * x - L * math.pi / 2 + d) ** 2 - math.sin(k * x - L * math.pi / 2) ** 2)
        xa = 10 / k
        direct = -quad(diff, xa, xi0, limit=1000, epsabs=0, epsrel=1e-11)[0] / N**3
        closed = ip.windowed_charge(born2, N, R, xi0) - ip.windowed_charge(born2, N, R, xa)
        worst_quad = max(worst_quad, abs(direct / closed - 1))
        # a square well has an exactly known interior, so the full excess is checkable
        for depth, a in ((0.2, 3.0), (1.0, 1.0)):
            well = _SquareWell(depth, a)
            direct = -well.excess(k, xi0) / N**3
            worst_quad = max(worst_quad, abs(ip.windowed_charge(well, N, R, xi0) / direct - 1))
    ok = worst_avg < 1e-10 and worst_quad < 1e-6
    _report(capsys, 12, ok, f"cycle average vs effective charge rel {worst_avg:.1e} (< 1e-10); direct probability quadrature vs closed form rel {worst_quad:.1e} (< 1e-6) at xi0 = 50/k")


def test_13_ring_nodes(capsys, rb):
    counts = {}
    for M in (1, 2):
        curves, states = pec.adiabatic_curves(basis.build_basis(N, M), M, np.array([700.0, 900.0]), species=rb, born=True)
        j = [c.label for c in curves].index("dragonfly")
        counts[M] = pec.ring_node_count(states[j][-1], radius=20.0)
    ok = all(counts[M] == 1 + 2 - M for M in counts)
    _report(capsys, 13, ok, f"half-ring (20 a0) sign changes: M=1 {counts[1]} (2), M=2 {counts[2]} (1)")
