"""Soft-core polarization potential in a degenerate Rydberg manifold.

The electron-perturber potential

    V(r) = -(alpha/2) / (beta^4 + |r - R|^4)

is finite everywhere, so first-order degenerate perturbation theory in a
hydrogenic manifold needs no threshold regularisation.  Matrix elements use
the Legendre expansion of ``V`` about the Rydberg core,

    V = sum_lam V_lam(r) P_lam(cos theta),
    V_lam(r) = (2 lam + 1)/(2 r R) * int_{|r-R|}^{r+R} V(xi) P_lam(x(xi)) xi dxi,

which terminates at ``lam = 2 l_max`` for a basis with largest ``l_max``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import roots_legendre, spherical_jn

from . import basis as rb
from . import kernels
from .pec import BasisError, build_curves, check_R_grid, diagonalize_along
from .scattering import born_coefficient

CALIBRATION_K = 0.05
CALIBRATION_DEFICIT = 0.01


class QuadratureError(RuntimeError):
    """Mesh doubling did not reach the requested accuracy."""


def softcore_potential(xi, alpha: float, beta: float):
    xi = np.asarray(xi, dtype=float)
    return -0.5 * alpha / (beta**4 + xi**4)


# ---------------------------------------------------------------------------
# Born phase shift and beta calibration
# ---------------------------------------------------------------------------


def softcore_born_phase(L: int, k: float, alpha: float, beta: float) -> float:
    """First Born phase ``-2k int V(r) j_L(kr)^2 r^2 dr`` of the soft-core potential."""
    if beta <= 0:
        raise ValueError("beta must be positive")

    def f(r):
        return spherical_jn(L, k * r) ** 2 * r * r / (beta**4 + r**4)

    # split at the core scale and integrate the slowly decaying tail in pieces
    edges = [0.0, beta] + list(np.geomspace(2 * beta, 400.0 / k + 2 * beta, 40))
    total = sum(quad(f, a, b, limit=200, epsabs=0, epsrel=1e-12)[0] for a, b in zip(edges[:-1], edges[1:]))
    # beyond the last edge j_L^2 ~ sin^2/(kr)^2 averages to 1/(2 k^2 r^2)
    r_end = edges[-1]
    total += 1.0 / (2.0 * k * k) / (3.0 * r_end**3)
    return alpha * k * total


def calibrate_beta(alpha: float, L: int = 2, k: float = CALIBRATION_K, deficit: float = CALIBRATION_DEFICIT) -> float:
    """Core radius whose Born phase is ``(1 - deficit) * pi * alpha_bar_L * k^2``.

    The soft-core Born phase only reaches the polarization value
    ``pi alpha_bar_L k^2`` in the limit ``beta -> 0``, so the match is made
    at a small fixed deficit.
    """
    if not 0 < deficit < 1:
        raise ValueError("deficit must lie in (0, 1)")
    target = (1.0 - deficit) * math.pi * born_coefficient(L, alpha) * k * k

    def g(beta):
        return softcore_born_phase(L, k, alpha, beta) - target

    return brentq(g, 1e-3, 200.0, xtol=1e-10, rtol=1e-12)


# ---------------------------------------------------------------------------
# quadrature meshes
# ---------------------------------------------------------------------------


def _gl_on(edges, order):
    t, w = roots_legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return (a + half * (t + 1.0)).ravel(), (half * w).ravel()


def _refine(edges, factor):
    if factor == 1:
        return edges
    pieces = [np.linspace(a, b, factor + 1)[:-1] for a, b in zip(edges[:-1], edges[1:])]
    return np.append(np.concatenate(pieces), edges[-1])


def _r_edges(R, beta, r_top, dx=0.5):
    """Panels uniform in sqrt(r) plus geometric grading around ``r = R``."""
    x_edges = np.arange(0.0, math.sqrt(r_top), dx)
    edges = list(x_edges**2) + [r_top]
    if R < r_top:
        span = [beta * 2.0**j for j in range(-3, 40) if beta * 2.0**j < r_top]
        edges += [R] + [R + d for d in span] + [R - d for d in span if R - d > 0]
    edges = np.unique(np.clip(np.array(edges), 0.0, r_top))
    return edges


@dataclass
class _Mesh:
    r: np.ndarray
    wr: np.ndarray
    wxi: np.ndarray  # (nr, nq) weights including the xi Jacobian
    xcos: np.ndarray  # (nr, nq)
    xi: np.ndarray


def _xi_mesh(r, R, beta, lam_max, order, factor):
    lo = np.abs(r - R)
    hi = r + R
    nx = max(8, lam_max + 4)
    # uniform split in x = cos(theta) resolves P_lam; geometric split near
    # the lower limit resolves the core of V
    x_nodes = np.linspace(1.0, -1.0, nx + 1)
    xi_x = np.sqrt(np.clip(r * r + R * R - 2.0 * r * R * x_nodes, 0.0, None))
    span = beta * 2.0 ** np.arange(-4, 12)
    edges = np.unique(np.concatenate([[lo, hi], xi_x, lo + span[lo + span < hi]]))
    edges = _refine(edges, factor)
    xi, w = _gl_on(edges, order)
    x = np.clip((r * r + R * R - xi * xi) / (2.0 * r * R), -1.0, 1.0)
    return xi, w * xi, x


def build_mesh(R, beta, r_top, lam_max, factor=1, order_r=8, order_xi=6) -> _Mesh:
    edges = _refine(_r_edges(R, beta, r_top), factor)
    r, wr = _gl_on(edges, order_r)
    rows = [_xi_mesh(ri, R, beta, lam_max, order_xi, factor) for ri in r]
    nq = max(len(row[0]) for row in rows)
    xi = np.zeros((len(r), nq))
    wxi = np.zeros_like(xi)
    xc = np.zeros_like(xi)
    for i, (a, b, c) in enumerate(rows):
        xi[i, : len(a)], wxi[i, : len(a)], xc[i, : len(a)] = a, b, c
    return _Mesh(r=r, wr=wr, wxi=wxi, xcos=xc, xi=xi)


def multipole_potential(mesh: _Mesh, R, alpha, beta, lam_max) -> np.ndarray:
    """``V_lam`` at the radial nodes; shape ``(lam_max + 1, nr)``."""
    pot = softcore_potential(mesh.xi, alpha, beta)
    mom = kernels.legendre_moments(mesh.wxi, mesh.xcos, pot, lam_max)
    lam = np.arange(lam_max + 1)[:, None]
    return (2 * lam + 1) / (2.0 * mesh.r[None, :] * R) * mom


def angular_couplings(channels, lam_max) -> np.ndarray:
    """``A[lam, a, b] = int Y*_{l_a M} Y_{l_b M} P_lam dOmega``."""
    M = channels[0].m
    l_max = max(c.l for c in channels)
    t, w = roots_legendre(2 * l_max + lam_max + 4)
    ang = rb.angular_functions(l_max, M, t)
    P = np.empty((lam_max + 1, len(t)))
    P[0] = 1.0
    if lam_max >= 1:
        P[1] = t
    for lam in range(1, lam_max):
        P[lam + 1] = ((2 * lam + 1) * t * P[lam] - lam * P[lam - 1]) / (lam + 1)
    th = np.array([ang[c.l] for c in channels])
    return 2.0 * np.pi * np.einsum("aq,bq,lq,q->lab", th, th, P, w)


class SoftcoreBuilder:
    """Matrix of the soft-core potential in a degenerate manifold."""

    def __init__(self, channels, alpha: float, beta: float, rtol: float = 1e-6, atol: float = 1e-16, check: bool = True):
        channels = tuple(channels)
        if not channels:
            raise BasisError("empty basis")
        M = channels[0].m
        if any(c.m != M for c in channels):
            raise BasisError("channels must share M")
        if not rb.is_degenerate(channels):
            raise BasisError("soft-core perturbation theory needs a single degenerate manifold")
        if beta <= 0:
            raise ValueError("beta must be positive")
        self.channels = channels
        self.M = M
        self.alpha, self.beta = float(alpha), float(beta)
        self.n_ref = channels[0].n
        self.radials = rb.basis_radial_functions(channels)
        self.lam_max = 2 * max(c.l for c in channels)
        self.A = angular_couplings(channels, self.lam_max)
        self.rtol, self.atol, self.check = rtol, atol, check
        self.detuning = np.zeros(len(channels))
        self.last_error = 0.0

    def _matrix(self, R, factor):
        r_top = self.radials[0].r_max
        mesh = build_mesh(R, self.beta, r_top, self.lam_max, factor)
        Vl = multipole_potential(mesh, R, self.alpha, self.beta, self.lam_max)
        U = np.array([f(mesh.r) for f in self.radials])
        Uw = U * mesh.wr
        # I[lam, a, b] = int u_a u_b V_lam dr
        I = np.einsum("aq,lq,bq->lab", Uw, Vl, U)
        V = np.einsum("lab,lab->ab", self.A, I)
        return 0.5 * (V + V.T)

    def matrix(self, R: float) -> np.ndarray:
        if self.alpha == 0.0:
            return np.zeros((len(self.channels),) * 2)
        V = self._matrix(R, 1)
        if self.check:
            V2 = self._matrix(R, 2)
            err = float(np.max(np.abs(V2 - V)))
            self.last_error = err
            if err > self.atol + self.rtol * np.max(np.abs(V2)):
                raise QuadratureError(f"soft-core quadrature not converged at R={R:g}: mesh doubling changed elements by {err:.3g}")
            V = V2
        return V


def softcore_matrix_element(a, b, R: float, alpha: float, beta: float, check: bool = True) -> float:
    """``<a| V_softcore |b>`` in Hartree."""
    if a.m != b.m:
        raise BasisError("channels must share M")
    if alpha == 0.0:
        return 0.0
    chans = (a,) if a == b else (a, b)
    V = SoftcoreBuilder(chans, alpha, beta, check=check).matrix(R)
    return float(V[0, -1])


def softcore_matrix(channels, R: float, alpha: float, beta: float, check: bool = True) -> np.ndarray:
    return SoftcoreBuilder(channels, alpha, beta, check=check).matrix(R)


def softcore_curves(channels, M: int, R_grid, alpha: float, beta: float, track: bool = True, label_L=(0, 1, 2, 3, 4), keep_states: bool = False, check: bool = True):
    """Degenerate perturbation theory curves of the soft-core potential.

    Returns ``(curves, states)`` as :func:`rydline.pec.adiabatic_curves`.
    """
    R_grid = check_R_grid(R_grid)
    if any(c.m != M for c in channels):
        raise BasisError(f"basis channels must all have m = M = {M}")
    b = SoftcoreBuilder(channels, alpha, beta, check=check)
    label_L = [L for L in label_L if L >= abs(M)]
    energies, vecs, labels = diagonalize_along(b.matrix, b.channels, b.radials, M, R_grid, b.detuning, track, label_L)
    meta = {"alpha": alpha, "beta": beta}
    return build_curves(energies, vecs, labels, b.channels, M, b.n_ref, R_grid, "soft-core", meta, None, keep_states)
