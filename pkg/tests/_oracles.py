"""Independent reference implementations used by the tests.

Nothing here imports rydline: hydrogen functions come from scipy's
Laguerre polynomials and spherical harmonics.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln, genlaguerre, sph_harm_y


def hydrogen_R(n, l, r):
    """Normalised hydrogen radial function ``R_nl(r)`` (positive at the origin)."""
    r = np.asarray(r, dtype=float)
    rho = 2.0 * r / n
    lognorm = 0.5 * (3 * np.log(2.0 / n) + gammaln(n - l) - np.log(2.0 * n) - gammaln(n + l + 1))
    return np.exp(lognorm - rho / 2) * rho**l * genlaguerre(n - l - 1, 2 * l + 1)(rho)


def hydrogen_u(n, l, r):
    return np.asarray(r, dtype=float) * hydrogen_R(n, l, r)


def hydrogen_du(n, l, r, h=1e-5):
    return (hydrogen_u(n, l, r + h) - hydrogen_u(n, l, r - h)) / (2 * h)


def hydrogen_psi(n, l, m, x, y, z):
    r = np.sqrt(x * x + y * y + z * z)
    th = np.arctan2(np.sqrt(x * x + y * y), z)  # accurate near the axis
    ph = np.arctan2(y, x)
    return hydrogen_R(n, l, r) * sph_harm_y(l, m, th, ph)


def _fd_hessian(f, p0, h):
    E = np.eye(3)
    H = np.zeros((3, 3), complex)
    for i in range(3):
        for j in range(3):
            H[i, j] = (f(p0 + h * E[i] + h * E[j]) - f(p0 + h * E[i] - h * E[j]) - f(p0 - h * E[i] + h * E[j]) + f(p0 - h * E[i] - h * E[j])) / (4 * h * h)
    return H


def traceless_hessian(n, l, m, R, h=2e-3):
    """Traceless Cartesian Hessian of ``psi_nlm`` at ``(0, 0, R)``.

    Richardson-extrapolated central differences.
    """
    f = lambda p: hydrogen_psi(n, l, m, *p)
    p0 = np.array([0.0, 0.0, R])
    H = (4 * _fd_hessian(f, p0, h / 2) - _fd_hessian(f, p0, h)) / 3
    return H - np.trace(H) / 3 * np.eye(3)


def gradient(n, l, m, R, h=1e-4):
    f = lambda p: hydrogen_psi(n, l, m, *p)
    p0 = np.array([0.0, 0.0, R])
    return np.array([(f(p0 + h * e) - f(p0 - h * e)) / (2 * h) for e in np.eye(3)])
