"""Rydberg-electron channels, radial functions and local kinematics.

Radial functions ``u_nl(r) = r R_nl(r)`` are obtained by inward Numerov
integration on a uniform grid in ``x = sqrt(r)``.  With ``u = x**0.5 * y``
the radial equation becomes ``y'' = Q(x) y`` with

    Q(x) = 8 x^2 (V(x^2) - E) + (2l + 1/2)(2l + 3/2) / x^2,   V(r) = -1/r,

which has no first-derivative term and a local wavenumber bounded by
``sqrt(8)``, so a single step size serves every ``n``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicHermiteSpline

from . import kernels

DEFAULT_STEP = 0.005  # spacing in sqrt(r)
_MAX_POINTS_PER_WAVELENGTH = 10


class BeyondTurningPoint(ValueError):
    """The perturber sits outside the classically allowed region."""


class NumericalError(RuntimeError):
    """A numerical procedure failed its own convergence checks."""


@dataclass(frozen=True, order=True)
class RydbergChannel:
    n: int
    l: int
    m: int = 0
    mu: float = 0.0

    def __post_init__(self):
        if not (0 <= self.l < self.n):
            raise ValueError(f"need 0 <= l < n, got n={self.n}, l={self.l}")
        if abs(self.m) > self.l:
            raise ValueError(f"need |m| <= l, got l={self.l}, m={self.m}")
        if not self.n - self.mu > 0:
            raise ValueError(f"effective quantum number must be positive, got {self.n - self.mu}")

    @property
    def nu(self) -> float:
        return self.n - self.mu

    @property
    def energy(self) -> float:
        return channel_energy(self)


def channel_energy(channel: RydbergChannel) -> float:
    """Bound-state energy ``-1 / (2 nu^2)`` in Hartree."""
    return -0.5 / channel.nu**2


def density_of_states(nu: float) -> float:
    """``d nu / d E = nu**3`` for ``E = -1/(2 nu^2)``."""
    if nu <= 0:
        raise ValueError("effective quantum number must be positive")
    return nu**3


def classical_radius(n: float) -> float:
    return 2.0 * n * n


def local_momentum(n: float, R):
    """Electron momentum at the perturber, ``k^2 / 2 = 1/R - 1/(2 n^2)``.

    Returns ``(k, R_c)``.  Raises :class:`BeyondTurningPoint` for ``R > R_c``.
    """
    R = np.asarray(R, dtype=float)
    rc = classical_radius(n)
    if np.any(R <= 0):
        raise ValueError("internuclear distance must be positive")
    if np.any(R > rc * (1 + 1e-14)):
        bad = float(np.max(R))
        raise BeyondTurningPoint(f"R={bad:g} beyond classical turning point R_c={rc:g}")
    k2 = np.clip(2.0 / R - 1.0 / (n * n), 0.0, None)
    k = np.sqrt(k2)
    return (float(k) if k.ndim == 0 else k), rc


@dataclass(frozen=True)
class RadialFunction:
    """Normalised ``u(r)`` and ``u'(r)`` on a sqrt-spaced grid.

    Calling the object interpolates ``u`` (and, with ``derivative=True``,
    ``u'``) at arbitrary radii using Hermite splines in ``x = sqrt(r)``.
    """

    channel: RydbergChannel
    grid: np.ndarray
    values: np.ndarray
    derivative: np.ndarray
    x: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "_spl_y", CubicHermiteSpline(self.x, self.y, self.dy, extrapolate=False))
        object.__setattr__(self, "_spl_dy", CubicHermiteSpline(self.x, self.dy, self.q * self.y, extrapolate=False))

    @property
    def r_max(self) -> float:
        return float(self.grid[-1])

    def _yy(self, r):
        r = np.asarray(r, dtype=float)
        x = np.sqrt(np.clip(r, 0.0, None))
        inside = (x >= self.x[0]) & (x <= self.x[-1])
        xs = np.where(inside, x, self.x[0])
        y = np.where(inside, self._spl_y(xs), 0.0)
        dy = np.where(inside, self._spl_dy(xs), 0.0)
        return x, y, dy

    def __call__(self, r, derivative: bool = False):
        x, y, dy = self._yy(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.sqrt(x) * y
            if not derivative:
                return u
            du = np.where(x > 0, (y + 2.0 * x * dy) / (4.0 * x**1.5), 0.0)
        return u, du

    def node_count(self) -> int:
        v = self.values[np.abs(self.values) > 1e-12 * np.max(np.abs(self.values))]
        return int(np.count_nonzero(np.signbit(v[1:]) != np.signbit(v[:-1])))


def radial_grid(r_max: float, step: float = DEFAULT_STEP) -> np.ndarray:
    """Uniform grid in ``x = sqrt(r)`` from ``step`` to ``sqrt(r_max)``."""
    n_pts = int(math.ceil(math.sqrt(r_max) / step))
    return step * np.arange(1, n_pts + 1, dtype=float)


def _q_of_x(x, l, energy):
    return 8.0 * x * x * (-1.0 / (x * x) - energy) + (2 * l + 0.5) * (2 * l + 1.5) / (x * x)


def _numerov_derivative(y, q, h):
    fy = q * y
    dy = np.empty_like(y)
    dy[1:-1] = (y[2:] - y[:-2]) / (2 * h) - h * (fy[2:] - fy[:-2]) / 12.0
    # one-sided fourth-order stencils at the ends
    dy[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h)
    dy[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * h)
    return dy


def _regularize(y, q, l):
    """Zero the inward solution inside the inner forbidden region where it diverges."""
    if l == 0:
        return y
    allowed = np.nonzero(q < 0)[0]
    if len(allowed) == 0:
        raise NumericalError("no classically allowed region on the radial grid")
    i_in = allowed[0]
    seg = np.abs(y[: i_in + 1])
    i_min = int(np.argmin(seg))
    # the divergent branch can cross zero right at the minimum
    if i_min + 2 < len(y) and y[i_min + 1] * y[i_min + 2] < 0:
        i_min += 1
    if i_min > 0:
        y = y.copy()
        y[: i_min + 1] = 0.0
    return y


def _outward_join(x, y_in, q, l, h):
    """Replace the inner part of an inward solution by an outward one.

    Only valid at an eigenvalue (integer ``n``): the outward solution starts
    on the regular branch ``y ~ x^(2l + 3/2)`` and the two are joined at the
    outer turning point.
    """
    i_join = int(np.nonzero(q < 0)[0][-1])
    p = 2 * l + 1.5

    def series(xx):  # u ~ r^(l+1) (1 - r/(l+1)) near a unit Coulomb charge
        return (xx / x[0]) ** p * (1.0 - xx * xx / (l + 1))

    y_out = kernels.numerov_inward(q[::-1][None, :], h, y_start=series(x[1]), y_end=series(x[0]))[0][::-1]
    scale = y_in[i_join] / y_out[i_join]
    y = y_in.copy()
    y[:i_join] = scale * y_out[:i_join]
    return y


def _solve_radial(channels, r_max, step):
    x = radial_grid(r_max, step)
    qs = np.array([_q_of_x(x, c.l, c.energy) for c in channels])
    kmax = np.sqrt(np.clip(-qs, 0, None).max())
    if kmax * step > 2 * np.pi / _MAX_POINTS_PER_WAVELENGTH:
        raise ValueError(f"grid too coarse: step {step} in sqrt(r) gives fewer than {_MAX_POINTS_PER_WAVELENGTH} points per wavelength")
    ys = kernels.numerov_inward(qs, step)
    out = []
    for c, y, q in zip(channels, ys, qs):
        if c.mu == 0.0:
            y = _outward_join(x, y, q, c.l, step)
        else:
            y = _regularize(y, q, c.l)
        peak = np.max(np.abs(y))
        if not (np.isfinite(peak) and peak > 0):
            raise NumericalError(f"radial solution vanished or overflowed for {c}")
        y = y / peak  # y^2 would underflow for deep inner starts
        norm = simpson(2.0 * x * x * y * y, x=x)
        if not (np.isfinite(norm) and norm > 0):
            raise NumericalError(f"normalisation failed for {c}")
        y = y / math.sqrt(norm)
        # sign convention: u > 0 near the origin, i.e. the outer lobe has
        # sign (-1)^(n - l - 1)
        i_out = np.nonzero(q < 0)[0][-1]
        if y[i_out] * (-1) ** (c.n - c.l - 1) < 0:
            y = -y
        dy = _numerov_derivative(y, q, step)
        r = x * x
        u = np.sqrt(x) * y
        du = (y + 2.0 * x * dy) / (4.0 * x**1.5)
        out.append(RadialFunction(channel=c, grid=r, values=u, derivative=du, x=x, y=y, dy=dy, q=q))
    return out


@functools.lru_cache(maxsize=4096)
def _cached(n, l, mu, r_max, step):
    return _solve_radial([RydbergChannel(n, l, 0, mu)], r_max, step)[0]


def default_r_max(nu: float) -> float:
    # the second form keeps the truncated tail below ~1e-9 of the peak at small nu
    return max(3.0 * (nu + 1.0) ** 2, 2.0 * nu * nu + 45.0 * nu + 30.0)


def radial_function(channel: RydbergChannel, r_max: float | None = None, step: float = DEFAULT_STEP) -> RadialFunction:
    """Normalised radial function of ``channel``.

    ``r_max`` must reach at least ``3 n^2``; ``step`` is the spacing in
    ``sqrt(r)``.  Results are cached per ``(n, l, mu, r_max, step)`` and do
    not depend on ``m``.
    """
    if r_max is None:
        r_max = default_r_max(channel.nu)
    if r_max < 3.0 * channel.nu**2:
        raise ValueError(f"r_max={r_max:g} must be at least 3 nu^2 = {3 * channel.nu**2:g}")
    return _cached(channel.n, channel.l, float(channel.mu), float(r_max), float(step))


def basis_radial_functions(channels, r_max: float | None = None, step: float = DEFAULT_STEP) -> list[RadialFunction]:
    """Radial functions for a basis, all on one shared grid."""
    if r_max is None:
        r_max = default_r_max(max(c.nu for c in channels))
    return [radial_function(c, r_max, step) for c in channels]


def build_basis(n_ref: int, M: int, quantum_defects=(), window: float = 1.0, l_max: int | None = None) -> list[RydbergChannel]:
    """Channels with projection ``M`` around the hydrogenic manifold ``n_ref``.

    Hydrogenic channels (``mu_l = 0``) contribute only ``n = n_ref``.  Channels
    with a quantum defect contribute every ``n`` whose effective quantum
    number lies strictly within ``window`` of ``n_ref``.
    """
    M = abs(M)
    defects = tuple(quantum_defects)
    l_top = n_ref - 1 if l_max is None else l_max
    chans = []
    for l in range(M, l_top + 1):
        mu = defects[l] if l < len(defects) else 0.0
        if mu == 0.0:
            if l < n_ref:
                chans.append(RydbergChannel(n_ref, l, M, 0.0))
            continue
        n_lo = max(l + 1, int(math.floor(n_ref + mu - window)))
        for n in range(n_lo, int(math.ceil(n_ref + mu + window)) + 1):
            if abs(n - mu - n_ref) < window and n - mu > 0:
                chans.append(RydbergChannel(n, l, M, mu))
    if not chans:
        raise ValueError("empty basis")
    return sorted(chans, key=lambda c: (c.l, c.n))


def is_degenerate(channels) -> bool:
    nus = {round(c.nu, 12) for c in channels}
    return len(nus) == 1


# ---------------------------------------------------------------------------
# angular functions
# ---------------------------------------------------------------------------


def angular_functions(l_max: int, m: int, x) -> np.ndarray:
    """Spherical harmonics at ``phi = 0`` as functions of ``x = cos(theta)``.

    Returns an array of shape ``(l_max + 1, len(x))``; rows ``l < |m|`` are
    zero.  Condon-Shortley phase, normalised so that
    ``2 pi * int |Y|^2 dx = 1``.
    """
    x = np.asarray(x, dtype=float)
    m = abs(m)
    out = np.zeros((l_max + 1,) + x.shape)
    if m > l_max:
        return out
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    # normalised P_m^m
    pmm = np.full_like(x, math.sqrt(1.0 / (4 * math.pi)))
    for k in range(1, m + 1):
        pmm = -math.sqrt((2 * k + 1) / (2 * k)) * s * pmm
    out[m] = pmm
    if m + 1 <= l_max:
        out[m + 1] = math.sqrt(2 * m + 3) * x * pmm
    for l in range(m + 2, l_max + 1):
        a = math.sqrt((4 * l * l - 1) / (l * l - m * m))
        b = math.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
        out[l] = a * (x * out[l - 1] - b * out[l - 2])
    return out
