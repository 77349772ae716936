"""Vibrational bound states on a potential curve and Rydberg-series analysis.

Bound states of

    -1/(2 m) psi'' + [V(R) + J(J+1)/(2 m R^2)] psi = E psi

between a hard wall and a Dirichlet box are located by Sturm bisection:
the number of sign changes of an outward Numerov shot at energy ``E`` equals
the number of eigenvalues below ``E``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .curves import PotentialCurve
from .ionpair import SeriesConstants

MIN_POINTS_PER_WAVELENGTH = 12


class SpectrumError(RuntimeError):
    """Bound-state search failed its consistency checks."""


@dataclass(frozen=True)
class VibrationalSpectrum:
    v: np.ndarray
    energies: np.ndarray
    m_AB: float
    J: int
    wall_R: float
    box_R: float
    step: float
    curve_label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        if len(e) > 1 and np.any(np.diff(e) <= 0):
            raise SpectrumError("energies must increase strictly with v")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "v", np.asarray(self.v, dtype=int))

    def __len__(self):
        return len(self.energies)


def potential_function(curve: PotentialCurve | None = None, alpha: float | None = None, func=None):
    """Callable nuclear potential.

    ``curve`` is interpolated (monotone cubic, zero beyond its last sample);
    ``alpha`` adds the ion-atom term ``-alpha/(2R^4)`` on the whole grid;
    ``func`` is an arbitrary callable used instead of a curve.
    """
    if curve is not None and alpha is not None and curve.includes_polarization:
        raise ValueError("curve already includes the polarization term")
    base = curve.interpolator() if curve is not None else func
    if base is None:
        base = lambda r: np.zeros_like(np.asarray(r, dtype=float))

    def V(r):
        r = np.asarray(r, dtype=float)
        out = np.nan_to_num(base(r), nan=0.0)
        if curve is not None:
            out = np.where(r < curve.R[0], base(np.full_like(r, curve.R[0])), out)
        if alpha is not None:
            out = out - 0.5 * alpha / r**4
        return out

    return V


def _grid(wall, box, step):
    n = int(math.ceil((box - wall) / step))
    return np.linspace(wall, box, n + 1)


def _count(q, E, h, two_m, origin):
    c, _ = kernels.sturm_scan(q, E, h, two_m, origin)
    return c


def bound_states(V, m_AB: float, J: int = 0, wall_R: float = 30.0, box_R: float | None = None, step: float | None = None, e_min: float | None = None, e_max: float = 0.0, tol: float = 1e-15, points_per_wavelength: float = 50.0, curve_label: str = "") -> VibrationalSpectrum:
    """All bound levels below ``e_max`` of the nuclear Hamiltonian.

    ``V`` is a callable or a :class:`PotentialCurve`.  A ``wall_R`` of zero
    places the singular point at the grid origin (used for Coulomb tests).
    The grid step defaults to ``points_per_wavelength`` points per local
    wavelength at the potential minimum; it must give at least 12.
    Deeply forbidden grid points where ``h^2 f / 12 > 1/2`` are capped at
    that value (count in ``meta["n_capped"]``).
    """
    if isinstance(V, PotentialCurve):
        curve_label = curve_label or V.label
        if box_R is None:
            box_R = 3.0 * V.n_ref**2
        V = potential_function(V)
    if box_R is None:
        raise ValueError("box_R required for a callable potential")
    if not box_R > wall_R >= 0:
        raise ValueError("need box_R > wall_R >= 0")
    if m_AB <= 0:
        raise ValueError("mass must be positive")
    two_m = 2.0 * m_AB
    probe = np.linspace(max(wall_R, 1e-6), box_R, 20001)
    probe = probe[1:] if wall_R == 0 else probe
    v_probe = V(probe) + J * (J + 1) / (two_m * probe**2)
    v_min = float(np.min(v_probe))
    if e_min is None:
        e_min = v_min
    k_max = math.sqrt(max(two_m * (e_max - v_min), 0.0))
    if step is None:
        step = 2 * math.pi / (points_per_wavelength * k_max) if k_max > 0 else (box_R - wall_R) / 1000
    if k_max * step > 2 * math.pi / MIN_POINTS_PER_WAVELENGTH:
        raise SpectrumError(f"grid step {step:g} gives fewer than {MIN_POINTS_PER_WAVELENGTH} points per nuclear wavelength")
    R = _grid(wall_R, box_R, step)
    h = float(R[1] - R[0])
    Rin = R.copy()
    if wall_R == 0:
        Rin[0] = R[1]  # value unused; avoids evaluating the singularity
    q = two_m * (V(Rin) + J * (J + 1) / (two_m * Rin**2))
    origin = wall_R == 0
    # Numerov flips sign spuriously once h^2 f / 12 > 1; deep in a forbidden
    # region the solution is negligible, so cap f there at 6 / h^2
    q_cap = two_m * e_min + 6.0 / (h * h)
    n_capped = int(np.count_nonzero(q > q_cap))
    q = np.minimum(q, q_cap)
    n_lo = int(_count(q, np.array([e_min]), h, two_m, origin)[0])
    n_hi = int(_count(q, np.array([e_max]), h, two_m, origin)[0])
    n_levels = n_hi - n_lo
    if n_levels <= 0:
        return VibrationalSpectrum(v=np.array([], int), energies=np.array([]), m_AB=m_AB, J=J, wall_R=wall_R, box_R=box_R, step=h, curve_label=curve_label)
    # batched bisection: level j is the energy where the count passes n_lo + j
    targets = np.arange(n_lo, n_hi)
    lo = np.full(n_levels, e_min)
    hi = np.full(n_levels, e_max)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        c = _count(q, mid, h, two_m, origin)
        above = c > targets
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
        if np.all(hi - lo <= tol * np.maximum(1.0, np.abs(mid))) or np.all(hi - lo <= tol):
            break
    E = 0.5 * (lo + hi)
    # node check on the end of each bracket
    c_lo = _count(q, lo, h, two_m, origin)
    c_hi = _count(q, hi, h, two_m, origin)
    if np.any(c_lo != targets) or np.any(c_hi != targets + 1):
        raise SpectrumError("node-count discontinuity: a level was missed or duplicated")
    return VibrationalSpectrum(v=targets.copy(), energies=E, m_AB=m_AB, J=J, wall_R=wall_R, box_R=box_R, step=h, curve_label=curve_label, meta={"n_below_emin": n_lo, "n_capped": n_capped})


def wavefunction(V, energy: float, m_AB: float, J: int = 0, wall_R: float = 30.0, box_R: float = 2700.0, step: float = 0.25):
    """Outward Numerov solution at ``energy`` (unnormalised grid values)."""
    if isinstance(V, PotentialCurve):
        V = potential_function(V)
    R = _grid(wall_R, box_R, step)
    h = R[1] - R[0]
    f = 2.0 * m_AB * (V(R) + J * (J + 1) / (2.0 * m_AB * R**2) - energy)
    c = 1.0 - h * h * f / 12.0
    y = np.zeros_like(R)
    y[1] = h
    for i in range(1, len(R) - 1):
        y[i + 1] = ((12.0 - 10.0 * c[i]) * y[i] - c[i - 1] * y[i - 1]) / c[i + 1]
    y /= math.sqrt(np.sum(y * y) * h)
    return R, y


# ---------------------------------------------------------------------------
# Rydberg-series analysis
# ---------------------------------------------------------------------------


def effective_quantum_numbers(energies, constants: SeriesConstants) -> np.ndarray:
    """``sqrt(R' / (alpha_bar/n^5 - eps))`` per level."""
    e = np.asarray(getattr(energies, "energies", energies), dtype=float)
    gap = constants.threshold_shift - e
    if np.any(gap <= 0):
        raise ValueError("levels must lie below the series threshold alpha_bar/n^5")
    return np.sqrt(constants.rydberg / gap)


def scaled_gaps(energies, rydberg: float) -> np.ndarray:
    """``|2 (eps_v - eps_{v-1}) / R'|^(-1/3)`` for each adjacent pair."""
    e = np.asarray(getattr(energies, "energies", energies), dtype=float)
    if len(e) < 2:
        raise ValueError("need at least two levels")
    d = np.diff(e)
    if np.any(d == 0):
        raise ValueError("degenerate adjacent levels")
    return np.abs(2.0 * d / rydberg) ** (-1.0 / 3.0)


@dataclass(frozen=True)
class DefectFit:
    eta: float
    slope: float
    intercept: float
    r2: float
    eta_unit_slope: float
    n_points: int

    def to_dict(self):
        return {k: getattr(self, k) for k in ("eta", "slope", "intercept", "r2", "eta_unit_slope", "n_points")}


def linear_fit(x, y):
    """Least-squares line; returns ``(slope, intercept, r2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.vstack([x, np.ones_like(x)]).T
    (a, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (a * x + b)
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss if ss > 0 else 1.0
    return float(a), float(b), float(r2)


def top_window(v, fraction: float = 0.3):
    """Mask selecting the top ``fraction`` of the ``v`` range."""
    v = np.asarray(v, dtype=float)
    cut = v.max() - fraction * (v.max() - v.min())
    return v >= cut


def fit_defect(v, V_eff, window: float = 0.3, min_levels: int = 10) -> DefectFit:
    """Fit ``V_eff = slope * v + intercept`` over the top ``window`` of levels.

    ``eta`` is ``-intercept/slope`` of the free fit; ``eta_unit_slope`` is
    the mean of ``v - V_eff`` (the unit-slope fit).
    """
    v = np.asarray(v, dtype=float)
    y = np.asarray(V_eff, dtype=float)
    if v.shape != y.shape:
        raise ValueError("v and V_eff must have the same length")
    if len(v) < min_levels:
        raise ValueError(f"insufficient levels: {len(v)} < {min_levels}")
    sel = top_window(v, window)
    if sel.sum() < min_levels:
        raise ValueError(f"insufficient levels in window: {int(sel.sum())} < {min_levels}")
    a, b, r2 = linear_fit(v[sel], y[sel])
    eta_unit = float(np.mean(v[sel] - y[sel]))
    return DefectFit(eta=-b / a, slope=a, intercept=b, r2=r2, eta_unit_slope=eta_unit, n_points=int(sel.sum()))


def analyze(spectrum, constants: SeriesConstants, window: float = 0.3) -> dict:
    """Series analysis summary of a spectrum."""
    Veff = effective_quantum_numbers(spectrum.energies, constants)
    fit = fit_defect(spectrum.v, Veff, window)
    de = scaled_gaps(spectrum.energies, constants.rydberg)
    vg = np.asarray(spectrum.v[1:], dtype=float)
    sel = top_window(vg, window)
    g_slope, g_int, g_r2 = linear_fit(vg[sel], de[sel])
    return {
        "n_levels": len(spectrum.energies),
        "v_max": constants.v_max,
        "level_count_minus_v_max": len(spectrum.energies) - constants.v_max,
        "V_eff_fit": fit.to_dict(),
        "delta_eps_fit": {"slope": g_slope, "intercept": g_int, "r2": g_r2},
        "V_eff": Veff,
        "delta_eps": de,
    }
