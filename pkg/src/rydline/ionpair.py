"""Dressed ion-pair model and trimmed heavy Rydberg series.

A perturber inside a Rydberg orbit acquires an effective fractional charge
set by the energy derivative of its scattering phase shift,

    Q_L(R) = -(d nu / dE)^(-1) * (1 / (pi k)) * d delta_L / dk,   k = k_n(R),

with ``(d nu/dE)^(-1) = n^-3``.  For Born phase shifts ``pi alpha_bar k^2``
this is ``-2 alpha_bar / n^3`` at every ``R``.  The curve

    V_L(R) = 1/(2 n^2) - 1/(2 (n - delta_L(k_n(R))/pi)^2),   R <= R_c = 2 n^2,

is Coulomb-like between the ion and the dressed perturber and supports a
finite vibrational series with energies ``alpha_bar/n^5 - R' / (v - eta)^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .basis import classical_radius, density_of_states, local_momentum
from .curves import PotentialCurve
from .scattering import PhaseShiftModel, born_coefficient, calibrate_alpha_bar


def _k(n, R):
    return local_momentum(n, R)[0]


def effective_charge(model: PhaseShiftModel, n: int, R):
    """Signed fractional charge on the perturber (electron charges).

    Positive ``d delta/dk`` (a time delay) gives ``Q < 0``.  At ``R = R_c``
    the Born form has the finite limit ``-2 alpha_bar / n^3``; tabulated
    shifts raise.
    """
    R_arr = np.asarray(R, dtype=float)
    k = np.atleast_1d(_k(n, R_arr))
    pref = -1.0 / density_of_states(n) / np.pi
    out = np.empty_like(k)
    zero = k == 0.0
    if np.any(zero):
        if model.kind != "born":
            raise ValueError("effective charge at k = 0 is only defined for the Born form")
        out[zero] = pref * 2.0 * np.pi * model.alpha_bar
    if np.any(~zero):
        kk = k[~zero]
        out[~zero] = pref * model.slope(kk) / kk
    return float(out[0]) if R_arr.ndim == 0 else out


def charge_magnitude(model: PhaseShiftModel, n: int, R):
    return np.abs(effective_charge(model, n, R))


def model_curve(model: PhaseShiftModel, n: int, R_grid, label: str | None = None, M: int = 0) -> PotentialCurve:
    """Ion-pair curve ``V_L(R)``; zero beyond ``R_c``."""
    R = np.asarray(R_grid, dtype=float)
    if np.any(R <= 0):
        raise ValueError("internuclear distances must be positive")
    rc = classical_radius(n)
    V = np.zeros_like(R)
    inside = R <= rc
    if np.any(inside):
        k = _k(n, np.minimum(R[inside], rc))
        d = np.atleast_1d(model.delta(k)) / np.pi
        if np.any(d >= n):
            raise ValueError("nonphysical phase shift: delta/pi >= n")
        V[inside] = 0.5 / n**2 - 0.5 / (n - d) ** 2
    from .constants import MOLECULE_LABELS

    return PotentialCurve(M=M, label=label or MOLECULE_LABELS.get(model.L, f"L{model.L}"), n_ref=n, R=R, V=V, provenance="ion-pair", L=model.L, meta={"model": model.kind})


def expansion_terms(alpha: float, L: int, n: int, R) -> dict:
    """Individual large-``n`` terms of the ion-pair curve plus polarization."""
    R = np.asarray(R, dtype=float)
    ab = born_coefficient(L, alpha)
    return {
        "polarization": -0.5 * alpha / R**4,
        "offset": np.full_like(R, ab / n**5),
        "coulomb": -2.0 * ab / (n**3 * R),
        "quadratic": -6.0 * ab * ab / (n**4 * R * R),
    }


def expansion_curve(alpha: float, L: int, n: int, R_grid, terms=("polarization", "offset", "coulomb", "quadratic"), label: str | None = None, M: int = 0) -> PotentialCurve:
    """Sum of the selected :func:`expansion_terms`."""
    R = np.asarray(R_grid, dtype=float)
    parts = expansion_terms(alpha, L, n, R)
    unknown = set(terms) - set(parts)
    if unknown:
        raise ValueError(f"unknown expansion terms {sorted(unknown)}")
    V = sum((parts[t] for t in terms), np.zeros_like(R))
    from .constants import MOLECULE_LABELS

    return PotentialCurve(M=M, label=label or MOLECULE_LABELS.get(L, f"L{L}"), n_ref=n, R=R, V=V, provenance="expansion", includes_polarization="polarization" in terms, L=L, meta={"terms": list(terms)})


# ---------------------------------------------------------------------------
# trimmed heavy Rydberg series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesConstants:
    n_ref: int
    L: int
    alpha_bar: float
    m_AB: float
    eta: float = 0.0

    @property
    def rydberg(self) -> float:
        """Nuclear Rydberg constant ``R' = 2 m_AB alpha_bar^2 / n^6`` (Hartree)."""
        return 2.0 * self.m_AB * self.alpha_bar**2 / self.n_ref**6

    @property
    def threshold_shift(self) -> float:
        return self.alpha_bar / self.n_ref**5

    @property
    def v_max(self) -> int:
        return int(math.floor(math.sqrt(2.0 * self.alpha_bar * self.m_AB / self.n_ref)))

    def energy(self, v, eta: float | None = None):
        """``alpha_bar/n^5 - R' / (v - eta)^2``."""
        eta = self.eta if eta is None else eta
        v = np.asarray(v, dtype=float)
        if np.any(v <= eta):
            raise ValueError("series energy needs v > eta")
        out = self.threshold_shift - self.rydberg / (v - eta) ** 2
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        return {"n_ref": self.n_ref, "L": self.L, "alpha_bar": self.alpha_bar, "m_AB": self.m_AB, "eta": self.eta, "rydberg": self.rydberg, "threshold_shift": self.threshold_shift, "v_max": self.v_max}

    @classmethod
    def from_dict(cls, d: dict) -> "SeriesConstants":
        return cls(n_ref=int(d["n_ref"]), L=int(d["L"]), alpha_bar=float(d["alpha_bar"]), m_AB=float(d["m_AB"]), eta=float(d.get("eta", 0.0)))


def series_constants(L: int, n: int, m_AB: float, alpha: float | None = None, model: PhaseShiftModel | None = None, eta: float = 0.0) -> SeriesConstants:
    """Series constants from a polarizability or a (table-calibrated) phase model."""
    if model is not None:
        ab = calibrate_alpha_bar(model)
    elif alpha is not None:
        ab = born_coefficient(L, alpha)
    else:
        raise ValueError("need alpha or a phase-shift model")
    if not (ab > 0 and m_AB > 0 and n > 0):
        raise ValueError("series constants need positive inputs")
    return SeriesConstants(n_ref=n, L=L, alpha_bar=ab, m_AB=m_AB, eta=eta)


# ---------------------------------------------------------------------------
# windowed charge
# ---------------------------------------------------------------------------


def windowed_charge(model: PhaseShiftModel, n: int, R: float, xi0):
    """Charge inside a sphere of radius ``xi0`` around the perturber.

    Uses the asymptotic wave ``sin(k xi - L pi/2 + delta)`` outside the
    potential; the energy derivative of the normalisation integral gives

        Q(xi0) = -n^-3 [ delta'/(pi k) - cos(2 k xi0 - L pi + delta) sin(delta) / (pi k^2) ].

    Its average over one period in ``xi0`` is :func:`effective_charge`.
    """
    k = _k(n, R)
    if k <= 0:
        raise ValueError("windowed charge undefined at k = 0")
    d = float(model.delta(k))
    dp = float(model.slope(k))
    L = model.L
    xi0 = np.asarray(xi0, dtype=float)
    osc = np.cos(2.0 * k * xi0 - L * np.pi + d) * np.sin(d) / (np.pi * k * k)
    out = -(dp / (np.pi * k) - osc) / density_of_states(n)
    return float(out) if out.ndim == 0 else out


def cycle_average(model: PhaseShiftModel, n: int, R: float, xi0: float) -> float:
    """Average of :func:`windowed_charge` over one period ``pi/k`` starting at ``xi0``."""
    k = _k(n, R)
    period = np.pi / k
    val, _ = quad(lambda x: windowed_charge(model, n, R, x), xi0, xi0 + period, epsabs=0, epsrel=1e-13, limit=200)
    return val / period
