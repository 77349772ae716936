"""Electron-perturber phase shifts and generalised scattering volumes."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

if TYPE_CHECKING:
    from .species import PhaseShiftTable

TAN_FLAG = 1e6


class PhaseShiftRangeError(ValueError):
    """Momentum outside the range covered by a tabulated phase shift."""


def born_coefficient(L: int, alpha: float) -> float:
    """Reduced polarizability ``alpha / ((4L^2 - 1)(2L + 3))`` for ``L >= 2``."""
    if L < 2:
        raise ValueError(f"Born form is only used for L >= 2, got L={L}")
    if alpha <= 0:
        raise ValueError("polarizability must be positive")
    return alpha / ((4 * L * L - 1) * (2 * L + 3))


@dataclass(frozen=True)
class PhaseShiftModel:
    """Phase shift ``delta_L(k)`` in one partial wave.

    ``kind="born"`` gives ``pi * alpha_bar * k**2``; ``kind="table"`` wraps a
    :class:`~rydline.species.PhaseShiftTable` with a piecewise cubic
    interpolant (``pchip`` by default) and never extrapolates.
    """

    L: int
    kind: str
    alpha: float | None = None
    table: "PhaseShiftTable | None" = None
    interpolation: str = "pchip"
    _interp: object = field(default=None, init=False, repr=False, compare=False)
    _dinterp: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == "born":
            born_coefficient(self.L, self.alpha if self.alpha is not None else -1.0)
        elif self.kind == "table":
            if self.table is None:
                raise ValueError("table model needs a PhaseShiftTable")
            k, d = self.table.k, self.table.delta
            if self.interpolation == "pchip":
                f = PchipInterpolator(k, d, extrapolate=False)
            elif self.interpolation == "cubic":
                f = CubicSpline(k, d, extrapolate=False)
            elif self.interpolation == "linear":
                f = _Linear(k, d)
            else:
                raise ValueError(f"unknown interpolation {self.interpolation!r}")
            object.__setattr__(self, "_interp", f)
            object.__setattr__(self, "_dinterp", f.derivative())
        else:
            raise ValueError(f"unknown phase-shift model kind {self.kind!r}")

    @classmethod
    def born(cls, L: int, alpha: float) -> "PhaseShiftModel":
        return cls(L=L, kind="born", alpha=float(alpha))

    @classmethod
    def from_table(cls, table: "PhaseShiftTable", interpolation: str = "pchip") -> "PhaseShiftModel":
        return cls(L=table.L, kind="table", table=table, interpolation=interpolation)

    @property
    def alpha_bar(self) -> float:
        if self.kind != "born":
            raise AttributeError("alpha_bar is only defined for the Born form")
        return born_coefficient(self.L, self.alpha)

    @property
    def k_range(self) -> tuple[float, float]:
        if self.kind == "born":
            return (0.0, np.inf)
        return (float(self.table.k[0]), float(self.table.k[-1]))

    def _check(self, k):
        k = np.asarray(k, dtype=float)
        if np.any(k < 0) or np.any(~np.isfinite(k)):
            raise ValueError("momentum must be finite and non-negative")
        lo, hi = self.k_range
        if np.any(k < lo) or np.any(k > hi):
            bad = k[(k < lo) | (k > hi)].ravel()[0]
            raise PhaseShiftRangeError(f"k={bad:.6g} outside phase-shift table range [{lo:.6g}, {hi:.6g}] for L={self.L}")
        return k

    def delta(self, k):
        k = self._check(k)
        if self.kind == "born":
            return np.pi * self.alpha_bar * k * k
        return self._interp(k)

    def slope(self, k):
        k = self._check(k)
        if self.kind == "born":
            return 2.0 * np.pi * self.alpha_bar * k
        return self._dinterp(k)


class _Linear:
    def __init__(self, k, d):
        self.k, self.d = np.asarray(k), np.asarray(d)

    def __call__(self, x):
        return np.interp(x, self.k, self.d)

    def derivative(self):
        slopes = np.diff(self.d) / np.diff(self.k)
        k = self.k

        def df(x):
            i = np.clip(np.searchsorted(k, x, side="right") - 1, 0, len(slopes) - 1)
            return slopes[i]

        return df


def phase_shift(model: PhaseShiftModel, k):
    """delta_L(k) in radians."""
    return model.delta(k)


def phase_shift_slope(model: PhaseShiftModel, k):
    """d delta_L / dk."""
    return model.slope(k)


def _tan_delta(model, k):
    d = model.delta(k)
    t = np.tan(d)
    if np.any(np.abs(t) > TAN_FLAG):
        warnings.warn(f"|tan delta_{model.L}| > {TAN_FLAG:g}: phase shift passes through a resonance", RuntimeWarning)
    return t


def scattering_volume(model: PhaseShiftModel, k):
    """Generalised scattering volume ``-tan(delta_L) / k**(2L+1)``."""
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr <= 0):
        raise ValueError("threshold divergence: scattering volume undefined at k = 0")
    return -_tan_delta(model, k_arr) / k_arr ** (2 * model.L + 1)


def calibrate_alpha_bar(model: PhaseShiftModel, k_max: float | None = None) -> float:
    """Least-squares ``alpha_bar`` such that ``delta ~ pi alpha_bar k^2``.

    Used for tabulated shifts when a Born-like constant is needed (series
    constants, charge estimates).
    """
    if model.kind == "born":
        return model.alpha_bar
    k, d = model.table.k, model.table.delta
    sel = k > 0
    if k_max is not None:
        sel &= k <= k_max
    x = np.pi * k[sel] ** 2
    return float(np.dot(x, d[sel]) / np.dot(x, x))
