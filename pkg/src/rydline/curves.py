"""Potential-energy curve container shared by all curve producers."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import PchipInterpolator

from .constants import HARTREE_TO_GHZ

PROVENANCES = ("diagonalization", "ion-pair", "expansion", "soft-core")


@dataclass(frozen=True)
class PotentialCurve:
    """Energy samples ``V(R)`` relative to the ``n_ref`` manifold (Hartree).

    ``L`` is the dominant electron-perturber partial wave when known.
    """

    M: int
    label: str
    n_ref: int
    R: np.ndarray
    V: np.ndarray
    provenance: str
    includes_polarization: bool = False
    L: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        R = np.array(self.R, dtype=float)
        V = np.array(self.V, dtype=float)
        if R.ndim != 1 or R.shape != V.shape:
            raise ValueError("R and V must be matching 1-D arrays")
        if len(R) and np.any(np.diff(R) <= 0):
            raise ValueError("R samples must be strictly increasing")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        R.setflags(write=False)
        V.setflags(write=False)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "V", V)

    @property
    def R_c(self) -> float:
        return 2.0 * self.n_ref**2

    @property
    def V_ghz(self) -> np.ndarray:
        return self.V * HARTREE_TO_GHZ

    def with_polarization(self, alpha: float) -> "PotentialCurve":
        """Add the ion-atom term ``-alpha / (2 R^4)``."""
        if self.includes_polarization:
            raise ValueError("curve already includes the polarization term")
        return replace(self, V=self.V - 0.5 * alpha / self.R**4, includes_polarization=True)

    def interpolator(self):
        """Monotone cubic interpolant; zero beyond the last sample."""
        f = PchipInterpolator(self.R, self.V, extrapolate=False)

        def call(r):
            r = np.asarray(r, dtype=float)
            out = f(r)
            return np.where(r > self.R[-1], 0.0, out)

        return call
