"""Contact pseudopotential in a Rydberg basis and adiabatic curves.

For the perturber at ``R z``, each partial wave ``L`` and projection ``M``
contributes a separable term

    V_ab = c_LM * a_L(k) * w_a * w_b,       a_L(k) = -tan(delta_L(k)) / k^(2L+1)

where ``w_a`` collects the value (L=0), gradient (L=1) or traceless Hessian
(L=2) of the basis function ``a`` at the perturber and ``k = k_n(R)`` is the
local momentum of the reference manifold.  Within one degenerate manifold
every term is therefore rank one.  The D-wave weights are closed forms in
``u(R)`` and ``u'(R)``, using ``u'' = (l(l+1)/r^2 - 2/r + 1/nu^2) u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import roots_legendre

from . import basis as rb
from .basis import BeyondTurningPoint, RydbergChannel, local_momentum
from .constants import AU_DIPOLE_TO_DEBYE, MOLECULE_LABELS
from .curves import PotentialCurve
from .scattering import PhaseShiftModel, scattering_volume

# prefactors c_LM of the separable contact terms
CONTACT_PREFACTOR = {
    (0, 0): 0.5,
    (1, 0): 1.5,
    (1, 1): 0.75,
    (2, 0): 5.0 / 8.0,
    (2, 1): 15.0 / 4.0,
    (2, 2): 15.0 / 16.0,
}
MAX_CONTACT_L = 2
TRACK_MIN_OVERLAP = 0.5
LABEL_MIN_WEIGHT = 0.3
MIXED = -1  # label code for eigenvectors without a dominant partial wave


class BasisError(ValueError):
    """A basis cannot host the requested symmetry or label."""


@dataclass(frozen=True)
class ElectronicState:
    """Adiabatic eigenvector at one internuclear distance."""

    R: float
    eigenvalue: float
    coefficients: np.ndarray
    basis: tuple
    M: int
    label: str = ""

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.shape != (len(self.basis),):
            raise ValueError("one coefficient per basis channel required")
        if abs(np.linalg.norm(c) - 1.0) > 1e-10:
            raise ValueError("state coefficients must be normalised")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "basis", tuple(self.basis))


def f_factor(l: int, R: float, nu: float) -> float:
    """``f_nl(R) = 6 + 3 l(l+1) - 4R + 2R^2/nu^2`` of the M=0 D-wave weight."""
    return 6.0 + 3.0 * l * (l + 1) - 4.0 * R + 2.0 * R * R / (nu * nu)


def g_factor(l: int) -> float:
    """``g_l = sqrt((2l+1)(l+2)(l+1)l(l-1))`` of the M=2 D-wave weight."""
    return math.sqrt(max((2 * l + 1) * (l + 2) * (l + 1) * l * (l - 1), 0))


def contact_weight(channel: RydbergChannel, L: int, M: int, R: float, u: float, du: float) -> float:
    """Weight ``w_a`` of one channel in the (L, M) contact term."""
    l, nu = channel.l, channel.nu
    M = abs(M)
    if M > L or M > l:
        return 0.0
    s = math.sqrt(2 * l + 1)
    if L == 0:
        return s * u / R
    if L == 1:
        if M == 0:
            return s * (du / R - u / R**2)
        return s * math.sqrt(l * (l + 1)) * u / R**2
    if L == 2:
        if M == 0:
            return s * (f_factor(l, R, nu) * u - 6.0 * R * du) / R**3
        if M == 1:
            return s * math.sqrt(l * (l + 1)) * (R * du - 2.0 * u) / R**3
        return g_factor(l) * u / R**3
    raise NotImplementedError(f"closed-form contact terms exist for L <= {MAX_CONTACT_L}, got L={L}")


def contact_vector(channels, radials, L: int, M: int, R: float) -> np.ndarray:
    """Vector of :func:`contact_weight` over a basis."""
    out = np.empty(len(channels))
    for i, (c, f) in enumerate(zip(channels, radials)):
        u, du = f(R, derivative=True)
        out[i] = contact_weight(c, L, M, R, float(u), float(du))
    return out


def contact_strength(model: PhaseShiftModel, k: float) -> float:
    """``a_L(k)``; zero at the turning point ``k = 0`` where the contact term is switched off."""
    if k <= 0.0:
        return 0.0
    return float(scattering_volume(model, k))


def contact_matrix_element(a: RydbergChannel, b: RydbergChannel, L: int, M: int, R: float, shifts: PhaseShiftModel, n_ref: int | None = None) -> float:
    """Single ``(L, M)`` contact element between channels ``a`` and ``b``.

    ``k`` is evaluated for ``n_ref`` (defaults to ``a.n``).
    """
    if a.m != M or b.m != M:
        raise BasisError(f"channel projections ({a.m}, {b.m}) differ from M={M}")
    n_ref = a.n if n_ref is None else n_ref
    k, _ = local_momentum(n_ref, R)
    r_max = rb.default_r_max(max(a.nu, b.nu))
    fa = rb.radial_function(a, r_max)
    fb = rb.radial_function(b, r_max)
    ua, dua = fa(R, derivative=True)
    ub, dub = fb(R, derivative=True)
    wa = contact_weight(a, L, M, R, float(ua), float(dua))
    wb = contact_weight(b, L, M, R, float(ub), float(dub))
    if wa == 0.0 or wb == 0.0:
        return 0.0
    return CONTACT_PREFACTOR[(L, abs(M))] * contact_strength(shifts, k) * wa * wb


def species_models(species, included_L, born: bool = False) -> dict:
    """Phase-shift models for ``included_L`` from a species."""
    return {L: species.phase_model(L, force_born=born and L >= 2) for L in included_L}


def _resolve_n_ref(channels, n_ref):
    if n_ref is not None:
        return n_ref
    hyd = [c.n for c in channels if c.mu == 0.0]
    return max(set(hyd), key=hyd.count) if hyd else channels[0].n


class InteractionBuilder:
    """Precomputed basis data for repeated assembly at many ``R``."""

    def __init__(self, channels, M: int, models: dict, n_ref: int | None = None, step: float = rb.DEFAULT_STEP):
        if not channels:
            raise BasisError("empty basis")
        if any(c.m != M for c in channels):
            raise BasisError(f"basis channels must all have m = M = {M}")
        self.channels = tuple(channels)
        self.M = M
        self.models = dict(models)
        for L in self.models:
            if L > MAX_CONTACT_L:
                raise NotImplementedError(f"contact terms are implemented for L <= {MAX_CONTACT_L}")
        self.n_ref = _resolve_n_ref(self.channels, n_ref)
        self.radials = rb.basis_radial_functions(self.channels, step=step)
        e_ref = -0.5 / self.n_ref**2
        self.detuning = np.array([c.energy - e_ref for c in self.channels])

    @property
    def R_c(self) -> float:
        return rb.classical_radius(self.n_ref)

    def contact_terms(self, R: float):
        """List of ``(L, coefficient, vector)`` with ``V = sum coefficient * v v^T``."""
        k, rc = local_momentum(self.n_ref, R)
        terms = []
        for L, model in sorted(self.models.items()):
            if self.M > L:
                continue
            a = contact_strength(model, k)
            v = contact_vector(self.channels, self.radials, L, self.M, R)
            terms.append((L, CONTACT_PREFACTOR[(L, self.M)] * a, v))
        return terms

    def matrix(self, R: float, detunings: bool = True) -> np.ndarray:
        V = np.zeros((len(self.channels),) * 2)
        for _, coef, v in self.contact_terms(R):
            V += coef * np.outer(v, v)
        V = 0.5 * (V + V.T)
        if detunings:
            V[np.diag_indices_from(V)] += self.detuning
        return V


def assemble_interaction(channels, M: int, R: float, species=None, included_L=(2,), models: dict | None = None, n_ref: int | None = None, born: bool = False) -> np.ndarray:
    """Contact interaction matrix (Hartree) relative to the ``n_ref`` energy.

    Either ``species`` or explicit ``models`` (L -> PhaseShiftModel) must be
    given.  Channel detunings sit on the diagonal.
    """
    if models is None:
        if species is None:
            raise ValueError("need species or explicit phase-shift models")
        models = species_models(species, included_L, born)
    else:
        models = {L: models[L] for L in included_L}
    return InteractionBuilder(channels, M, models, n_ref).matrix(R)


# ---------------------------------------------------------------------------
# partial-wave labels
# ---------------------------------------------------------------------------

_GL_T, _GL_W = roots_legendre(64)


def evaluate_channels(channels, radials, z, rho) -> np.ndarray:
    """Basis functions at ``(z, rho, phi=0)``; shape ``(n_channels,) + z.shape``."""
    z = np.asarray(z, dtype=float)
    rho = np.asarray(rho, dtype=float)
    r = np.sqrt(z * z + rho * rho)
    r_safe = np.maximum(r, 1e-6)
    ct = np.where(r > 0, z / r_safe, 1.0)
    l_max = max(c.l for c in channels)
    M = channels[0].m
    ang = rb.angular_functions(l_max, M, ct)
    out = np.empty((len(channels),) + z.shape)
    cache = {}
    for i, (c, f) in enumerate(zip(channels, radials)):
        key = (c.n, c.l, c.mu)
        if key not in cache:
            cache[key] = f(r_safe) / r_safe
        out[i] = cache[key] * ang[c.l]
    return out


def partial_wave_vectors(channels, radials, M: int, R: float, L_values, k: float | None = None) -> dict:
    """Local ``(L, M)`` content of each basis function around the perturber.

    Projects every basis function onto ``Y_LM`` over a small sphere centred
    on the perturber (radius ``0.3/k``, capped at ``0.05 R``).  Within a
    degenerate manifold the vectors are proportional to the closed-form
    contact weights for ``L <= 2`` and extend the labelling to any ``L``.
    """
    if k is None:
        k = local_momentum(_resolve_n_ref(channels, None), R)[0]
    s = 0.05 * R if k <= 0 else min(0.3 / k, 0.05 * R)
    t, w = _GL_T, _GL_W
    z = R + s * t
    rho = s * np.sqrt(1.0 - t * t)
    psi = evaluate_channels(channels, radials, z, rho)
    L_values = list(L_values)
    ang = rb.angular_functions(max(L_values), M, t)
    return {L: 2.0 * np.pi * psi @ (w * ang[L]) for L in L_values if L >= abs(M)}


def label_for(L: int | None) -> str:
    if L is None:
        return "manifold"
    if L == MIXED:
        return "mixed"
    return MOLECULE_LABELS.get(L, f"L{L}")


def assign_labels(vectors: np.ndarray, pw: dict, eigenvalues, tol: float) -> list:
    """Dominant partial wave per eigenvector (columns of ``vectors``).

    Eigenvectors with ``|lambda| <= tol`` are left unlabelled (``None``);
    those whose largest squared projection is below ``LABEL_MIN_WEIGHT``
    get :data:`MIXED`.
    """
    Ls = sorted(pw)
    if not Ls:
        return [None] * vectors.shape[1]
    P = np.array([pw[L] / (np.linalg.norm(pw[L]) or 1.0) for L in Ls])
    weights = (P @ vectors) ** 2  # (nL, nvec)
    out = []
    for j, lam in enumerate(eigenvalues):
        if abs(lam) <= tol:
            out.append(None)
        elif weights[:, j].max() < LABEL_MIN_WEIGHT:
            out.append(MIXED)
        else:
            out.append(Ls[int(np.argmax(weights[:, j]))])
    return out


def track_order(prev_vecs, vecs, with_quality: bool = False):
    """Permutation of ``vecs`` columns maximising ``|overlap|`` with ``prev_vecs``.

    With ``with_quality`` also returns the smallest matched overlap.
    """
    ov = np.abs(prev_vecs.T @ vecs)
    rows, cols = linear_sum_assignment(-ov)
    if with_quality:
        return cols, float(ov[rows, cols].min())
    return cols


# ---------------------------------------------------------------------------
# adiabatic curves
# ---------------------------------------------------------------------------


def diagonalize_along(matrix_fn, channels, radials, M: int, R_grid, detuning, track: bool = True, label_L=(0, 1, 2, 3, 4)):
    """Eigen-decompose ``matrix_fn(R)`` on ``R_grid`` and continue branches.

    Branches shifted away from the unperturbed detunings are continued by
    maximal eigenvector overlap (Hungarian assignment); the null space of
    the perturbation is kept in energy order.  Returns ``(energies, vectors,
    labels)`` with shapes ``(nR, n)``, ``(nR, n, n)`` and a nested list of
    dominant partial waves (``None`` for unshifted branches).
    """
    nvec = len(channels)
    energies = np.empty((len(R_grid), nvec))
    vec_hist = np.empty((len(R_grid), nvec, nvec))
    labels_hist = []
    prev = None
    prev_active = None
    for i, R in enumerate(R_grid):
        H = matrix_fn(R)
        lam, vec = np.linalg.eigh(H)
        rel = lam - _nearest_detuning(lam, detuning)
        scale = max(np.max(np.abs(H - np.diag(detuning))), 1e-300)
        tol = 1e-9 * scale
        # shifted branches first (energy order), untouched null space after
        active = np.abs(rel) > tol
        order = np.concatenate([np.nonzero(active)[0], np.nonzero(~active)[0]])
        lam, vec, rel = lam[order], vec[:, order], rel[order]
        n_act = int(active.sum())
        if track and prev is not None and n_act == prev_active and n_act > 1:
            perm, quality = track_order(prev[:, :n_act], vec[:, :n_act], with_quality=True)
            # a coarse grid gives ambiguous overlaps; keep energy order then
            if quality >= TRACK_MIN_OVERLAP:
                lam[:n_act], vec[:, :n_act], rel[:n_act] = lam[perm], vec[:, perm], rel[perm]
        # fix the overall sign for continuity
        if prev is not None:
            sgn = np.sign(np.sum(prev * vec, axis=0))
            vec = vec * np.where(sgn == 0, 1.0, sgn)
        prev, prev_active = vec, n_act
        energies[i] = lam
        vec_hist[i] = vec
        pw = partial_wave_vectors(channels, radials, M, R, label_L)
        labels_hist.append(assign_labels(vec, pw, rel, tol))
    return energies, vec_hist, labels_hist


def build_curves(energies, vec_hist, labels_hist, channels, M, n_ref, R_grid, provenance, meta=None, polarization_alpha=None, keep_states=True):
    """Wrap branch data from :func:`diagonalize_along` into curves and states."""
    curves, states = [], []
    for j in range(energies.shape[1]):
        Lj = _majority(labels_hist[i][j] for i in range(len(R_grid)))
        V = energies[:, j]
        if polarization_alpha is not None:
            V = V - 0.5 * polarization_alpha / R_grid**4
        curve = PotentialCurve(
            M=M,
            label=label_for(Lj),
            n_ref=n_ref,
            R=R_grid,
            V=V,
            provenance=provenance,
            includes_polarization=polarization_alpha is not None,
            L=None if Lj == MIXED else Lj,
            meta=dict(meta or {}),
        )
        curves.append(curve)
        if keep_states:
            states.append([ElectronicState(R=float(R), eigenvalue=float(energies[i, j]), coefficients=vec_hist[i][:, j], basis=tuple(channels), M=M, label=curve.label) for i, R in enumerate(R_grid)])
    return curves, states


def check_R_grid(R_grid) -> np.ndarray:
    R_grid = np.asarray(R_grid, dtype=float)
    if R_grid.ndim != 1 or len(R_grid) < 1 or np.any(np.diff(R_grid) <= 0):
        raise ValueError("R grid must be strictly increasing")
    if R_grid[0] <= 0:
        raise ValueError("internuclear distances must be positive")
    return R_grid


def adiabatic_curves(channels, M: int, R_grid, species=None, included_L=(2,), include_polarization: bool = False, models: dict | None = None, n_ref: int | None = None, born: bool = False, track: bool = True, label_L=None, keep_states: bool = True):
    """Diagonalise the contact interaction along ``R_grid``.

    Returns ``(curves, states)`` where ``curves`` is a list of
    :class:`PotentialCurve` (one per eigenvalue branch) and ``states[j][i]``
    is the :class:`ElectronicState` of branch ``j`` at ``R_grid[i]``.
    """
    R_grid = check_R_grid(R_grid)
    if models is None:
        if species is None:
            raise ValueError("need species or explicit phase-shift models")
        models = species_models(species, included_L, born)
    else:
        models = {L: models[L] for L in included_L}
    builder = InteractionBuilder(channels, M, models, n_ref)
    if R_grid[-1] > builder.R_c:
        raise BeyondTurningPoint(f"R={R_grid[-1]:g} beyond classical turning point R_c={builder.R_c:g}")
    if label_L is None:
        label_L = list(range(abs(M), max(max(models, default=0), 2) + 3))
    if include_polarization and species is None:
        raise ValueError("polarization term needs a species")
    energies, vecs, labels = diagonalize_along(builder.matrix, builder.channels, builder.radials, M, R_grid, builder.detuning, track, label_L)
    meta = {"included_L": sorted(models), "models": {L: m.kind for L, m in models.items()}}
    return build_curves(energies, vecs, labels, builder.channels, M, builder.n_ref, R_grid, "diagonalization", meta, species.polarizability if include_polarization else None, keep_states)


def _nearest_detuning(lam, det):
    det = np.unique(det)
    idx = np.argmin(np.abs(lam[:, None] - det[None, :]), axis=1)
    return det[idx]


def _majority(Ls):
    Ls = list(Ls)
    return max(set(Ls), key=lambda L: (Ls.count(L), L is not None and L != MIXED))


def find_curve(curves, label: str) -> PotentialCurve:
    """First curve carrying ``label``; :class:`BasisError` if none."""
    for c in curves:
        if c.label == label:
            return c
    raise BasisError(f"no {label} curve in this basis/symmetry (labels present: {sorted({c.label for c in curves})})")


# ---------------------------------------------------------------------------
# wavefunctions and dipoles
# ---------------------------------------------------------------------------


def _radials_for(state):
    return rb.basis_radial_functions(state.basis)


def electronic_wavefunction(state: ElectronicState, z, rho) -> dict:
    """``Psi(z, rho)`` in the ``phi = 0`` half plane and its display transforms.

    Returns a dict with ``psi``, ``rho_sqrt_abs`` (``rho sqrt|Psi|``) and
    ``sqrt_abs``.  The origin uses the regular ``r -> 0`` limit.
    """
    z = np.asarray(z, dtype=float)
    rho = np.asarray(rho, dtype=float)
    z, rho = np.broadcast_arrays(z, rho)
    phi = evaluate_channels(state.basis, _radials_for(state), z, rho)
    psi = np.tensordot(state.coefficients, phi, axes=1)
    sq = np.sqrt(np.abs(psi))
    return {"psi": psi, "rho_sqrt_abs": rho * sq, "sqrt_abs": sq}


def ring_node_count(state: ElectronicState, radius: float = 20.0, n_points: int = 721) -> int:
    """Nodes of ``Psi`` on a half ring around the perturber.

    Counts sign changes along the open arc ``z = R + s cos(chi)``,
    ``rho = s sin(chi)``, ``0 < chi < pi``, and adds the nodal line on the
    axis that every ``M > 0`` state carries.
    """
    chi = np.linspace(0.0, np.pi, n_points)[1:-1]
    psi = electronic_wavefunction(state, state.R + radius * np.cos(chi), radius * np.sin(chi))["psi"]
    v = psi[np.abs(psi) > 1e-12 * np.max(np.abs(psi))]
    sign_changes = int(np.count_nonzero(np.signbit(v[1:]) != np.signbit(v[:-1])))
    return sign_changes + (1 if state.M != 0 else 0)


def cos_theta_element(l1: int, l2: int, m: int) -> float:
    """``<l1 m| cos(theta) |l2 m>`` for spherical harmonics."""
    if abs(l1 - l2) != 1:
        return 0.0
    l = min(l1, l2)
    if abs(m) > l:
        return 0.0
    return math.sqrt(((l + 1) ** 2 - m * m) / ((2 * l + 1) * (2 * l + 3)))


def radial_moment(fa, fb, power: int = 1) -> float:
    """``int u_a u_b r^power dr`` on the shared sqrt grid."""
    from scipy.integrate import simpson

    if fa.x.shape != fb.x.shape or fa.x[-1] != fb.x[-1]:
        raise ValueError("radial functions must share a grid")
    x = fa.x
    # u = x^(1/2) y and dr = 2x dx
    return float(simpson(2.0 * x ** (2 + 2 * power) * fa.y * fb.y, x=x))


def dipole_moment(state: ElectronicState, R: float | None = None) -> tuple[float, float]:
    """Electronic dipole ``<Psi| z |Psi>`` about the Rydberg core.

    Returns ``(atomic units, debye)``.  Positive values mean the electron
    density is displaced towards the perturber.
    """
    radials = _radials_for(state)
    c = state.coefficients
    d = 0.0
    for i, (a, fa) in enumerate(zip(state.basis, radials)):
        if c[i] == 0.0:
            continue
        for j in range(i, len(state.basis)):
            b = state.basis[j]
            ang = cos_theta_element(a.l, b.l, state.M)
            if ang == 0.0 or c[j] == 0.0:
                continue
            term = c[i] * c[j] * ang * radial_moment(fa, radials[j])
            d += term if i == j else 2.0 * term
    return d, d * AU_DIPOLE_TO_DEBYE
