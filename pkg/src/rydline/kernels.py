"""Hot inner loops: Numerov propagation and Legendre moments.

Every kernel has a numba ``@njit`` implementation and a pure-numpy one
that is vectorised over the batch axis.  The numba path is used when numba
imports cleanly and ``RYDLINE_DISABLE_NUMBA`` is unset (or ``0``).  Both
paths are always importable as ``NUMPY_KERNELS`` / ``NUMBA_KERNELS`` so
that tests and the benchmark can compare them directly.
"""

from __future__ import annotations

import os

import numpy as np

_RESCALE = 1e150

DISABLE_NUMBA = os.environ.get("RYDLINE_DISABLE_NUMBA", "0").strip().lower() in ("1", "true", "yes", "on")

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False


# ----------------------------------------------------------------------------
# numpy implementations
# ----------------------------------------------------------------------------


def _numerov_inward_np(q, h, y_start, y_end):
    """Integrate ``y'' = q y`` from the last grid point towards the first.

    ``q`` has shape (batch, N).  The boundary values are ``y[N-1] = y_end``
    and ``y[N-2] = y_start``.  Rows are rescaled on overflow, so only the shape of
    each row is meaningful.
    """
    q = np.atleast_2d(q)
    nb, npts = q.shape
    c = 1.0 - h * h * q / 12.0
    y = np.zeros((nb, npts))
    y[:, npts - 1] = y_end
    y[:, npts - 2] = y_start
    for i in range(npts - 2, 0, -1):
        y[:, i - 1] = ((12.0 - 10.0 * c[:, i]) * y[:, i] - c[:, i + 1] * y[:, i + 1]) / c[:, i - 1]
        big = np.abs(y[:, i - 1]) > _RESCALE
        if big.any():
            y[big, i - 1 :] /= np.abs(y[big, i - 1])[:, None]
    return y


def _sturm_scan_np(q, energies, h, two_m, origin):
    """Outward Numerov shots for a batch of energies.

    Solves ``y'' = (q - two_m * E) y`` with ``y[0] = 0``.  Returns the number
    of sign changes of each solution on the grid and the (rescaled) value at
    the last grid point.  With ``origin`` true the first grid point sits at a
    regular singular point and the first step uses a linear extrapolation of
    ``f y`` instead of ``f[0] * y[0]``.
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    npts = q.shape[0]
    h2 = h * h
    ne = energies.shape[0]
    y_prev = np.zeros(ne)
    y_cur = np.full(ne, h)
    f1 = q[1] - two_m * energies
    counts = np.zeros(ne, dtype=np.int64)
    if origin:
        y_next = 2.0 * y_cur + h2 * f1 * y_cur
        start = 2
        y_prev, y_cur = y_cur, y_next
    else:
        start = 1
    c_prev = 1.0 - h2 * (q[start - 1] - two_m * energies) / 12.0
    c_cur = 1.0 - h2 * (q[start] - two_m * energies) / 12.0
    if origin:
        counts += (y_prev * y_cur < 0.0).astype(np.int64)
    for i in range(start, npts - 1):
        c_next = 1.0 - h2 * (q[i + 1] - two_m * energies) / 12.0
        y_next = ((12.0 - 10.0 * c_cur) * y_cur - c_prev * y_prev) / c_next
        counts += (y_next * y_cur < 0.0).astype(np.int64)
        big = np.abs(y_next) > _RESCALE
        if big.any():
            s = np.abs(y_next[big])
            y_next[big] /= s
            y_cur[big] /= s
        y_prev, y_cur = y_cur, y_next
        c_prev, c_cur = c_cur, c_next
    return counts, y_cur


def _legendre_moments_np(wq, xcos, pot, lam_max):
    """Weighted Legendre moments ``sum_q w[r,q] pot[r,q] P_lam(x[r,q])``.

    Returns an array of shape (lam_max + 1, n_r).
    """
    out = np.empty((lam_max + 1, xcos.shape[0]))
    wv = wq * pot
    p_prev = np.ones_like(xcos)
    out[0] = wv.sum(axis=1)
    if lam_max == 0:
        return out
    p_cur = xcos.copy()
    out[1] = (wv * p_cur).sum(axis=1)
    for lam in range(1, lam_max):
        p_next = ((2 * lam + 1) * xcos * p_cur - lam * p_prev) / (lam + 1)
        out[lam + 1] = (wv * p_next).sum(axis=1)
        p_prev, p_cur = p_cur, p_next
    return out


NUMPY_KERNELS = {
    "numerov_inward": _numerov_inward_np,
    "sturm_scan": _sturm_scan_np,
    "legendre_moments": _legendre_moments_np,
}

# ----------------------------------------------------------------------------
# numba implementations
# ----------------------------------------------------------------------------

NUMBA_KERNELS: dict = {}

if HAS_NUMBA:

    @njit(cache=True)
    def _numerov_inward_nb(q, h, y_start, y_end):
        nb, npts = q.shape
        h12 = h * h / 12.0
        y = np.zeros((nb, npts))
        for b in range(nb):
            y[b, npts - 1] = y_end
            y[b, npts - 2] = y_start
            for i in range(npts - 2, 0, -1):
                c_next = 1.0 - h12 * q[b, i + 1]
                c_cur = 1.0 - h12 * q[b, i]
                c_prev = 1.0 - h12 * q[b, i - 1]
                val = ((12.0 - 10.0 * c_cur) * y[b, i] - c_next * y[b, i + 1]) / c_prev
                y[b, i - 1] = val
                if abs(val) > _RESCALE:
                    s = abs(val)
                    for j in range(i - 1, npts):
                        y[b, j] /= s
        return y

    @njit(cache=True)
    def _sturm_scan_nb(q, energies, h, two_m, origin):
        npts = q.shape[0]
        ne = energies.shape[0]
        h12 = h * h / 12.0
        counts = np.zeros(ne, dtype=np.int64)
        last = np.zeros(ne)
        for e in range(ne):
            te = two_m * energies[e]
            y_prev = 0.0
            y_cur = h
            cnt = 0
            if origin:
                y_next = 2.0 * y_cur + h * h * (q[1] - te) * y_cur
                if y_next * y_cur < 0.0:
                    cnt += 1
                y_prev = y_cur
                y_cur = y_next
                start = 2
            else:
                start = 1
            c_prev = 1.0 - h12 * (q[start - 1] - te)
            c_cur = 1.0 - h12 * (q[start] - te)
            for i in range(start, npts - 1):
                c_next = 1.0 - h12 * (q[i + 1] - te)
                y_next = ((12.0 - 10.0 * c_cur) * y_cur - c_prev * y_prev) / c_next
                if y_next * y_cur < 0.0:
                    cnt += 1
                if abs(y_next) > _RESCALE:
                    s = abs(y_next)
                    y_next /= s
                    y_cur /= s
                y_prev = y_cur
                y_cur = y_next
                c_prev = c_cur
                c_cur = c_next
            counts[e] = cnt
            last[e] = y_cur
        return counts, last

    @njit(cache=True)
    def _legendre_moments_nb(wq, xcos, pot, lam_max):
        nr, nq = xcos.shape
        out = np.zeros((lam_max + 1, nr))
        for r in range(nr):
            for k in range(nq):
                wv = wq[r, k] * pot[r, k]
                x = xcos[r, k]
                p_prev = 1.0
                out[0, r] += wv
                if lam_max == 0:
                    continue
                p_cur = x
                out[1, r] += wv * p_cur
                for lam in range(1, lam_max):
                    p_next = ((2 * lam + 1) * x * p_cur - lam * p_prev) / (lam + 1)
                    out[lam + 1, r] += wv * p_next
                    p_prev = p_cur
                    p_cur = p_next
        return out

    NUMBA_KERNELS = {
        "numerov_inward": _numerov_inward_nb,
        "sturm_scan": _sturm_scan_nb,
        "legendre_moments": _legendre_moments_nb,
    }

USE_NUMBA = HAS_NUMBA and not DISABLE_NUMBA
BACKEND = "numba" if USE_NUMBA else "numpy"
_ACTIVE = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS


def numerov_inward(q: np.ndarray, h: float, y_start: float = 1e-30, y_end: float = 0.0) -> np.ndarray:
    """Inward Numerov integration of ``y'' = q y`` for each row of ``q``.

    Integrating a reversed ``q`` gives outward propagation.
    """
    q = np.ascontiguousarray(np.atleast_2d(q), dtype=float)
    return _ACTIVE["numerov_inward"](q, float(h), float(y_start), float(y_end))


def sturm_scan(q: np.ndarray, energies, h: float, two_m: float, origin: bool = False):
    """Node counts and end values of outward shots at several energies."""
    q = np.ascontiguousarray(q, dtype=float)
    energies = np.ascontiguousarray(np.atleast_1d(energies), dtype=float)
    return _ACTIVE["sturm_scan"](q, energies, float(h), float(two_m), bool(origin))


def legendre_moments(wq, xcos, pot, lam_max: int) -> np.ndarray:
    """Legendre moments of ``pot`` on per-row quadrature rules."""
    args = [np.ascontiguousarray(a, dtype=float) for a in (wq, xcos, pot)]
    return _ACTIVE["legendre_moments"](*args, int(lam_max))
