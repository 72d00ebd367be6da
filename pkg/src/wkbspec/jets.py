"""Pointwise WKB coefficients via truncated-jet arithmetic.

Evaluating the exact rational forms of the higher Riccati coefficients in
doubles is hopeless: their expanded numerators have huge, cancelling
coefficients.  Running the recursion itself in truncated Taylor jets at the
evaluation point is stable, because every intermediate quantity has the size
of the underlying analytic function.  Jets are numpy arrays of shape
(order, npoints) holding Taylor coefficients, so whole quadrature panels are
processed at once.
"""

from __future__ import annotations

import numpy as np

__all__ = ["riccati_jet_values", "OddTermEvaluator"]


def _poly_jet(coeffs_desc: np.ndarray, zs: np.ndarray, L: int) -> np.ndarray:
    """Taylor jet of a polynomial at each point of zs (length-L jets)."""
    n = len(zs)
    acc = np.zeros((L, n), dtype=complex)
    for c in coeffs_desc:
        new = np.empty_like(acc)
        new[0] = acc[0] * zs + c
        for i in range(1, L):
            new[i] = acc[i] * zs + acc[i - 1]
        acc = new
    return acc


def _jet_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    L = a.shape[0]
    out = np.zeros_like(a)
    for i in range(L):
        ai = a[i]
        if not np.any(ai):
            continue
        for j in range(L - i):
            out[i + j] += ai * b[j]
    return out


def _jet_recip(a: np.ndarray) -> np.ndarray:
    L = a.shape[0]
    out = np.zeros_like(a)
    out[0] = 1.0 / a[0]
    for m in range(1, L):
        s = np.zeros_like(a[0])
        for k in range(1, m + 1):
            s += a[k] * out[m - k]
        out[m] = -s / a[0]
    return out


def _jet_sqrt(a: np.ndarray, w0: np.ndarray) -> np.ndarray:
    """Square-root jet with the constant term given (branch supplied)."""
    L = a.shape[0]
    out = np.zeros_like(a)
    out[0] = w0
    for m in range(1, L):
        s = np.zeros_like(a[0])
        for k in range(1, m):
            s += out[k] * out[m - k]
        out[m] = (a[m] - s) / (2.0 * w0)
    return out


def _jet_deriv(a: np.ndarray) -> np.ndarray:
    L = a.shape[0]
    out = np.zeros_like(a)
    for i in range(L - 1):
        out[i] = (i + 1) * a[i + 1]
    return out


def riccati_jet_values(qd, truncation: int, zs: np.ndarray, ws: np.ndarray) -> dict:
    """{k: s_k(zs)} for all k up to `truncation`, given the branch ws of sqrt(Q).

    Shapes: zs, ws are 1-d arrays; the jets carry enough orders for every
    derivative taken along the recursion.
    """
    L = truncation + 2
    zs = np.asarray(zs, dtype=complex)
    ws = np.asarray(ws, dtype=complex)
    pj = _poly_jet(qd.numerator.numpy_coeffs(), zs, L)
    dj = _poly_jet(qd._den1.numpy_coeffs(), zs, L)
    dj2 = _jet_mul(dj, dj)
    qjet = _jet_mul(pj, _jet_recip(dj2))       # jet of the scalar Q
    wjet = _jet_sqrt(qjet, ws)                 # branch from the caller
    winv = _jet_recip(wjet)

    # potential q = -S_v/(2Q) as a stable rational: N_q / (16 P^3)
    from .quaddiff import wkb_potential_q

    qrf = qd._riccati_cache.get("qrf") if hasattr(qd, "_riccati_cache") else None
    if qrf is None:
        qrf = wkb_potential_q(qd)
        if hasattr(qd, "_riccati_cache"):
            qd._riccati_cache["qrf"] = qrf
    qn = _poly_jet(qrf.num.numpy_coeffs(), zs, L)
    qd_jet = _poly_jet(qrf.den.numpy_coeffs(), zs, L)
    pot = _jet_mul(qn, _jet_recip(qd_jet))

    one = np.zeros((L, len(zs)), dtype=complex)
    one[0] = 1.0
    s = {-1: one, 0: np.zeros_like(one), 1: -0.5 * pot}
    for k in range(1, truncation):
        acc = _jet_mul(_jet_deriv(s[k]), winv)
        for j in range(0, k + 1):
            l = k - j
            if j == 0 or l == 0:
                continue
            acc = acc + _jet_mul(s[j], s[l])
        s[k + 1] = -0.5 * acc
    return {k: jet[0] for k, jet in s.items()}


class OddTermEvaluator:
    """Callable returning rows s_k(zs) * w for the requested odd orders."""

    def __init__(self, qd, orders):
        self.qd = qd
        self.orders = list(orders)
        self.kmax = max(self.orders)

    def __call__(self, zs, ws):
        vals = riccati_jet_values(self.qd, self.kmax, zs, ws)
        return np.stack([(ws if k == -1 else vals[k] * ws) for k in self.orders])
