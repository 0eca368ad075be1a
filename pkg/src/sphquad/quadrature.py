"""One-dimensional rules: Gauss-Legendre on intervals and subperiodic
trigonometric Gaussian rules on arcs ``[-omega, omega]``.

Both are assembled in x87 extended precision (``numpy.longdouble``) and
rounded to binary64 at the end, so that exactness holds to a few ulps even
for the high degrees required by the sector rules.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NumericalError

_LD = np.longdouble
_PI_LD = _LD("3.141592653589793238462643383279502884")


@dataclass(frozen=True)
class Rule1D:
    nodes: np.ndarray
    weights: np.ndarray
    domain: tuple

    def integrate(self, f):
        return float(self.weights @ f(self.nodes))

    def __len__(self):
        return len(self.nodes)


def _legendre_and_derivative(x, k):
    p0 = np.ones_like(x)
    p1 = x.copy()
    for j in range(2, k + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    dp = k * (x * p1 - p0) / (x * x - 1)
    return p1, dp


@lru_cache(maxsize=256)
def _gauss_legendre_ld(k):
    """Extended precision nodes/weights on [-1, 1] (Newton-polished)."""
    if k == 1:
        return np.zeros(1, dtype=_LD), np.full(1, 2, dtype=_LD)
    x = np.polynomial.legendre.leggauss(k)[0].astype(_LD)
    for _ in range(3):
        p, dp = _legendre_and_derivative(x, k)
        x = x - p / dp
    x = 0.5 * (x - x[::-1])
    _, dp = _legendre_and_derivative(x, k)
    w = 2 / ((1 - x * x) * dp * dp)
    w = 0.5 * (w + w[::-1])
    return x, w


def gauss_legendre(k, a=-1.0, b=1.0):
    """``k``-point Gauss-Legendre rule on ``[a, b]``, exact to degree ``2k - 1``."""
    if k < 1:
        raise ValueError("Gauss-Legendre rule needs k >= 1 points")
    if not a < b:
        raise ValueError("interval must satisfy a < b")
    x, w = _gauss_legendre_ld(int(k))
    half = (_LD(b) - _LD(a)) / 2
    nodes = (_LD(a) + half * (x + 1)).astype(float)
    weights = (half * w).astype(float)
    return Rule1D(nodes, weights, (float(a), float(b)))


def _stieltjes_arc(k, omegas):
    """Recurrence coefficients ``b_0..b_{k-1}`` for ``2 sin(w/2)/sqrt(1 - sin^2(w/2) t^2)``.

    The weight is discretized through ``t = sin(u)/sin(omega/2)``, under which
    it becomes the constant ``2`` on ``|u| <= omega/2``; a Gauss-Legendre rule
    in ``u`` then converges geometrically.
    """
    om = np.asarray(omegas, dtype=_LD)[:, None]
    alpha = np.sin(om / 2)
    u, wu = _gauss_legendre_ld(2 * k + 40)
    t = np.sin(u[None, :] * om / 2) / alpha
    w = wu[None, :] * om
    b = np.zeros((len(om), k), dtype=_LD)
    b[:, 0] = w.sum(axis=1)
    p_prev = np.zeros_like(t)
    p = np.ones_like(t) / np.sqrt(b[:, :1])
    for j in range(1, k):
        pn = t * p
        if j > 1:
            pn -= np.sqrt(b[:, j - 1 : j]) * p_prev
        b[:, j] = np.sum(w * pn * pn, axis=1)
        p_prev, p = p, pn / np.sqrt(b[:, j : j + 1])
    return b, alpha[:, 0]


def _orthonormal_values(x, b, k):
    """Orthonormal polynomials ``p_0..p_k`` (zero recurrence diagonal) and ``p_k'``."""
    P = np.empty((k + 1,) + x.shape, dtype=_LD)
    D = np.empty_like(P)
    P[0] = 1 / np.sqrt(b[:, :1])
    D[0] = 0
    for j in range(1, k + 1):
        s = np.sqrt(b[:, j : j + 1])
        P[j] = x * P[j - 1]
        D[j] = P[j - 1] + x * D[j - 1]
        if j > 1:
            sp = np.sqrt(b[:, j - 1 : j])
            P[j] -= sp * P[j - 2]
            D[j] -= sp * D[j - 2]
        P[j] /= s
        D[j] /= s
    return P, D


def trig_gauss_batch(n, omegas):
    """Trigonometric Gaussian rules of degree ``n`` for several half-widths.

    Returns ``(theta, weights)`` arrays of shape ``(len(omegas), n + 1)``.
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if n < 0:
        raise ValueError("trigonometric degree must be nonnegative")
    if np.any(omegas <= 0) or np.any(omegas > np.pi):
        raise ValueError("arc half-width omega must lie in (0, pi]")
    k = n + 1
    b, alpha = _stieltjes_arc(k + 1, omegas)

    if k == 1:
        x = np.zeros((len(omegas), 1), dtype=_LD)
    else:
        off = np.sqrt(b[:, 1:k].astype(float))
        jac = np.zeros((len(omegas), k, k))
        idx = np.arange(k - 1)
        jac[:, idx, idx + 1] = off
        jac[:, idx + 1, idx] = off
        x = np.linalg.eigvalsh(jac).astype(_LD)
        x = 0.5 * (x - x[:, ::-1])
        for _ in range(3):
            P, D = _orthonormal_values(x, b, k)
            x = x - P[k] / D[k]
        x = 0.5 * (x - x[:, ::-1])
    P, _ = _orthonormal_values(x, b, k)
    w = 1 / np.sum(P[:k] ** 2, axis=0)
    w = 0.5 * (w + w[:, ::-1])
    if np.any(w < 1e-16):
        raise NumericalError("trigonometric Gaussian rule produced a vanishing weight")
    theta = 2 * np.arcsin(alpha[:, None] * x)
    return theta.astype(float), w.astype(float)


def trig_gauss(n, omega):
    """``n + 1`` point rule on ``[-omega, omega]`` exact for trigonometric degree ``n``.

    Nodes are interior and symmetric about 0, weights are positive and
    symmetric.
    """
    if not 0 < omega <= np.pi:
        raise ValueError("arc half-width omega must lie in (0, pi]")
    theta, w = trig_gauss_batch(n, [omega])
    return Rule1D(theta[0], w[0], (-float(omega), float(omega)))
