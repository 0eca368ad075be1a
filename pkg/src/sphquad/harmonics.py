"""Real, orthonormal spherical harmonics.

Column layout for degree ``k`` occupies ``k^2 .. (k+1)^2 - 1`` (0-based):
order ``m = 0`` first, then the ``(cos, sin)`` pair for ``m = 1..k``. No
Condon-Shortley phase. The azimuthal factors are generated from
``(x + i y)^m`` and the associated Legendre part by the standard fully
normalized three-term recurrence in ``z``, so every column is a polynomial
in ``(x, y, z)`` of exactly its degree.
"""
from __future__ import annotations

import numpy as np


def dim(n):
    return (n + 1) ** 2


def degrees(n):
    """Degree of each column of :func:`eval_harmonics` (0-based indexing)."""
    return np.repeat(np.arange(n + 1), 2 * np.arange(n + 1) + 1)


def column(k, m, kind="cos"):
    if m == 0:
        return k * k
    return k * k + 2 * m - 1 + (kind == "sin")


def eval_harmonics(n, pts, dtype=float):
    """Matrix ``V`` with ``V[i, j] = phi_j(pts[i])``, shape ``(len(pts), (n+1)^2)``.

    ``dtype=np.longdouble`` runs the recurrences in extended precision.
    """
    pts = np.asarray(pts, dtype=dtype).reshape(-1, 3)
    one = dtype(1)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    out = np.empty((len(pts), dim(n)), dtype=dtype)
    cm = np.ones_like(x)
    sm = np.zeros_like(x)
    pmm = one / np.sqrt(4 * np.arccos(-one))
    sqrt2 = np.sqrt(2 * one)
    for m in range(n + 1):
        if m > 0:
            cm, sm = cm * x - sm * y, sm * x + cm * y
            pmm *= np.sqrt((2 * m + 1) * one / (2 * m))

        def put(k, p):
            if m == 0:
                out[:, k * k] = p
            else:
                out[:, k * k + 2 * m - 1] = sqrt2 * p * cm
                out[:, k * k + 2 * m] = sqrt2 * p * sm

        p_prev = np.full_like(x, pmm)
        put(m, p_prev)
        if m == n:
            break
        p_cur = np.sqrt((2 * m + 3) * one) * z * p_prev
        put(m + 1, p_cur)
        for k in range(m + 2, n + 1):
            a = np.sqrt((4 * k * k - 1) * one / (k * k - m * m))
            b = np.sqrt(((k - 1) ** 2 - m * m) * one / (4 * (k - 1) ** 2 - 1))
            p_prev, p_cur = p_cur, a * (z * p_cur - b * p_prev)
            put(k, p_cur)
    return out
