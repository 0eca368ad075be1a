"""Active-set nonnegative least squares.

Classical Lawson-Hanson, with an optional deviation-maximization mode that
moves several well-separated columns into the passive set per outer step.
The least-squares subproblems reuse a QR factorization of the passive
columns, updated by column insertion and deletion.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr_delete, qr_insert, solve_triangular

from .errors import ConvergenceError


@dataclass
class NNLSResult:
    x: np.ndarray
    residual: float
    iterations: int
    kkt: float  # largest violation of the KKT conditions, relative to ||b||


class _PassiveQR:
    """QR factors of ``A[:, cols]`` kept in sync with insertions/deletions."""

    def __init__(self, A):
        self.A = A
        self.cols = []
        self.Q = np.eye(A.shape[0])
        self.R = np.zeros((A.shape[0], 0))

    def add(self, j):
        k = len(self.cols)
        self.Q, self.R = qr_insert(self.Q, self.R, self.A[:, j], k, which="col")
        self.cols.append(j)

    def remove(self, positions):
        for k in sorted(positions, reverse=True):
            self.Q, self.R = qr_delete(self.Q, self.R, k, which="col")
            del self.cols[k]

    def solve(self, b):
        k = len(self.cols)
        return solve_triangular(self.R[:k, :k], self.Q[:, :k].T @ b)


def _select(g, free, A, mode, delta, cos_max, room):
    cand = np.flatnonzero(free)
    gc = g[cand]
    best = cand[np.argmax(gc)]  # argmax returns the lowest index on ties
    if mode != "dm" or room <= 1:
        return [best]
    gmax = g[best]
    pool = cand[gc >= delta * gmax]
    pool = pool[np.lexsort((pool, -g[pool]))][: 4 * room]
    norms = np.linalg.norm(A[:, pool], axis=0)
    chosen = [best]
    chosen_dirs = [A[:, best] / np.linalg.norm(A[:, best])]
    for j, nj in zip(pool, norms):
        if len(chosen) >= room:
            break
        if j == best or nj == 0:
            continue
        d = A[:, j] / nj
        if max(abs(c @ d) for c in chosen_dirs) < cos_max:
            chosen.append(j)
            chosen_dirs.append(d)
    return chosen


def nnls(A, b, tol=1e-10, max_iter=None, mode="lh", delta=0.5, cos_max=0.2):
    """Minimize ``||A x - b||_2`` subject to ``x >= 0``.

    ``tol`` is relative to ``||b||`` and bounds the KKT gradient test.
    ``mode`` is ``"lh"`` (one column per step) or ``"dm"`` (several nearly
    orthogonal columns per step). Raises :class:`ConvergenceError` when the
    iteration cap is hit before the KKT conditions hold.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    m, k = A.shape
    if len(b) != m:
        raise ValueError("A and b have incompatible shapes")
    if mode not in ("lh", "dm"):
        raise ValueError("mode must be 'lh' or 'dm'")
    if max_iter is None:
        max_iter = 3 * max(k, m) + 30
    bnorm = np.linalg.norm(b)
    thresh = tol * max(bnorm, np.finfo(float).tiny)

    x = np.zeros(k)
    free = np.ones(k, dtype=bool)  # columns not in the passive set
    qr = _PassiveQR(A)
    r = b.copy()
    g = A.T @ r
    it = 0
    while free.any() and len(qr.cols) < m:
        gmask = np.where(free, g, -np.inf)
        if gmask.max() <= thresh:
            break
        it += 1
        if it > max_iter:
            raise ConvergenceError(
                "NNLS iteration cap reached", residual=float(np.linalg.norm(r)), iterations=it - 1
            )
        for j in _select(gmask, free, A, mode, delta, cos_max, m - len(qr.cols)):
            qr.add(j)
            free[j] = False
        while True:
            z = qr.solve(b)
            cols = np.array(qr.cols)
            if np.all(z > 0):
                x[:] = 0.0
                x[cols] = z
                break
            xp = x[cols]
            neg = z <= 0
            alpha = np.min(xp[neg] / (xp[neg] - z[neg]))
            xp = xp + alpha * (z - xp)
            # leave the passive set only where the step reached zero; freshly
            # added columns with x = 0 but z > 0 stay passive
            drop = np.flatnonzero(neg & (xp <= 0))
            if len(drop) == 0:  # rounding kept the blocking index positive
                drop = np.flatnonzero(neg)[[np.argmin(xp[neg])]]
            x[:] = 0.0
            x[cols] = np.maximum(xp, 0.0)
            x[cols[drop]] = 0.0
            free[cols[drop]] = True
            qr.remove(drop)
            if not qr.cols:
                break
        r = b - A @ x
        g = A.T @ r

    passive = ~free
    viol = 0.0
    if passive.any():
        viol = np.abs(g[passive]).max()
    if free.any():
        viol = max(viol, max(g[free].max(), 0.0))
    return NNLSResult(x, float(np.linalg.norm(r)), it, float(viol / max(bnorm, np.finfo(float).tiny)))
