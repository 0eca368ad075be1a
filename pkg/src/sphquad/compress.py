"""Caratheodory-Tchakaloff compression of positive cubature rules.

A positive rule with ``M`` nodes is reduced to at most ``(n+1)^2`` of its
own nodes, with new positive weights that keep every moment of degree
``<= n``. The moment system is written in a basis that is orthonormal for
the candidate nodes (see :mod:`sphquad.basis`) and solved by NNLS.

When ``M (n+1)^2`` exceeds the memory budget the nodes are split into
blocks, each block is compressed on its own, and a final pass compresses
the union of the block rules. The final pass matches the moments of that
intermediate rule, evaluated on the candidate nodes themselves: the
orthonormalized basis is only trustworthy where it was built, and at high
degree its values elsewhere carry rounding noise far above the target
residual. The reported residual adds the block and final-pass residuals.
"""
from __future__ import annotations

import warnings

import numpy as np

from .basis import apply_factors, orthonormalizing_factors
from .errors import ConvergenceError
from .harmonics import dim, eval_harmonics
from .nnls import nnls

DEFAULT_BUDGET = 25_000_000  # matrix entries held at once
CLAMP = 1e-15
NNLS_TOL = 1e-13
EXTENDED_BUDGET = 4e9  # M * N^2 multiply-adds allowed in long double


def _moment_basis(n, nodes, weights):
    """Orthonormal basis values at ``nodes``.

    Rounding in ``V @ F_1`` is of size ``eps |V| |F_1|``, far larger than the
    entries themselves on small regions, and it shows up as drift in the raw
    harmonic moments of the compressed rule. When affordable the harmonics and
    that first product are formed in long double, which removes most of it.
    """
    N = dim(n)
    if len(nodes) * N * N > EXTENDED_BUDGET:
        V = eval_harmonics(n, nodes)
        return apply_factors(V, orthonormalizing_factors(V, weights)[0])
    V = eval_harmonics(n, nodes, np.longdouble)
    first = orthonormalizing_factors(V.astype(float), weights)[0][0]
    U = (V @ first.astype(np.longdouble)).astype(float)
    del V
    return apply_factors(U, orthonormalizing_factors(U, weights)[0])


def _solve(n, nodes, weights, mode):
    """Support and positive weights matching the degree-``n`` moments of ``(nodes, weights)``."""
    U = _moment_basis(n, nodes, weights)
    b = U.T @ weights
    res = nnls(U.T, b, tol=NNLS_TOL, mode=mode)
    u = res.x
    u[u <= CLAMP * u.max()] = 0.0
    keep = np.flatnonzero(u)
    resid = float(np.linalg.norm(U[keep].T @ u[keep] - b))
    return keep, u[keep], resid


def caratheodory_compress(rule, n, mode="lh", budget=DEFAULT_BUDGET):
    """Positive sub-rule of ``rule`` with at most ``(n+1)^2`` nodes, exact on ``P_n``.

    ``mode`` selects the NNLS column strategy (``"lh"`` or ``"dm"``). The
    returned rule records the 2-norm moment mismatch, in the orthonormal
    basis of the candidate nodes, as ``moment_residual``.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    N = dim(n)
    M = len(rule)
    if np.any(rule.weights <= 0):
        raise ValueError("compression needs a rule with positive weights")
    if M < N:
        warnings.warn(f"rule has {M} < {N} nodes; returned uncompressed", stacklevel=2)
        return rule
    if M == N:
        return rule.with_(degree=n, compressed=True, parent_cardinality=M)

    chunk = max(2 * N, budget // N)
    nodes, weights = rule.nodes, rule.weights
    if M <= chunk:
        keep, w, resid = _solve(n, nodes, weights, mode)
    else:
        bounds = np.linspace(0, M, int(np.ceil(M / chunk)) + 1).astype(int)
        cand, inter, resid = [], [], 0.0
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            k, wk, rk = _solve(n, nodes[lo:hi], weights[lo:hi], mode)
            cand.append(lo + k)
            inter.append(wk)
            resid += rk
        cand = np.concatenate(cand)
        k2, w, rfinal = _solve(n, nodes[cand], np.concatenate(inter), mode)
        keep = cand[k2]
        resid += rfinal
    if len(keep) > N:
        raise ConvergenceError("support exceeds the Caratheodory bound", residual=resid,
                               support=int(len(keep)))
    return rule.with_(
        nodes=nodes[keep],
        weights=w,
        degree=n,
        moment_residual=resid,
        compressed=True,
        parent_cardinality=M,
    )

