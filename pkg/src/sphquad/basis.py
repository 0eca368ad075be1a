"""Discretely orthonormal triangular bases on a cubature rule.

The weighted harmonic Vandermonde ``sqrt(W) V`` on a small spherical region
is extremely ill-conditioned (around 1e13 at degree 6 and 1e17 at degree 10
for a continent-sized polygon), because the global harmonics are nearly
dependent there. A single ``R^{-1}`` then yields a basis that is far from
orthonormal in floating point. Repeating the QR step on the already
transformed matrix removes that loss: the change of basis is kept as a short
list of upper-triangular factors applied one after the other, so every
``p_j`` is still a combination of ``phi_1 .. phi_j``.
"""
from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import solve_triangular

from .errors import IllConditionedWarning, RankDeficiencyError
from .harmonics import degrees, dim, eval_harmonics

COND_WARN = 1e8
RANK_TOL = 1e-20  # relative size of diag(R) below which a column is deemed dependent
MAX_PASSES = 4
ORTHO_TOL = 1e-13


def _triangular_inverse(R):
    return solve_triangular(R, np.eye(len(R)), lower=False)


def _positive_qr_r(A):
    R = np.linalg.qr(A, mode="r")
    s = np.sign(np.diag(R))
    s[s == 0] = 1.0
    return R * s[:, None]


def orthonormalizing_factors(V, weights, max_passes=MAX_PASSES):
    """Upper-triangular factors ``F_1, F_2, ...`` with ``V F_1 F_2 ...`` orthonormal.

    Orthonormality is with respect to ``diag(weights)``. Returns the factor
    list and the condition estimate of the first ``R``.
    """
    M, N = V.shape
    if M < N:
        raise RankDeficiencyError(f"{M} nodes cannot determine {N} basis functions")
    sw = np.sqrt(weights)[:, None]
    U = V
    factors = []
    cond = None
    for k in range(max_passes):
        R = _positive_qr_r(sw * U)
        d = np.abs(np.diag(R))
        if k == 0:
            if not np.all(np.isfinite(R)) or d.min() <= RANK_TOL * d.max():
                raise RankDeficiencyError("weighted Vandermonde is numerically rank deficient")
            cond = float(np.linalg.cond(R))
        F = np.ascontiguousarray(_triangular_inverse(R))
        factors.append(F)
        U = U @ F
        G = U.T @ (weights[:, None] * U)
        if np.abs(G - np.eye(N)).max() <= ORTHO_TOL:
            break
    return factors, cond


def apply_factors(V, factors):
    for F in factors:
        V = V @ F
    return V


@dataclass(frozen=True, eq=False)
class OrthoBasis:
    """Basis ``p_j`` orthonormal for the discrete inner product of ``rule``.

    ``factors`` holds the upper-triangular matrices whose ordered product is
    ``R^{-1}``; evaluation applies them one at a time.
    """

    n: int
    factors: tuple
    rule: object
    cond: float

    @property
    def dim(self):
        return dim(self.n)

    @property
    def Rinv(self):
        out = self.factors[0]
        for F in self.factors[1:]:
            out = out @ F
        return out

    @property
    def degrees(self):
        return degrees(self.n)

    def to_json(self):
        return {
            "n": int(self.n),
            "Rinv": self.Rinv.tolist(),
            "Rinv_factors": [F.tolist() for F in self.factors],
            "rule_hash": self.rule.content_hash(),
        }

    @classmethod
    def from_json(cls, doc, rule):
        if rule.content_hash() != doc["rule_hash"]:
            raise ValueError("basis was built on a different rule")
        raw = doc.get("Rinv_factors") or [doc["Rinv"]]
        factors = tuple(np.asarray(F, dtype=float) for F in raw)
        return cls(int(doc["n"]), factors, rule, float(np.linalg.cond(factors[0])))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path, rule):
        return cls.from_json(json.loads(Path(path).read_text()), rule)

    def content_hash(self):
        h = hashlib.sha256(self.rule.content_hash().encode())
        for F in self.factors:
            h.update(F.astype("<f8").tobytes())
        return h.hexdigest()


def build_ortho_basis(rule, n):
    """Orthonormalize the degree-``n`` harmonics on the nodes of ``rule``.

    ``rule`` should be exact to degree ``2n`` so that the discrete and the
    continuous inner products agree on ``P_n``.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if rule.degree < 2 * n:
        warnings.warn(
            f"rule degree {rule.degree} is below 2n = {2 * n}; "
            "orthonormality holds only for the discrete inner product",
            stacklevel=2,
        )
    V = eval_harmonics(n, rule.nodes)
    factors, cond = orthonormalizing_factors(V, rule.weights)
    if cond > COND_WARN:
        warnings.warn(
            f"harmonic Vandermonde condition estimate {cond:.1e}", IllConditionedWarning, stacklevel=2
        )
    return OrthoBasis(int(n), tuple(factors), rule, cond)


def eval_ortho(basis, pts, chunk=None):
    """Matrix ``U`` with ``U[i, j] = p_j(pts[i])``."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 3)
    if chunk is None or len(pts) <= chunk:
        return apply_factors(eval_harmonics(basis.n, pts), basis.factors)
    return np.concatenate(
        [apply_factors(eval_harmonics(basis.n, pts[i : i + chunk]), basis.factors)
         for i in range(0, len(pts), chunk)]
    )
