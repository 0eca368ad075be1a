"""Hyperinterpolation on a polygon: classical, filtered, Lasso and hybrid.

All variants start from the discrete Fourier coefficients
``c_j = sum_i w_i f(x_i) p_j(x_i)`` in the orthonormal basis of
:mod:`sphquad.basis` and differ only in how they damp them.
"""
from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .basis import eval_ortho
from .polygon import max_workers

VARIANTS = ("classical", "filtered", "lasso", "hybrid")
CHUNK = 20_000


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian ``N(0, sigma^2)`` plus impulse noise ``U[-a, a]`` with probability 1/2."""

    a: float = 0.0
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.a < 0 or self.sigma < 0:
            raise ValueError("noise amplitudes must be nonnegative")


@dataclass(frozen=True, eq=False)
class Hyperinterpolant:
    coeffs: np.ndarray
    basis: object
    variant: str = "classical"
    lam: float = 0.0
    mu: np.ndarray | None = field(default=None)

    @property
    def n(self):
        return self.basis.n

    @property
    def sparsity(self):
        return int(np.count_nonzero(self.coeffs))

    def __call__(self, pts):
        return evaluate(self, pts)

    def to_json(self):
        doc = {
            "variant": self.variant,
            "n": int(self.n),
            "lambda": float(self.lam),
            "coeffs": np.asarray(self.coeffs, dtype=float).tolist(),
            "basis_hash": self.basis.content_hash(),
        }
        if self.mu is not None:
            doc["mu"] = np.asarray(self.mu, dtype=float).tolist()
        return doc

    @classmethod
    def from_json(cls, doc, basis):
        if doc["basis_hash"] != basis.content_hash():
            raise ValueError("coefficients belong to a different basis")
        mu = doc.get("mu")
        return cls(np.asarray(doc["coeffs"], dtype=float), basis, doc["variant"],
                   float(doc["lambda"]), None if mu is None else np.asarray(mu, dtype=float))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json()))


def soft_threshold(a, k):
    """``max(0, a - k) + min(0, a + k)``, elementwise."""
    if np.any(np.asarray(k) < 0):
        raise ValueError("threshold must be nonnegative")
    a = np.asarray(a, dtype=float)
    out = np.maximum(0.0, a - k) + np.minimum(0.0, a + k)
    return out if out.ndim else float(out)


def filter_h(x):
    """1 on ``[0, 1/2]``, ``sin^2(pi x)`` on ``[1/2, 1]``, 0 beyond."""
    x = np.asarray(x, dtype=float)
    out = np.where(x <= 0.5, 1.0, np.where(x >= 1.0, 0.0, np.sin(np.pi * x) ** 2))
    return out if out.ndim else float(out)


def _filter_weights(basis):
    if basis.n == 0:
        return np.ones(1)
    return filter_h(basis.degrees / basis.n)


def _samples(basis, samples):
    f = np.asarray(samples, dtype=float).ravel()
    if len(f) != len(basis.rule):
        raise ValueError(f"expected {len(basis.rule)} samples, got {len(f)}")
    return f


def fourier_coefficients(basis, samples):
    f = _samples(basis, samples)
    U = eval_ortho(basis, basis.rule.nodes)
    return U.T @ (basis.rule.weights * f)


def _penalties(basis, lam, mu):
    if not lam > 0:
        raise ValueError("lambda must be positive; use the classical variant for lambda = 0")
    mu = np.ones(basis.dim) if mu is None else np.broadcast_to(np.asarray(mu, dtype=float), (basis.dim,))
    if np.any(mu <= 0):
        raise ValueError("penalty weights must be positive")
    return np.array(mu)


def hyperinterpolate(basis, samples):
    return Hyperinterpolant(fourier_coefficients(basis, samples), basis, "classical")


def filtered_hyperinterpolate(basis, samples):
    c = fourier_coefficients(basis, samples)
    return Hyperinterpolant(_filter_weights(basis) * c, basis, "filtered")


def lasso_hyperinterpolate(basis, samples, lam, mu=None):
    mu = _penalties(basis, lam, mu)
    c = fourier_coefficients(basis, samples)
    return Hyperinterpolant(soft_threshold(c, lam * mu), basis, "lasso", float(lam), mu)


def hybrid_hyperinterpolate(basis, samples, lam, mu=None):
    mu = _penalties(basis, lam, mu)
    c = fourier_coefficients(basis, samples)
    coeffs = _filter_weights(basis) * soft_threshold(c, lam * mu)
    return Hyperinterpolant(coeffs, basis, "hybrid", float(lam), mu)


def fit(basis, samples, variant="classical", lam=None, mu=None):
    if variant == "classical":
        return hyperinterpolate(basis, samples)
    if variant == "filtered":
        return filtered_hyperinterpolate(basis, samples)
    if variant == "lasso":
        return lasso_hyperinterpolate(basis, samples, lam, mu)
    if variant == "hybrid":
        return hybrid_hyperinterpolate(basis, samples, lam, mu)
    raise ValueError(f"unknown variant {variant!r}")


def lambda_by_rank(coeffs, k):
    """The ``k``-th largest coefficient magnitude (1-based)."""
    mags = np.sort(np.abs(np.asarray(coeffs, dtype=float)))[::-1]
    if not 1 <= k <= len(mags):
        raise ValueError(f"rank must lie in [1, {len(mags)}]")
    return float(mags[k - 1])


def evaluate(hyp, pts):
    pts = np.asarray(pts, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        return np.zeros(0)
    return eval_ortho(hyp.basis, pts, chunk=CHUNK) @ hyp.coeffs


def operator_norm(basis, dense_pts):
    """Estimate ``max_x sum_i w_i |K_n(x_i, x)|`` over ``dense_pts``."""
    dense_pts = np.asarray(dense_pts, dtype=float).reshape(-1, 3)
    if len(dense_pts) == 0:
        raise ValueError("operator norm needs at least one point")
    Un = eval_ortho(basis, basis.rule.nodes)
    w = basis.rule.weights
    best = 0.0
    for i in range(0, len(dense_pts), CHUNK):
        K = Un @ eval_ortho(basis, dense_pts[i : i + CHUNK]).T
        best = max(best, float(np.max(w @ np.abs(K))))
    return best


def add_noise(samples, spec):
    f = np.asarray(samples, dtype=float)
    rng = np.random.default_rng(spec.seed)
    gauss = spec.sigma * rng.standard_normal(f.shape)
    hit = rng.random(f.shape) < 0.5
    impulse = np.where(hit, rng.uniform(-spec.a, spec.a, f.shape), 0.0)
    return f + gauss + impulse


def l2_error(f_true, hyp, quad):
    """Discrete L2 distance on ``quad`` between ``f_true(x, y, z)`` and ``hyp``."""
    total = 0.0
    for i in range(0, len(quad), CHUNK):
        X = quad.nodes[i : i + CHUNK]
        d = f_true(X[:, 0], X[:, 1], X[:, 2]) - evaluate(hyp, X)
        total += float(quad.weights[i : i + CHUNK] @ (d * d))
    return float(np.sqrt(total))


def noise_experiment(basis, f, quad, noise, trials=10, variants=VARIANTS, lam=None,
                     lambda_rank=None, mu=None):
    """Fit noisy samples of ``f`` with each variant over seeded trials.

    Trial ``t`` draws its noise with seed ``noise.seed + t``. For the
    thresholding variants ``lam`` is used directly, or, if ``lambda_rank``
    is given, set per trial to that rank of the classical coefficients.
    Returns rows ordered by trial, then variant.
    """
    nodes = basis.rule.nodes
    clean = f(nodes[:, 0], nodes[:, 1], nodes[:, 2])
    U = eval_ortho(basis, nodes)
    w = basis.rule.weights
    # the error rule is shared by every fit, so tabulate it once
    Uq = eval_ortho(basis, quad.nodes, chunk=CHUNK)
    fq = f(quad.nodes[:, 0], quad.nodes[:, 1], quad.nodes[:, 2])

    def err(hyp):
        d = fq - Uq @ hyp.coeffs
        return float(np.sqrt(quad.weights @ (d * d)))

    def run(t):
        spec = NoiseSpec(noise.a, noise.sigma, noise.seed + t)
        noisy = add_noise(clean, spec)
        c = U.T @ (w * noisy)
        lt = lambda_by_rank(c, lambda_rank) if lambda_rank is not None else lam
        rows = []
        for v in variants:
            hyp = fit(basis, noisy, v, lt, mu) if v in ("lasso", "hybrid") else fit(basis, noisy, v)
            rows.append({
                "trial": t, "variant": v, "lambda": hyp.lam, "a": noise.a, "sigma": noise.sigma,
                "l2_error": err(hyp), "sparsity": hyp.sparsity,
            })
        return rows

    workers = min(max_workers(), trials)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, range(trials)))
    else:
        results = [run(t) for t in range(trials)]
    return [row for rows in results for row in rows]


def average_errors(rows):
    """Mean l2 error per variant, summed in trial order."""
    out = {}
    for v in dict.fromkeys(r["variant"] for r in rows):
        errs = [r["l2_error"] for r in rows if r["variant"] == v]
        out[v] = float(np.sum(errs) / len(errs))
    return out


EXPERIMENT_FIELDS = ("trial", "variant", "lambda", "a", "sigma", "l2_error", "sparsity")


def write_experiment_csv(rows, stream):
    writer = csv.DictWriter(stream, fieldnames=EXPERIMENT_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (repr(float(r[k])) if k in ("lambda", "a", "sigma", "l2_error") else r[k])
                         for k in EXPERIMENT_FIELDS})
