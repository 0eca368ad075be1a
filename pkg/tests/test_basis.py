import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation
from scipy.special import sph_harm_y

from sphquad.basis import OrthoBasis, build_ortho_basis, eval_ortho, orthonormalizing_factors
from sphquad.errors import IllConditionedWarning, RankDeficiencyError
from sphquad.harmonics import column, degrees, dim, eval_harmonics
from sphquad.rule import CubatureRule


def sphere_rule(n):
    """Product rule on the whole sphere, exact for degree ``2n + 1``."""
    z, wz = np.polynomial.legendre.leggauss(n + 1)
    k = 2 * n + 2
    phi = 2 * np.pi * np.arange(k) / k
    Z, P = np.meshgrid(z, phi, indexing="ij")
    s = np.sqrt(1 - Z**2)
    nodes = np.stack([s * np.cos(P), s * np.sin(P), Z], axis=-1).reshape(-1, 3)
    w = np.outer(wz, np.full(k, 2 * np.pi / k)).ravel()
    return CubatureRule(nodes, w, degree=2 * n + 1)


def gram(U, w):
    return U.T @ (w[:, None] * U)


def test_dimension_and_degrees():
    assert [dim(n) for n in range(4)] == [1, 4, 9, 16]
    assert list(degrees(2)) == [0, 1, 1, 1, 2, 2, 2, 2, 2]


def test_constant_harmonic():
    pts = np.random.default_rng(0).normal(size=(20, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    assert np.allclose(eval_harmonics(4, pts)[:, 0], 1 / (2 * np.sqrt(np.pi)), atol=1e-16)


def test_values_at_north_pole():
    V = eval_harmonics(8, [[0.0, 0.0, 1.0]])[0]
    for k in range(9):
        assert V[column(k, 0)] == pytest.approx(np.sqrt((2 * k + 1) / (4 * np.pi)), rel=1e-14)
        for m in range(1, k + 1):
            assert V[column(k, m, "cos")] == 0 and V[column(k, m, "sin")] == 0


def test_matches_complex_harmonics_up_to_phase():
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(40, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    theta = np.arccos(pts[:, 2])
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    V = eval_harmonics(10, pts)
    for k in range(11):
        for m in range(k + 1):
            Y = sph_harm_y(k, m, theta, phi)
            ref = [Y.real] if m == 0 else [np.sqrt(2) * Y.real, np.sqrt(2) * Y.imag]
            cols = [column(k, m)] if m == 0 else [column(k, m, "cos"), column(k, m, "sin")]
            for c, r in zip(cols, ref):
                sign = np.sign(V[:, c] @ r)
                assert np.abs(V[:, c] - sign * r).max() <= 1e-13


@pytest.mark.parametrize("n", [5, 10, 20])
def test_orthonormal_on_whole_sphere(n):
    r = sphere_rule(n)
    assert np.abs(gram(eval_harmonics(n, r.nodes), r.weights) - np.eye(dim(n))).max() <= 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_orthonormality_survives_rotation(seed):
    r = sphere_rule(6)
    R = Rotation.random(random_state=seed).as_matrix()
    V = eval_harmonics(6, r.nodes @ R.T)
    assert np.abs(gram(V, r.weights) - np.eye(49)).max() <= 1e-12


def test_extended_precision_agrees():
    pts = sphere_rule(6).nodes
    a = eval_harmonics(12, pts)
    b = eval_harmonics(12, pts, np.longdouble)
    assert b.dtype == np.longdouble and np.abs(a - b.astype(float)).max() <= 1e-14


def test_whole_sphere_basis_is_identity():
    r = sphere_rule(6)
    b = build_ortho_basis(r, 6)
    assert np.abs(b.Rinv - np.eye(49)).max() <= 1e-12
    assert b.cond == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("n", [3, 6, 10])
def test_orthonormal_on_polygon(rules, n):
    b = rules.basis(n)
    r = b.rule
    U = eval_ortho(b, r.nodes)
    assert np.abs(gram(U, r.weights) - np.eye(dim(n))).max() <= 1e-13
    # p_1 is the normalized constant
    assert np.allclose(U[:, 0], 1 / np.sqrt(r.weights.sum()), rtol=1e-13)


def test_change_of_basis_is_upper_triangular(rules):
    b = rules.basis(5)
    for F in b.factors:
        assert np.all(np.tril(F, -1) == 0)
        assert np.all(np.diag(F) > 0)
    V = eval_harmonics(5, b.rule.nodes)
    U = eval_ortho(b, b.rule.nodes)
    # combined matrix gives the same values to the accuracy allowed by its size
    scale = np.abs(V).max() * np.abs(b.Rinv).max() * dim(5)
    assert np.abs(V @ b.Rinv - U).max() <= 1e-12 * max(scale, 1)


def rounding_bound(b, pts):
    """Forward error scale of ``V R^{-1}``; large on small regions."""
    V = eval_harmonics(b.n, pts)
    return 1e-13 * (np.abs(V) @ np.abs(b.Rinv)).max()


def test_chunked_evaluation_agrees(rules):
    b = rules.basis(4)
    pts = b.rule.nodes
    diff = np.abs(eval_ortho(b, pts) - eval_ortho(b, pts, chunk=7)).max()
    assert diff <= rounding_bound(b, pts)


def test_repeated_passes_needed_on_small_regions(rules):
    b = rules.basis(10)
    assert b.cond > 1e12
    assert len(b.factors) >= 2
    V = eval_harmonics(10, b.rule.nodes)
    F, _ = orthonormalizing_factors(V, b.rule.weights, max_passes=1)
    one_pass = V @ F[0]
    assert np.abs(gram(one_pass, b.rule.weights) - np.eye(121)).max() > 1e-10


def test_too_few_nodes():
    r = sphere_rule(1)
    with pytest.raises(RankDeficiencyError):
        build_ortho_basis(CubatureRule(r.nodes[:5], r.weights[:5], degree=4), 2)


def test_rank_deficient_nodes_on_a_great_circle():
    t = np.linspace(0, 2 * np.pi, 100, endpoint=False)
    nodes = np.stack([np.cos(t), np.sin(t), np.zeros_like(t)], axis=1)
    with pytest.raises(RankDeficiencyError):
        build_ortho_basis(CubatureRule(nodes, np.full(100, 0.01), degree=4), 2)


def test_warnings(rules):
    with pytest.warns(IllConditionedWarning):
        build_ortho_basis(rules.compressed(12), 6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditionedWarning)
        with pytest.warns(UserWarning, match="below 2n"):
            build_ortho_basis(rules.compressed(6), 6)


def test_json_roundtrip(tmp_path, rules):
    b = rules.basis(4)
    path = tmp_path / "basis.json"
    b.save(path)
    back = OrthoBasis.load(path, b.rule)
    assert back.n == 4 and back.content_hash() == b.content_hash()
    diff = np.abs(eval_ortho(back, b.rule.nodes) - eval_ortho(b, b.rule.nodes)).max()
    assert diff <= rounding_bound(b, b.rule.nodes)
    with pytest.raises(ValueError):
        OrthoBasis.load(path, rules.compressed(6))


def test_json_with_single_matrix(rules):
    b = rules.basis(3)
    doc = b.to_json()
    doc.pop("Rinv_factors")
    back = OrthoBasis.from_json(doc, b.rule)
    assert np.allclose(back.Rinv, b.Rinv, rtol=0, atol=1e-12 * np.abs(b.Rinv).max())
