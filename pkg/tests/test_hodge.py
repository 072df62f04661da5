import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import complex_filtration, non_natural_witness
from lapstab.dgi import DgiSpace, identity_morphism
from lapstab.filtrations import diamond_digraph, omega
from lapstab.generate import random_dgi_space
from lapstab.hodge import (
    algebraic_decompose,
    harmonic_homology_check,
    harmonic_map,
    harmonic_projector,
    hodge_decompose,
    retract,
    retract_residuals,
    summand_projectors,
)
from lapstab.linalg import (
    ContractError,
    InnerSpace,
    LinearMap,
    adjoint,
    containment_residual,
    kernel,
    max_abs,
    span,
    subspace_distance,
    subspace_intersect,
)

seeds = st.integers(0, 2 ** 32 - 1)


def _betti_oracle(S):
    """dim ker d_p - rank d_{p+1} with plain numpy ranks on the Euclidean matrices."""
    out = []
    for p in range(S.max_degree + 1):
        def r(q):
            m = S.d(q).euclid()
            return np.linalg.matrix_rank(m, tol=1e-8) if m.size else 0
        out.append(S.dim(p) - r(p) - r(p + 1))
    return tuple(out)


def _random_space(seed):
    rng = np.random.default_rng(seed)
    dims = tuple(int(x) for x in rng.integers(0, 5, size=int(rng.integers(1, 5))))
    return random_dgi_space(rng, dims, weighted=bool(rng.integers(0, 2)))


def test_zero_maps_give_all_harmonic():
    V = InnerSpace.standard(3)
    z_in = LinearMap(InnerSpace.standard(2), V, np.zeros((3, 2)))
    z_out = LinearMap(V, InnerSpace.standard(1), np.zeros((1, 3)))
    a, b, H = algebraic_decompose(z_in, z_out)
    assert (a.dim, b.dim, H.dim) == (0, 0, 3)


def test_algebraic_decompose_requires_composable_zero():
    V = InnerSpace.standard(2)
    T = LinearMap(V, V, np.eye(2))
    with pytest.raises(ContractError):
        algebraic_decompose(T, T)


def test_diamond_degree0_harmonic_line():
    S = omega(diamond_digraph(), 2).space
    _, _, H = algebraic_decompose(S.d(1), S.d(0))
    assert H.dim == 1
    ones = span(S.space(0), np.ones((4, 1)))
    assert subspace_distance(H, ones) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_algebraic_decompose_random(seed):
    S = _random_space(seed)
    if S.max_degree < 1:
        return
    p = int(np.random.default_rng(seed).integers(0, S.max_degree + 1))
    phi, psi = S.d(p + 1), S.d(p)
    a, b, H = algebraic_decompose(phi, psi)
    assert a.dim + b.dim + H.dim == S.dim(p)
    oracle = subspace_intersect(kernel(psi), kernel(adjoint(phi)))
    assert subspace_distance(H, oracle) <= 1e-9


def test_zero_differential_decomposition():
    S = DgiSpace.standard([2, 3], [np.zeros((2, 3))])
    hd = hodge_decompose(S)
    assert hd.betti == (2, 3)
    assert all(d.im_d.dim == 0 and d.im_dstar.dim == 0 for d in hd.degrees)


def test_diamond_full_decomposition():
    oc = omega(diamond_digraph(), 2)
    S = oc.space
    hd = hodge_decompose(S)
    totals = [sum(getattr(hd[p], k).dim for p in range(3)) for k in ("harmonic", "im_dstar", "im_d")]
    assert totals == [1, 4, 4]
    labels = list(S.label(1))
    assert labels == ["01", "02", "13", "23"]
    e = {lab: np.eye(4)[:, i] for i, lab in enumerate(labels)}
    for v in (e["01"] + e["02"], e["01"] + e["23"], e["13"] + e["02"]):
        assert containment_residual(span(S.space(1), v), hd[1].im_dstar) <= 1e-9
    assert hd[2].im_dstar.dim == 1 and hd[2].harmonic.dim == 0
    loop = e["01"] + e["13"] - e["02"] - e["23"]
    assert subspace_distance(hd[1].im_d, span(S.space(1), loop)) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_decomposition_orthogonal_and_complete(seed):
    S = _random_space(seed)
    hd = hodge_decompose(S)
    for p in range(S.max_degree + 1):
        G = S.space(p).gram
        parts = [hd[p].im_d.basis, hd[p].im_dstar.basis, hd[p].harmonic.basis]
        assert sum(x.shape[1] for x in parts) == S.dim(p)
        for i in range(3):
            for j in range(i + 1, 3):
                if parts[i].size and parts[j].size:
                    assert np.abs(parts[i].T @ G @ parts[j]).max() <= 1e-9
    assert hd.betti == _betti_oracle(S)


def test_betti_on_random_complexes():
    for seed in range(15):
        P = complex_filtration(seed)
        S = P.space(len(P) - 1)
        assert hodge_decompose(S).betti == _betti_oracle(S)
        assert harmonic_homology_check(S)["ok"]


def test_retract_trivial_cases():
    S = DgiSpace.standard([2, 1], [np.zeros((2, 1))])
    i, p, K = retract(S)
    assert all(not k.matrix.any() for k in K)
    np.testing.assert_allclose(i[0].matrix @ p[0].matrix, np.eye(2), atol=1e-12)
    V, _, _ = non_natural_witness()
    i, p, K = retract(V)
    # K(da) = a and h = 0 on the acyclic pair
    np.testing.assert_allclose(K[0].matrix, [[1.0]], atol=1e-12)
    assert all(h.matrix.size == 0 or np.abs(h.matrix).max() <= 1e-12 for h in harmonic_projector(V))


@settings(max_examples=50, deadline=None)
@given(seed=seeds)
def test_retract_identities(seed):
    S = _random_space(seed)
    res = retract_residuals(S)
    assert max(res.values()) <= 1e-9, res


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_K_matches_basiswise_construction(seed):
    S = _random_space(seed)
    hd = hodge_decompose(S)
    for p in range(S.max_degree):
        K = hd[p].retract_K.matrix
        # K vanishes on H ⊕ Im d* and inverts d on Im d*_{p+1}
        for sub in (hd[p].harmonic, hd[p].im_dstar):
            if sub.dim:
                assert max_abs(K @ sub.basis) <= 1e-9
        Z = hd[p + 1].im_dstar.basis
        if Z.size:
            np.testing.assert_allclose(K @ S.dmat(p + 1) @ Z, Z, atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_harmonic_projector_axioms(seed):
    S = _random_space(seed)
    hd = hodge_decompose(S)
    for p, h in enumerate(harmonic_projector(S)):
        m = h.matrix
        np.testing.assert_allclose(m @ m, m, atol=1e-9)
        np.testing.assert_allclose(adjoint(h).matrix, m, atol=1e-9)
        assert subspace_distance(span(S.space(p), m), hd[p].harmonic) <= 1e-9


def test_harmonic_map_identity():
    S = _random_space(7)
    for m in harmonic_map(identity_morphism(S)):
        np.testing.assert_allclose(m.matrix, np.eye(m.matrix.shape[0]), atol=1e-9)


def test_diamond_harmonic_map_values(diamond):
    h2 = diamond.hodge(1)[0].projector_h.matrix
    j = diamond.morphism(0, 1).mat(0)
    e = np.eye(4)
    np.testing.assert_allclose(h2 @ j @ e[2], 0.5 * (e[2] + e[3]), atol=1e-9)
    np.testing.assert_allclose(h2 @ j @ (e[0] + e[1]), e[0] + e[1], atol=1e-9)
    h3 = diamond.hodge(2)[0].projector_h.matrix
    j13 = diamond.morphism(0, 2).mat(0)
    np.testing.assert_allclose(h3 @ j13 @ e[2], 0.25 * np.ones(4), atol=1e-9)
    np.testing.assert_allclose(h3 @ j13 @ (e[0] + e[1]), 0.5 * np.ones(4), atol=1e-9)


def test_harmonic_functoriality_and_naturality():
    for seed in range(12):
        P = complex_filtration(seed)
        m = len(P)
        i, j, k = 0, m // 2, m - 1
        hij = harmonic_map(P.morphism(i, j), P.hodge(i), P.hodge(j))
        hjk = harmonic_map(P.morphism(j, k), P.hodge(j), P.hodge(k))
        hik = harmonic_map(P.morphism(i, k), P.hodge(i), P.hodge(k))
        for p in range(len(hik)):
            np.testing.assert_allclose(hjk[p].matrix @ hij[p].matrix, hik[p].matrix, atol=1e-9)
        rep = harmonic_homology_check(P.space(i), P.morphism(i, k))
        assert rep["ok"] and rep["naturality_residual"] <= 1e-9


def test_hodge_summands_are_not_natural():
    V, W, f = non_natural_witness()
    hv, hw = hodge_decompose(V), hodge_decompose(W)
    x = {0: np.array([1.0]), 1: np.array([1.0])}          # a + da
    pwf = {p: summand_projectors(hw, p)[1] @ f.mat(p) @ x[p] for p in (0, 1)}
    fpv = {p: f.mat(p) @ summand_projectors(hv, p)[1] @ x[p] for p in (0, 1)}
    np.testing.assert_allclose(pwf[1], [1.0, 0.0], atol=1e-12)     # b
    np.testing.assert_allclose(fpv[1], [1.0, 1.0], atol=1e-12)     # b + x
    np.testing.assert_allclose(pwf[0], [0.0], atol=1e-12)
    diff = pwf[1] - fpv[1]
    assert np.sqrt(diff @ W.space(1).gram @ diff) > 0.1
