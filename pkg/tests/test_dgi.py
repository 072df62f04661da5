import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import complex_filtration, non_natural_witness
from lapstab.dgi import (
    DgiMorphism,
    DgiSpace,
    compose,
    direct_sum,
    identity_morphism,
    isomorphic_dims,
    morphisms_equal,
    pushout,
    validate_morphism,
    validate_space,
)
from lapstab.filtrations import diamond_digraph, omega
from lapstab.generate import random_dgi_space
from lapstab.linalg import DimensionError, ValidationError

seeds = st.integers(0, 2 ** 32 - 1)


def test_one_degree_space_is_valid():
    S = DgiSpace.standard([3], [])
    assert validate_space(S).ok and S.dims == (3,)


def test_diamond_omega_is_valid():
    S = omega(diamond_digraph(), 2).space
    rep = validate_space(S)
    assert rep.ok and S.dims == (4, 4, 1)


def test_corrupt_differential_reports_degree():
    rng = np.random.default_rng(0)
    S = random_dgi_space(rng, (3, 4, 2))
    d1, d2 = S.dmat(1), S.dmat(2) + rng.normal(size=(4, 2))
    bad = DgiSpace(list(S.spaces), [d1, d2], check=False)
    rep = validate_space(bad)
    assert not rep.ok
    if np.abs(d1 @ d2).max() > 1e-6:
        assert any(f["kind"] == "d_squared" and f["degree"] == 2 for f in rep.failures)
    with pytest.raises(ValidationError):
        DgiSpace(list(S.spaces), [d1, d2])


def test_wrong_differential_count():
    with pytest.raises(DimensionError):
        DgiSpace.standard([1, 1], [])


def test_identity_and_witness_morphisms_valid():
    S = random_dgi_space(np.random.default_rng(1))
    assert validate_morphism(identity_morphism(S)).ok
    V, W, f = non_natural_witness()
    rep = validate_morphism(f)
    assert rep.ok, rep.failures


def test_scaling_breaks_isometry():
    S = random_dgi_space(np.random.default_rng(2))
    twice = DgiMorphism(S, S, [2 * np.eye(n) for n in S.dims], check=False)
    rep = validate_morphism(twice)
    assert not rep.ok and {f["kind"] for f in rep.failures} == {"isometry"}
    with pytest.raises(ValidationError):
        DgiMorphism(S, S, [2 * np.eye(n) for n in S.dims])


def test_non_chain_map_detected():
    V, W, f = non_natural_witness()
    # isometric in each degree but d(f a) = db while f(da) = -db
    g = DgiMorphism(V, W, [-f.mat(0), f.mat(1)], check=False)
    assert {x["kind"] for x in validate_morphism(g).failures} == {"chain"}


@settings(max_examples=30, deadline=None)
@given(seed=seeds)
def test_direct_sum(seed):
    rng = np.random.default_rng(seed)
    V = random_dgi_space(rng, tuple(int(x) for x in rng.integers(0, 4, size=3)))
    W = random_dgi_space(rng, tuple(int(x) for x in rng.integers(0, 4, size=2)))
    S, j1, j2 = direct_sum(V, W)
    assert validate_space(S).ok
    for p in range(3):
        assert S.dim(p) == V.dim(p) + W.dim(p)
    assert validate_morphism(j1).ok and validate_morphism(j2).ok
    Z, i1, _ = direct_sum(V, DgiSpace.zero())
    assert Z.dims == V.dims and morphisms_equal(i1, identity_morphism(V))


def _check_pushout(f1, f2):
    po = pushout(f1, f2)
    V = f1.source
    assert validate_morphism(po.g1).ok and validate_morphism(po.g2).ok
    assert validate_space(po.space).ok
    for p in range(V.max_degree + 1):
        np.testing.assert_allclose(po.g1.mat(p) @ f1.mat(p), po.g2.mat(p) @ f2.mat(p), atol=1e-9)
    D = max(f1.target.max_degree, f2.target.max_degree)
    for p in range(D + 1):
        assert po.space.dim(p) == f1.target.dim(p) + f2.target.dim(p) - V.dim(p)
    assert po.residuals["relation_closed"] <= 1e-9
    return po


def test_pushout_of_zero_source_is_direct_sum():
    rng = np.random.default_rng(4)
    W1, W2 = random_dgi_space(rng, (2, 3)), random_dgi_space(rng, (3, 1))
    Z = DgiSpace.standard([0, 0], [np.zeros((0, 0))])
    f1 = DgiMorphism(Z, W1, [np.zeros((2, 0)), np.zeros((3, 0))])
    f2 = DgiMorphism(Z, W2, [np.zeros((3, 0)), np.zeros((1, 0))])
    po = _check_pushout(f1, f2)
    S, _, _ = direct_sum(W1, W2)
    assert po.space.dims == S.dims


def test_pushout_along_identity_is_the_other_leg():
    rng = np.random.default_rng(5)
    S = random_dgi_space(rng, (3, 3, 1))
    po = _check_pushout(identity_morphism(S), identity_morphism(S))
    assert po.space.dims == S.dims
    assert morphisms_equal(po.g1, identity_morphism(S))


def test_pushout_of_filtration_inclusions():
    done = 0
    for seed in range(40):
        P = complex_filtration(seed)
        m = len(P)
        if m < 2:
            continue
        rng = np.random.default_rng(seed)
        a = int(rng.integers(0, m - 1))
        b, t = sorted(int(x) for x in rng.integers(a, m, size=2))
        po = _check_pushout(P.morphism(a, b), P.morphism(a, t))
        if a in (b, t):
            assert po.space.dims == P.space(max(b, t)).dims
        done += 1
    assert done >= 8


def test_pushout_of_two_proper_inclusions_is_larger_than_the_top_level(diamond):
    # gluing S_2 and S_3 along S_1 keeps two copies of e23's new contributions apart
    po = _check_pushout(diamond.morphism(0, 1), diamond.morphism(0, 2))
    top = diamond.space(2)
    assert po.space.total_dim > top.total_dim
    assert po.space.dims[0] == 4 and po.space.dims[1] == top.dims[1] + 1


def test_pushout_rejects_invalid_leg():
    V, W, f = non_natural_witness()
    bad = DgiMorphism(V, W, [2 * f.mat(0), f.mat(1)], check=False)
    with pytest.raises(ValidationError):
        pushout(f, bad)


def test_compose_and_dims():
    rng = np.random.default_rng(6)
    S = random_dgi_space(rng)
    i = identity_morphism(S)
    assert morphisms_equal(compose(i, i), i)
    assert isomorphic_dims(S, S)
    with pytest.raises(DimensionError):
        compose(i, identity_morphism(random_dgi_space(rng, (1, 1))))
