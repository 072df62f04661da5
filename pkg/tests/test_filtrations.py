import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import colspace_residual
from lapstab import generate
from lapstab.dgi import validate_morphism
from lapstab.filtrations import (
    DIAMOND_WEIGHTS,
    Digraph,
    SimplicialComplex,
    allowed_paths,
    diamond_digraph,
    digraph_filtration,
    monotone_values,
    omega,
    simplicial_chain,
    sublevel_filtration,
)
from lapstab.hodge import betti_numbers
from lapstab.linalg import ValidationError, max_abs


def _rank_betti(S):
    """Betti numbers from plain matrix ranks of the boundaries."""
    ranks = [0] + [np.linalg.matrix_rank(S.dmat(p)) if S.dmat(p).size else 0
                   for p in range(1, S.max_degree + 1)] + [0]
    return tuple(S.dim(p) - ranks[p] - ranks[p + 1] for p in range(S.max_degree + 1))


def test_single_vertex_chain():
    S = simplicial_chain(SimplicialComplex([(0,)]))
    assert S.dims == (1,)
    assert betti_numbers(S) == (1,)


def test_full_and_hollow_triangle():
    full = simplicial_chain(SimplicialComplex([(0, 1, 2)], close=True))
    assert full.dims == (3, 3, 1)
    assert betti_numbers(full) == (1, 0, 0)
    hollow = simplicial_chain(SimplicialComplex([(0, 1), (1, 2), (0, 2)], close=True))
    assert betti_numbers(hollow) == (1, 1)


def test_unclosed_complex_rejected():
    with pytest.raises(ValidationError, match="not closed"):
        SimplicialComplex([(0,), (0, 1)])


def test_non_monotone_values_name_the_pair():
    K = SimplicialComplex([(0, 1)], close=True)
    with pytest.raises(ValidationError, match=r"\(0,\).*\(0, 1\)"):
        monotone_values(K, {(0,): 2.0, (1,): 0.0, (0, 1): 1.0})


def test_lower_star_fill():
    K = SimplicialComplex([(0, 1, 2)], close=True)
    vals = monotone_values(K, {(0,): 0.0, (1,): 2.0, (0, 1, 2): 5.0}, fill=True)
    assert vals[(2,)] == 5.0
    assert vals[(0, 1)] == 2.0
    assert vals[(1, 2)] == 5.0


def test_constant_function_single_critical_value():
    K = SimplicialComplex([(0, 1, 2)], close=True)
    P = sublevel_filtration(K, {s: 1.5 for s in K.simplices})
    assert P.values.tolist() == [1.5]
    assert len(P.steps) == 0


def test_edge_merges_two_components():
    from lapstab.perslap import persistent_betti_oracle

    K = SimplicialComplex([(0, 1)], close=True)
    P = sublevel_filtration(K, {(0,): 0.0, (1,): 0.0, (0, 1): 1.0})
    assert persistent_betti_oracle(P, 0, 0, 0) == 2
    assert persistent_betti_oracle(P, 0, 1, 0) == 1
    assert persistent_betti_oracle(P, 1, 1, 0) == 1


def test_allowed_paths_diamond():
    A = allowed_paths(diamond_digraph(), 3)
    assert [len(a) for a in A] == [4, 4, 2, 0]
    assert A[2].tolist() == [[0, 1, 3], [0, 2, 3]]


def test_allowed_paths_edgeless_and_complete():
    A = allowed_paths(Digraph(3, []), 2)
    assert [len(a) for a in A] == [3, 0, 0]
    K3 = Digraph(3, list(itertools.permutations(range(3), 2)))
    assert [len(a) for a in allowed_paths(K3, 4)] == [3 * 2 ** p for p in range(5)]


def test_diamond_omega():
    om = omega(diamond_digraph(), 3)
    S = om.space
    assert S.dims == (4, 4, 1, 0)
    # ambient A_2 = (013, 023)
    assert colspace_residual(om.basis[2], np.array([[1.0], [-1.0]])) <= 1e-9
    assert S.space(2).gram.tolist() == [[2.0]]
    assert list(S.label(1)) == ["01", "02", "13", "23"]


def test_omega_directed_path_has_no_square():
    om = omega(Digraph(3, [(0, 1), (1, 2)]), 2)
    assert om.space.dims == (3, 2, 0)


def test_omega_triangle_contains_the_2_path():
    om = omega(Digraph(3, [(0, 1), (1, 2), (0, 2)]), 2)
    assert om.space.dims == (3, 3, 1)
    assert om.basis[2].ravel().tolist() == [1.0]
    assert betti_numbers(om.space) == (1, 0, 0)


def test_omega_betti_matches_rank_oracle():
    rng = np.random.default_rng(5)
    for _ in range(20):
        G = generate.random_digraph(rng, 5, 0.5)
        S = omega(G, 3).space
        assert betti_numbers(S) == _rank_betti(S)
        for p in range(2, S.max_degree + 1):
            if S.dmat(p).size and S.dmat(p - 1).size:
                assert max_abs(S.dmat(p - 1) @ S.dmat(p)) <= 1e-12


@pytest.mark.parametrize("edges,msg", [
    ([(0, 0)], "self-loop"),
    ([(0, 1), (0, 1)], "duplicate"),
    ([(0, 5)], "missing vertex"),
])
def test_digraph_rejections(edges, msg):
    with pytest.raises(ValidationError, match=msg):
        Digraph(3, edges)


def test_weights_must_cover_edges():
    with pytest.raises(ValidationError, match="missing"):
        digraph_filtration(diamond_digraph(), {(0, 1): 1.0}, 2)


def test_diamond_filtration_levels(diamond, diamond_base):
    assert diamond.values.tolist() == [1.0, 2.0, 3.0, 4.0]
    assert diamond_base.values.tolist() == [0.0, 1.0, 2.0, 3.0, 4.0]
    assert [diamond.space(i).dims[:3] for i in range(4)] == [
        (4, 1, 0), (4, 2, 0), (4, 3, 0), (4, 4, 1)]
    assert [betti_numbers(diamond.space(i))[0] for i in range(4)] == [3, 2, 1, 1]
    assert list(diamond.space(2).label(1)) == ["01", "13", "23"]


def test_diamond_weights_shape():
    assert set(DIAMOND_WEIGHTS) == set(diamond_digraph().edges)


def _check_steps(P):
    for f in P.steps:
        assert validate_morphism(f).ok
    for i in range(len(P) - 1):
        for p in range(P.max_degree + 1):
            Ei, Ej = P.embeddings[i][p], P.embeddings[i + 1][p]
            if Ei.shape[1]:
                # level i embeds into level i+1 inside the ambient
                np.testing.assert_allclose(Ej @ P.steps[i].mat(p), Ei, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_sublevel_steps_are_isometric_chain_inclusions(seed):
    rng = np.random.default_rng(seed)
    K = generate.random_complex(rng, int(rng.integers(2, 7)), 3)
    P = sublevel_filtration(K, generate.random_monotone_values(rng, K, 4))
    _check_steps(P)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_digraph_steps_are_isometric_chain_inclusions(seed):
    rng = np.random.default_rng(seed)
    G = generate.random_digraph(rng, int(rng.integers(2, 6)), 0.5)
    P = digraph_filtration(G, generate.random_weights(rng, G, 4), 2)
    _check_steps(P)
