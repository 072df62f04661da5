import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lapstab import generate
from lapstab.analysis import (
    INF,
    Barcode,
    barcode,
    bottleneck,
    bottleneck_bruteforce,
    canonical_candidate,
    distance_bracket,
    rank_function,
    shift,
    stability_harness,
    sup_distance,
)
from lapstab.filtrations import (
    DIAMOND_WEIGHTS,
    SimplicialComplex,
    diamond_digraph,
    digraph_filtration,
    sublevel_filtration,
)
from lapstab.interleaving import (
    corrupt_candidate,
    identity_candidate,
    inclusion_candidate,
    merged_grid,
    verify_interleaving,
)
from lapstab.linalg import ValidationError


def bc(*bars, p=0):
    return Barcode({p: sorted(bars)})


bars = st.lists(
    st.tuples(st.integers(0, 6), st.integers(1, 4), st.booleans()).map(
        lambda t: (t[0] / 2, INF if t[2] else (t[0] + t[1]) / 2)),
    max_size=4,
)


def test_bottleneck_small_cases():
    assert bottleneck(bc((0, 1)), bc()) == 0.5
    assert bottleneck(bc((0, 2)), bc((0, 3))) == 1.0
    assert bottleneck(bc((0, INF)), bc((0.5, INF))) == 0.5
    assert bottleneck(bc((0, INF)), bc()) == INF
    assert bottleneck(bc(), bc()) == 0.0


def test_bottleneck_takes_max_over_degrees():
    A = Barcode({0: [(0, INF)], 1: [(1, 3)]})
    B = Barcode({0: [(0, INF)]})
    assert bottleneck(A, B) == 1.0


@settings(max_examples=200, deadline=None)
@given(bars, bars)
def test_bottleneck_matches_bruteforce(A, B):
    assert bottleneck(bc(*A), bc(*B)) == bottleneck_bruteforce(bc(*A), bc(*B))


@settings(max_examples=100, deadline=None)
@given(bars, bars, bars)
def test_bottleneck_is_a_metric(A, B, C):
    a, b, c = bc(*A), bc(*B), bc(*C)
    assert bottleneck(a, a) == 0.0
    assert bottleneck(a, b) == bottleneck(b, a)
    assert bottleneck(a, c) <= bottleneck(a, b) + bottleneck(b, c)


def test_barcode_json_roundtrip():
    B = Barcode({0: [(0.0, 1.0), (0.0, INF)], 1: [(2.0, 3.0)]})
    assert Barcode.from_json(B.to_json()) == B


def test_diamond_barcode(diamond, diamond_base):
    assert barcode(diamond).degree(0) == [(1.0, 2.0), (1.0, 3.0), (1.0, INF)]
    assert barcode(diamond).degree(1) == []
    assert barcode(diamond_base).degree(0) == [(0.0, 1.0), (0.0, 2.0), (0.0, 3.0), (0.0, INF)]


def test_hollow_triangle_loop_bar():
    K = SimplicialComplex([(0, 1), (1, 2), (0, 2), (0, 1, 2)], close=True)
    vals = {s: 0.0 for s in K.simplices if len(s) == 1}
    vals.update({(0, 1): 1.0, (1, 2): 1.0, (0, 2): 2.0, (0, 1, 2): 3.0})
    B = barcode(sublevel_filtration(K, vals))
    assert B.degree(1) == [(2.0, 3.0)]
    assert B.degree(0) == [(0.0, 1.0), (0.0, 1.0), (0.0, INF)]


def test_barcode_reproduces_rank_function(rng):
    for _ in range(15):
        K = generate.random_complex(rng, 6, 3)
        P = sublevel_filtration(K, generate.random_monotone_values(rng, K, 4))
        B = barcode(P)
        for p in range(P.max_degree + 1):
            beta = rank_function(P, p)
            for i in range(len(P)):
                for j in range(i, len(P)):
                    n = sum(1 for x, y in B.degree(p) if x <= P.value(i) and y > P.value(j))
                    assert n == beta[i, j]


def test_merged_grid_collapses_near_points():
    assert merged_grid([0.0, 1.0], [1.0 + 1e-12, 2.0]).tolist() == [0.0, 1.0, 2.0]


def test_shift_identities(diamond):
    assert shift(diamond, 0.0).values.tolist() == diamond.values.tolist()
    twice = shift(shift(diamond, 0.25), 0.5)
    assert np.allclose(twice.values, shift(diamond, 0.75).values)
    assert twice.source["shift"] == 0.75


def test_identity_candidate_verifies(diamond):
    rep = verify_interleaving(diamond, diamond, identity_candidate(diamond))
    assert rep["ok"] and rep["residual"] <= 1e-12


def test_corruption_is_located(diamond):
    bad = corrupt_candidate(identity_candidate(diamond), "psi", 2)
    rep = verify_interleaving(diamond, diamond, bad)
    assert not rep["ok"]
    assert rep["where"] and rep["residual"] > 1e-3


def _diamond_with(weights):
    return digraph_filtration(diamond_digraph(), weights, 3)


def test_eps_too_small_is_rejected():
    S = _diamond_with(DIAMOND_WEIGHTS)
    T = _diamond_with({e: w + 1.0 for e, w in DIAMOND_WEIGHTS.items()})
    # S(a) does not include into T(a + 0.5) ⊂ T(a + 1)
    with pytest.raises(ValidationError, match="no inclusion|is empty"):
        inclusion_candidate(T, S, 0.5)
    assert verify_interleaving(S, T, inclusion_candidate(S, T, 1.0))["ok"]


def test_uniform_shift_bracket_is_tight():
    S = _diamond_with(DIAMOND_WEIGHTS)
    T = _diamond_with({e: w + 0.5 for e, w in DIAMOND_WEIGHTS.items()})
    br = distance_bracket(S, T)
    assert br["dgi"]["lower"] == 0.5
    assert br["dgi"]["upper"] == 0.5
    assert br["tree"] == {"lower": 0.5, "upper": 0.5}


def test_equal_filtrations_give_zero_bracket(diamond):
    br = distance_bracket(diamond, diamond)
    assert br["dgi"]["lower"] == 0.0 and br["dgi"]["upper"] == 0.0


def test_lower_bound_positive_for_different_barcodes():
    K = SimplicialComplex([(0, 1)], close=True)
    S = sublevel_filtration(K, {(0,): 0.0, (1,): 0.0, (0, 1): 1.0})
    T = sublevel_filtration(K, {(0,): 0.0, (1,): 0.0, (0, 1): 3.0})
    br = distance_bracket(S, T)
    # unmatched [0, 1) and [0, 3) beat matching them (cost 2)
    assert br["dgi"]["lower"] == 1.5
    assert br["dgi"]["upper"] == 2.0 == sup_distance(S, T)


def test_sup_distance_needs_a_shared_source(diamond):
    K = SimplicialComplex([(0, 1)], close=True)
    P = sublevel_filtration(K, {s: 0.0 for s in K.simplices})
    with pytest.raises(ValidationError):
        sup_distance(diamond, P)
    with pytest.raises(ValidationError):
        canonical_candidate(P, diamond)


def test_stability_harness_is_reproducible():
    K = SimplicialComplex([(0, 1, 2)], close=True)
    r1 = stability_harness(K, trials=6, seed=3, p_max=2, corrupt=True)
    r2 = stability_harness(K, trials=6, seed=3, p_max=2, corrupt=True)
    assert r1["violations"] == 0
    assert [r["sup"] for r in r1["records"]] == [r["sup"] for r in r2["records"]]
    assert all(r["corrupt_dgi_fails"] and r["corrupt_tree_fails"] for r in r1["records"])


def test_stability_harness_on_digraph():
    rep = stability_harness(diamond_digraph(), trials=5, seed=1, p_max=2)
    assert rep["violations"] == 0
    assert all(math.isclose(r["upper"], r["sup"]) for r in rep["records"])
