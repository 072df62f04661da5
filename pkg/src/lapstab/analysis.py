"""Barcodes, bottleneck distance, interleaving brackets and the stability harness."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .interleaving import (
    InterleavingCandidate,
    inclusion_candidate,
    verify_interleaving,
)
from .laptree import build_tree, verify_tree_interleaving
from .linalg import InvariantViolation, NumericPolicy, ValidationError, get_policy
from .perslap import PersistenceDgi, betti_oracle_by_index

INF = math.inf


@dataclass
class Barcode:
    """Per degree, a sorted list of ``(birth, death)`` with ``death`` possibly ``inf``."""

    bars: dict = field(default_factory=dict)

    def degree(self, p: int) -> list:
        return self.bars.get(p, [])

    @property
    def degrees(self) -> list:
        return sorted(self.bars)

    def to_json(self) -> dict:
        return {str(p): [[b, "inf" if d == INF else d] for b, d in self.bars[p]]
                for p in self.degrees}

    @classmethod
    def from_json(cls, doc) -> "Barcode":
        bars = {}
        for p, lst in doc.items():
            bars[int(p)] = sorted(
                (float(b), INF if d in ("inf", None) or d == INF else float(d)) for b, d in lst
            )
        return cls(bars)


def rank_function(P: PersistenceDgi, p: int, policy=None):
    """``beta[i, j] = β_p^{t_i, t_j}`` for ``i <= j`` (zero below the diagonal)."""
    m = len(P)
    beta = np.zeros((m, m), dtype=np.int64)
    for i in range(m):
        for j in range(i, m):
            beta[i, j] = betti_oracle_by_index(P, i, j, p, policy)
    return beta


def barcode(P: PersistenceDgi, policy: NumericPolicy | None = None) -> Barcode:
    """Bars by inclusion-exclusion over the persistent Betti numbers.

    ``mu(i, j) = β^{i,j-1} - β^{i,j} - β^{i-1,j-1} + β^{i-1,j}`` with
    ``β`` zero outside the grid; ``j = m`` encodes an infinite death.
    """
    policy = policy or get_policy()
    m = len(P)
    out = {}
    for p in range(P.max_degree + 1):
        beta = rank_function(P, p, policy)

        def B(i, j):
            if i < 0 or j >= m or i > j:
                return 0
            return int(beta[i, j])

        bars = []
        for i in range(m):
            for j in range(i + 1, m + 1):
                mu = B(i, j - 1) - B(i, j) - B(i - 1, j - 1) + B(i - 1, j)
                if mu < 0:
                    raise InvariantViolation(
                        f"negative multiplicity {mu} for bar [{P.value(i)}, {j}) in degree {p}"
                    )
                death = INF if j == m else P.value(j)
                bars.extend([(P.value(i), death)] * mu)
        out[p] = sorted(bars)
        _check_rank_consistency(P, out[p], beta)
    return Barcode(out)


def _check_rank_consistency(P, bars, beta):
    m = len(P)
    for i in range(m):
        for j in range(i, m):
            a, b = P.value(i), P.value(j)
            n = sum(1 for x, y in bars if x <= a and y > b)
            if n != beta[i, j]:
                raise InvariantViolation(
                    f"barcode rank mismatch at ({a}, {b}): {n} bars vs beta={beta[i, j]}"
                )


def bar_cost(x, y) -> float:
    """L-infinity cost of matching two bars; infinite bars only match each other."""
    (b1, d1), (b2, d2) = x, y
    if (d1 == INF) != (d2 == INF):
        return INF
    if d1 == INF:
        return abs(b1 - b2)
    return max(abs(b1 - b2), abs(d1 - d2))


def diag_cost(x) -> float:
    b, d = x
    return INF if d == INF else (d - b) / 2.0


def _feasible(A, B, delta) -> bool:
    n1, n2 = len(A), len(B)
    n = n1 + n2
    adj = np.zeros((n, n), dtype=np.uint8)
    for i, x in enumerate(A):
        for j, y in enumerate(B):
            if bar_cost(x, y) <= delta:
                adj[i, j] = 1
        if diag_cost(x) <= delta:
            adj[i, n2 + i] = 1
    for j, y in enumerate(B):
        if diag_cost(y) <= delta:
            adj[n1 + j, j] = 1
    adj[n1:, n2:] = 1
    return kernels.max_matching(adj) == n


def bottleneck_degree(A, B) -> float:
    A, B = list(A), list(B)
    if sum(d == INF for _, d in A) != sum(d == INF for _, d in B):
        return INF
    if not A and not B:
        return 0.0
    cands = {0.0}
    for x in A:
        cands.add(diag_cost(x))
        for y in B:
            cands.add(bar_cost(x, y))
    for y in B:
        cands.add(diag_cost(y))
    cands = sorted(c for c in cands if c != INF)
    lo, hi = 0, len(cands) - 1
    if not _feasible(A, B, cands[hi]):
        return INF
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(A, B, cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo])


def bottleneck(B1: Barcode, B2: Barcode) -> float:
    """Max over degrees of the exact bottleneck distance."""
    degs = set(B1.degrees) | set(B2.degrees)
    return max((bottleneck_degree(B1.degree(p), B2.degree(p)) for p in degs), default=0.0)


def bottleneck_bruteforce_degree(A, B) -> float:
    """Exhaustive minimum over all partial matchings; for testing."""
    A, B = list(A), list(B)
    best = INF
    n1, n2 = len(A), len(B)
    for k in range(0, min(n1, n2) + 1):
        for left in itertools.combinations(range(n1), k):
            for right in itertools.permutations(range(n2), k):
                cost = 0.0
                for i, j in zip(left, right):
                    cost = max(cost, bar_cost(A[i], B[j]))
                for i in set(range(n1)) - set(left):
                    cost = max(cost, diag_cost(A[i]))
                for j in set(range(n2)) - set(right):
                    cost = max(cost, diag_cost(B[j]))
                best = min(best, cost)
    return best


def bottleneck_bruteforce(B1: Barcode, B2: Barcode) -> float:
    degs = set(B1.degrees) | set(B2.degrees)
    return max((bottleneck_bruteforce_degree(B1.degree(p), B2.degree(p)) for p in degs), default=0.0)


# ---------------------------------------------------------------- interleavings

def sup_distance(S: PersistenceDgi, T: PersistenceDgi) -> float:
    """``||f - g||_inf`` for two filtrations of the same complex or digraph."""
    a, b = S.source, T.source
    if not a or not b or a.get("kind") != b.get("kind"):
        raise ValidationError("filtrations do not share a source object")
    if a.get("shift", 0.0) or b.get("shift", 0.0):
        raise ValidationError("shifted filtrations have no canonical sup distance")
    if a["kind"] == "simplicial":
        if a["complex"].simplices != b["complex"].simplices:
            raise ValidationError("filtrations are on different complexes")
        keys = a["complex"].simplices
    else:
        ga, gb = a["graph"], b["graph"]
        if ga.n_vertices != gb.n_vertices or ga.edges != gb.edges:
            raise ValidationError("filtrations are on different digraphs")
        keys = ga.edges
    fa, fb = a["values"] if a["kind"] == "simplicial" else a["weights"], \
        b["values"] if b["kind"] == "simplicial" else b["weights"]
    return max((abs(fa[k] - fb[k]) for k in keys), default=0.0)


def canonical_interleaving(S: PersistenceDgi, T: PersistenceDgi) -> InterleavingCandidate:
    """Inclusion candidate at ``eps = ||f - g||_inf`` (simplicial sublevel case)."""
    if S.source.get("kind") != "simplicial":
        raise ValidationError("expected simplicial filtrations")
    return inclusion_candidate(S, T, sup_distance(S, T))


def canonical_interleaving_digraph(S: PersistenceDgi, T: PersistenceDgi) -> InterleavingCandidate:
    """Inclusion candidate at ``eps = ||f - g||_inf`` for two weightings of one digraph."""
    if S.source.get("kind") != "digraph":
        raise ValidationError("expected digraph filtrations")
    if S.source.get("base_level") != T.source.get("base_level"):
        raise ValidationError("filtrations disagree on the base level")
    if S.source.get("p_max") != T.source.get("p_max"):
        raise ValidationError("filtrations disagree on p_max")
    return inclusion_candidate(S, T, sup_distance(S, T))


def canonical_candidate(S: PersistenceDgi, T: PersistenceDgi) -> InterleavingCandidate:
    if S.source.get("kind") == "digraph":
        return canonical_interleaving_digraph(S, T)
    return canonical_interleaving(S, T)


@dataclass
class DistanceBracket:
    lower: float
    upper: float | None
    certificate: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "certificate": self.certificate}


def distance_bracket(S: PersistenceDgi, T: PersistenceDgi, candidates=None,
                     policy: NumericPolicy | None = None, *, trees: bool = True) -> dict:
    """Certified bracket ``lower <= d_I(S, T) <= upper``.

    ``lower`` is the barcode bottleneck distance; ``upper`` the smallest
    shift among candidates that verify.  The canonical inclusion candidate is
    added whenever both objects come from the same complex or digraph.  With
    ``trees`` the candidates are also checked at the Laplacian-tree level and
    the tree bracket is reported alongside.
    """
    policy = policy or get_policy()
    lower = bottleneck(barcode(S, policy), barcode(T, policy))
    cands = list(candidates or [])
    try:
        cands.append(canonical_candidate(S, T))
    except ValidationError:
        pass
    verified, tree_verified, records = [], [], []
    TS = build_tree(S, policy) if trees and cands else None
    TT = build_tree(T, policy) if trees and cands else None
    for c in cands:
        rep = verify_interleaving(S, T, c, policy)
        rec = {"epsilon": c.epsilon, "kind": c.meta.get("kind"), "ok": rep["ok"],
               "residual": rep["residual"], "where": rep["where"], "structural": rep["structural"]}
        if rep["ok"]:
            verified.append(c.epsilon)
        if trees:
            trep = verify_tree_interleaving(TS, TT, c, policy)
            rec["tree_ok"] = trep["ok"]
            if trep["ok"]:
                tree_verified.append(c.epsilon)
            if trep["ok"] != rep["ok"]:
                raise InvariantViolation(
                    f"tree and DGI verdicts disagree at eps={c.epsilon}: {trep} vs {rep}"
                )
        records.append(rec)
    upper = min(verified) if verified else None
    bracket = DistanceBracket(lower, upper, {"candidates": records})
    out = {"dgi": bracket.to_dict()}
    if trees:
        tupper = min(tree_verified) if tree_verified else None
        out["tree"] = {"lower": lower, "upper": tupper}
        if tupper != upper:
            raise InvariantViolation("tree bracket differs from the DGI bracket")
    if upper is not None and lower > upper + policy.check_tol:
        raise InvariantViolation(f"bracket lower {lower} exceeds upper {upper}")
    return out


def shift(P: PersistenceDgi, x: float) -> PersistenceDgi:
    """``(Σ^x P)(a) = P(a + x)``: the grid moves down by ``x``."""
    return PersistenceDgi(
        P.values - float(x), list(P.spaces), list(P.steps),
        embeddings=P.embeddings, ambient_labels=P.ambient_labels,
        source={**P.source, "shift": P.source.get("shift", 0.0) + float(x)},
        check=False,
    )


def stability_harness(base, trials: int = 200, seed: int = 0, eps: float = 1.0, *,
                      p_max: int = 2, levels: int = 4, quantum: float = 0.25,
                      policy: NumericPolicy | None = None, corrupt: bool = False) -> dict:
    """Random ``(f, g)`` pairs on a fixed complex or digraph.

    Each trial checks ``lower <= upper == ||f - g||_inf``, that the canonical
    candidate verifies at both the DGI and tree level, and, with ``corrupt``,
    that a candidate with one scaled map fails both levels.  Per-trial seeds
    are spawned from ``seed`` so trial ``k`` is reproducible on its own.
    """
    from . import generate
    from .filtrations import Digraph, digraph_filtration, sublevel_filtration
    from .interleaving import corrupt_candidate

    policy = policy or get_policy()
    seqs = np.random.SeedSequence(seed).spawn(trials)
    records, violations = [], 0
    for k, ss in enumerate(seqs):
        rng = np.random.default_rng(ss)
        if isinstance(base, Digraph):
            f = generate.random_weights(rng, base, levels)
            g = generate.perturb_weights(rng, f, eps, quantum)
            S = digraph_filtration(base, f, p_max)
            T = digraph_filtration(base, g, p_max)
        else:
            f = generate.random_monotone_values(rng, base, levels)
            g = generate.perturb_values(rng, base, f, eps, quantum)
            S = sublevel_filtration(base, f, p_max)
            T = sublevel_filtration(base, g, p_max)
        sup = sup_distance(S, T)
        rec = {"trial": k, "sup": sup}
        problems = []
        try:
            br = distance_bracket(S, T, policy=policy)
            lower, upper = br["dgi"]["lower"], br["dgi"]["upper"]
            rec.update(lower=lower, upper=upper, tree_upper=br["tree"]["upper"])
            canon = [c for c in br["dgi"]["certificate"]["candidates"] if c["kind"] == "inclusion"]
            rec["canonical_ok"] = bool(canon and canon[-1]["ok"])
            rec["canonical_tree_ok"] = bool(canon and canon[-1].get("tree_ok"))
            if upper is None or abs(upper - sup) > policy.check_tol:
                problems.append("upper != sup")
            if upper is not None and lower > upper + policy.check_tol:
                problems.append("lower > upper")
            if not rec["canonical_ok"] or not rec["canonical_tree_ok"]:
                problems.append("canonical candidate failed")
            if corrupt:
                cand = canonical_candidate(S, T)
                bad = corrupt_candidate(cand, "phi", k)
                d = verify_interleaving(S, T, bad, policy)
                t = verify_tree_interleaving(build_tree(S, policy), build_tree(T, policy), bad, policy)
                rec["corrupt_dgi_fails"] = not d["ok"]
                rec["corrupt_tree_fails"] = not t["ok"]
                if d["ok"] or t["ok"]:
                    problems.append("corrupted candidate passed")
        except InvariantViolation as exc:
            problems.append(f"invariant: {exc}")
        rec["violations"] = problems
        if problems:
            violations += 1
            rec["counterexample"] = {
                "f": {_key(x): v for x, v in f.items()},
                "g": {_key(x): v for x, v in g.items()},
            }
        records.append(rec)
    return {"trials": trials, "seed": seed, "eps": eps, "violations": violations, "records": records}


def _key(x) -> str:
    return ",".join(str(int(v)) for v in x)


__all__ = [
    "Barcode",
    "DistanceBracket",
    "INF",
    "bar_cost",
    "barcode",
    "bottleneck",
    "bottleneck_bruteforce",
    "bottleneck_bruteforce_degree",
    "bottleneck_degree",
    "canonical_candidate",
    "canonical_interleaving",
    "canonical_interleaving_digraph",
    "diag_cost",
    "distance_bracket",
    "rank_function",
    "shift",
    "stability_harness",
    "sup_distance",
]
