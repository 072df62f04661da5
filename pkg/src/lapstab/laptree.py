"""Persistence Laplacian trees.

The tree rooted at critical value ``a`` collects ``Δ^{a,t}`` for every
critical ``t >= a``.  A step ``f_{a->b}`` moves entry ``(a, t)`` to
``(b, max(b, t))``.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .dgi import compose
from .interleaving import InterleavingCandidate, verify_interleaving
from .linalg import NumericPolicy, get_policy, max_abs
from .perslap import (
    MorphismLaplacian,
    OrderingError,
    PersistenceDgi,
    laplacian_by_index,
    laplacians_equal,
    morphism_laplacian,
)


def matrix_digest(L: MorphismLaplacian, decimals: int = 9) -> str:
    h = hashlib.sha256()
    for p in range(L.max_degree + 1):
        m = np.round(L.matrix(p), decimals) + 0.0
        h.update(str(m.shape).encode())
        h.update(np.ascontiguousarray(m).tobytes())
    return h.hexdigest()[:16]


@dataclass
class TreeNode:
    a: float
    index: int
    dims: tuple
    entries: list                      # [(t, MorphismLaplacian)], t ascending
    duplicates: list = field(default_factory=list)   # groups of t with equal operators


class LaplacianTree:
    """All ``Δ^{a,t}`` for critical ``a <= t`` of a persistence object."""

    def __init__(self, P: PersistenceDgi, policy: NumericPolicy | None = None):
        self.underlying = P
        self.policy = policy or get_policy()
        self.nodes = []
        m = len(P)
        for i in range(m):
            entries = [(P.value(k), laplacian_by_index(P, i, k, self.policy)) for k in range(i, m)]
            groups: list = []
            for t, L in entries:
                for g in groups:
                    if laplacians_equal(g[0][1], L):
                        g.append((t, L))
                        break
                else:
                    groups.append([(t, L)])
            dups = [[t for t, _ in g] for g in groups if len(g) > 1]
            self.nodes.append(TreeNode(P.value(i), i, P.space(i).dims, entries, dups))

    @property
    def critical_values(self):
        return self.underlying.values

    def node(self, a: float) -> TreeNode:
        i = self.underlying.index(a)
        if i < 0:
            raise OrderingError(f"parameter {a} lies below the first critical value")
        return self.nodes[i]

    def entry(self, a: float, t: float) -> MorphismLaplacian:
        i, k = self.underlying.index(a), self.underlying.index(t)
        if k < i:
            raise OrderingError(f"need a <= t, got a={a}, t={t}")
        return self.nodes[i].entries[k - i][1]

    def entry_by_index(self, i: int, k: int) -> MorphismLaplacian:
        return self.nodes[i].entries[k - i][1]

    def counts(self) -> list:
        return [len(n.entries) for n in self.nodes]

    def dump(self, full: bool = False) -> list:
        out = []
        for n in self.nodes:
            ents = []
            for t, L in n.entries:
                e = {"t": t, "digest": matrix_digest(L), "nullity": list(L.nullities(self.policy))}
                if full:
                    e["matrices"] = [L.matrix(p).tolist() for p in range(L.max_degree + 1)]
                ents.append(e)
            out.append({"a": n.a, "dims": list(n.dims), "entries": ents, "duplicates": n.duplicates})
        return out


def build_tree(P: PersistenceDgi, policy: NumericPolicy | None = None) -> LaplacianTree:
    return LaplacianTree(P, policy)


@dataclass
class TreeMorphism:
    a: int
    b: int
    mapping: dict                     # (i, k) -> (j, max(j, k)) on grid indices
    morphism: object
    residual: float


def apply_tree_morphism(T: LaplacianTree, a: float, b: float) -> TreeMorphism:
    """Entry map ``(a, t) -> (b, max(b, t))`` induced by ``f_{a->b}``.

    Each image is checked by recomputing ``Δ`` of ``f_{b->max(b,t)}`` and
    comparing with the stored entry.
    """
    P = T.underlying
    i, j = P.index(a), P.index(b)
    if i > j:
        raise OrderingError(f"need a <= b, got a={a}, b={b}")
    if i < 0:
        raise OrderingError(f"parameter {a} lies below the first critical value")
    m = len(P)
    mapping = {}
    worst = 0.0
    for k in range(i, m):
        tgt = (j, max(j, k))
        mapping[(i, k)] = tgt
        stored = T.entry_by_index(*tgt)
        fresh = morphism_laplacian(P.morphism(*tgt), T.policy)
        worst = max(worst, max(max_abs(stored.matrix(p) - fresh.matrix(p))
                               for p in range(stored.max_degree + 1)))
    return TreeMorphism(i, j, mapping, P.morphism(i, j), worst)


def compose_tree_morphisms(g: TreeMorphism, f: TreeMorphism) -> dict:
    """Entry map of ``g ∘ f`` (apply ``f`` first)."""
    if f.b != g.a:
        raise OrderingError("tree morphisms are not composable")
    return {src: g.mapping[mid] for src, mid in f.mapping.items()}


def _lift_residuals(X: PersistenceDgi, TX: LaplacianTree, Y: PersistenceDgi,
                    cand: InterleavingCandidate, forward: bool, policy) -> dict:
    """Push every entry ``(a, t)`` of ``TX`` through the composite candidate map.

    For ``c = psi_{a+eps} phi_a : X_a -> X_b`` with ``b = a + 2 eps`` the entry
    must land on ``(b, m)``, ``m = max(b, t)``: the square
    ``f_{b->m} c = f_{t->m} f_{a->t}`` must commute and the recomputed
    ``Δ^{b,m}`` must equal the stored tree entry.
    """
    eps = cand.epsilon
    f1, f2 = (cand.phi, cand.psi) if forward else (cand.psi, cand.phi)
    worst = {"residual": 0.0, "where": None, "checked": 0}
    fresh: dict = {}
    n = len(X)
    for i in range(n):
        a = X.value(i)
        m1, m2 = f1.at(a), f2.at(a + eps)
        if m1 is None or m2 is None:
            if X.space(i).total_dim:
                worst["residual"] = float("inf")
                worst["where"] = f"no composite at a={a}"
            continue
        c = compose(m2, m1)
        jb = X.index(a + 2 * eps)
        if c.target.dims != X.space(jb).dims:
            worst["residual"] = float("inf")
            worst["where"] = f"composite at a={a} lands in the wrong space"
            continue
        D = max(c.source.max_degree, c.target.max_degree)
        for k in range(i, n):
            mm = max(jb, k)
            lhs = X.morphism(jb, mm)
            rhs = compose(X.morphism(k, mm), X.morphism(i, k))
            r = max(max_abs(lhs.mat(p) @ c.mat(p) - rhs.mat(p)) for p in range(D + 1))
            if (jb, mm) not in fresh:
                L = morphism_laplacian(lhs, policy)
                stored = TX.entry_by_index(jb, mm)
                fresh[(jb, mm)] = max(max_abs(L.matrix(p) - stored.matrix(p))
                                      for p in range(L.max_degree + 1))
            r = max(r, fresh[(jb, mm)])
            worst["checked"] += 1
            if r > worst["residual"]:
                worst["residual"] = float(r)
                worst["where"] = f"entry ({a}, {X.value(k)}) -> ({X.value(jb)}, {X.value(mm)})"
    return worst


def verify_tree_interleaving(TS: LaplacianTree, TT: LaplacianTree, cand: InterleavingCandidate,
                             policy: NumericPolicy | None = None) -> dict:
    """DGI-level identities plus the lifted entry statement on both trees."""
    policy = policy or get_policy()
    S, T = TS.underlying, TT.underlying
    dgi = verify_interleaving(S, T, cand, policy)
    report = {"epsilon": cand.epsilon, "dgi": dgi, "ok": False}
    if dgi["structural"]:
        report["lift"] = None
        return report
    ls = _lift_residuals(S, TS, T, cand, True, policy)
    lt = _lift_residuals(T, TT, S, cand, False, policy)
    report["lift"] = {"S": ls, "T": lt}
    lift_ok = policy.close(ls["residual"]) and policy.close(lt["residual"])
    report["lift_ok"] = bool(lift_ok)
    report["ok"] = bool(lift_ok and dgi["ok"])
    return report


__all__ = [
    "LaplacianTree",
    "TreeMorphism",
    "TreeNode",
    "apply_tree_morphism",
    "build_tree",
    "compose_tree_morphisms",
    "matrix_digest",
    "verify_tree_interleaving",
]
