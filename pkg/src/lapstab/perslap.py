"""Persistent Laplacians over a finite filtration grid.

A :class:`PersistenceDgi` is a step functor ``(R, <=) -> DGI``: DGI spaces
``S_1 -> S_2 -> ... -> S_m`` at critical values ``t_1 < ... < t_m``.  A query
at real ``a`` resolves to the largest ``t_i <= a``; below ``t_1`` the space
is zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .dgi import DgiMorphism, DgiSpace, compose, identity_morphism, validate_morphism
from .hodge import hodge_decompose
from .linalg import (
    ContractError,
    DimensionError,
    InvariantViolation,
    LinearMap,
    NumericPolicy,
    Subspace,
    ValidationError,
    adjoint,
    canonical_basis,
    eigenvalues_sym,
    full_subspace,
    get_policy,
    image,
    kernel,
    max_abs,
    orth_complement,
    span,
    subspace_sum,
)

_ZERO_SPACE = DgiSpace.zero()


class OrderingError(ContractError):
    """Raised when a persistence query has ``a > b``."""


class PersistenceDgi:
    """DGI spaces on a strictly increasing grid with connecting steps.

    ``embeddings`` optionally give, per grid index and degree, the matrix of
    ``S_i`` inside a fixed ambient coordinate system (``ambient_labels``).
    Filtration frontends fill these so inclusion maps between two
    filtrations of the same object can be rebuilt.
    """

    def __init__(self, values, spaces, steps, *, embeddings=None, ambient_labels=None,
                 source=None, check: bool = True):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 1 or len(values) != len(spaces):
            raise DimensionError("need one space per critical value")
        if len(values) and not np.all(np.diff(values) > 0):
            raise ValidationError("critical values must be strictly increasing")
        if len(steps) != max(len(spaces) - 1, 0):
            raise DimensionError("need one step per consecutive pair of critical values")
        for i, st in enumerate(steps):
            if st.source is not spaces[i] or st.target is not spaces[i + 1]:
                raise DimensionError(f"step {i} does not connect spaces {i} and {i + 1}")
            if check:
                rep = validate_morphism(st)
                if not rep.ok:
                    raise ValidationError(f"step {i} is not an isometric chain map", rep)
        self.values = values
        self.spaces = tuple(spaces)
        self.steps = tuple(steps)
        self.embeddings = embeddings
        self.ambient_labels = ambient_labels
        self.source = source or {}
        self._morph_cache: dict = {}
        self._lap_cache: dict = {}
        self._hodge_cache: dict = {}

    def __len__(self):
        return len(self.values)

    @property
    def max_degree(self) -> int:
        return max((s.max_degree for s in self.spaces), default=0)

    def index(self, a: float, policy: NumericPolicy | None = None) -> int:
        """Grid index of the largest critical value ``<= a``; -1 below the grid."""
        policy = policy or get_policy()
        return int(np.searchsorted(self.values, a + policy.grid_tol, side="right")) - 1

    def space(self, i: int) -> DgiSpace:
        return self.spaces[i] if i >= 0 else _ZERO_SPACE

    def space_at(self, a: float) -> DgiSpace:
        return self.space(self.index(a))

    def value(self, i: int) -> float:
        return float(self.values[i]) if i >= 0 else float("-inf")

    def morphism(self, i: int, j: int) -> DgiMorphism:
        """Composite step ``f_{t_i -> t_j}`` for grid indices ``i <= j``."""
        if i > j:
            raise OrderingError(f"need i <= j, got {i} > {j}")
        key = (i, j)
        if key not in self._morph_cache:
            if i < 0:
                tgt = self.space(j)
                f = DgiMorphism(_ZERO_SPACE, tgt, [np.zeros((tgt.dim(0), 0))], check=False)
            elif i == j:
                f = identity_morphism(self.spaces[i])
            else:
                f = compose(self.steps[j - 1], self.morphism(i, j - 1))
            self._morph_cache[key] = f
        return self._morph_cache[key]

    def morphism_at(self, a: float, b: float) -> DgiMorphism:
        if a > b:
            raise OrderingError(f"need a <= b, got a={a}, b={b}")
        return self.morphism(self.index(a), self.index(b))

    def hodge(self, i: int):
        if i not in self._hodge_cache:
            self._hodge_cache[i] = hodge_decompose(self.space(i))
        return self._hodge_cache[i]

    def __repr__(self):
        return f"PersistenceDgi(values={self.values.tolist()})"


def theta(f: DgiMorphism, policy: NumericPolicy | None = None):
    """Per target degree, ``Θ_p = {x ∈ W_p : d x ∈ f(V_{p-1})}``."""
    policy = policy or get_policy()
    W = f.target
    out = []
    for p in range(W.max_degree + 1):
        if p == 0:
            out.append(full_subspace(W.space(0)))
            continue
        img = span(W.space(p - 1), f.mat(p - 1), policy)
        off = np.eye(W.dim(p - 1)) - img.projector_matrix()
        out.append(kernel(LinearMap(W.space(p), W.space(p - 1), off @ W.dmat(p)), policy))
    return out


@dataclass
class MorphismLaplacian:
    """``Δ_f = f* d P_Θ d* f + d* d`` per source degree."""

    source: DgiSpace
    up: list
    down: list
    provenance: dict = field(default_factory=dict)

    @property
    def max_degree(self) -> int:
        return len(self.up) - 1

    def matrix(self, p: int):
        return self.up[p] + self.down[p]

    def operator(self, p: int) -> LinearMap:
        sp = self.source.space(p)
        return LinearMap(sp, sp, self.matrix(p))

    def block_matrix(self):
        return sla.block_diag(*[self.matrix(p) for p in range(self.max_degree + 1)])

    def spectrum(self, p: int, policy: NumericPolicy | None = None):
        return eigenvalues_sym(self.operator(p), policy)

    def nullity(self, p: int, policy: NumericPolicy | None = None) -> int:
        return kernel(self.operator(p), policy).dim

    def nullities(self, policy: NumericPolicy | None = None) -> tuple:
        return tuple(self.nullity(p, policy) for p in range(self.max_degree + 1))


def morphism_laplacian(f: DgiMorphism, policy: NumericPolicy | None = None,
                       th=None) -> MorphismLaplacian:
    policy = policy or get_policy()
    V, W = f.source, f.target
    th = th if th is not None else theta(f, policy)
    up, down = [], []
    for p in range(V.max_degree + 1):
        dV = V.d(p)
        down.append(adjoint(dV).matrix @ dV.matrix)
        if p + 1 <= W.max_degree:
            dW = W.d(p + 1)
            P = th[p + 1].projector_matrix()
            fs = adjoint(f.map(p)).matrix
            core = dW.matrix @ P @ adjoint(dW).matrix
            up.append(fs @ core @ f.mat(p))
        else:
            up.append(np.zeros((V.dim(p), V.dim(p))))
    return MorphismLaplacian(V, up, down)


def hodge_laplacian(S: DgiSpace, policy: NumericPolicy | None = None) -> MorphismLaplacian:
    """Ordinary ``dd* + d*d`` as a :class:`MorphismLaplacian` of the identity."""
    L = morphism_laplacian(identity_morphism(S), policy)
    L.provenance = {"kind": "hodge"}
    return L


def _pair(P: PersistenceDgi, a: float, b: float):
    if a > b:
        raise OrderingError(f"need a <= b, got a={a}, b={b}")
    return P.index(a), P.index(b)


def laplacian_by_index(P: PersistenceDgi, i: int, j: int,
                       policy: NumericPolicy | None = None) -> MorphismLaplacian:
    key = (i, j)
    if key not in P._lap_cache:
        L = morphism_laplacian(P.morphism(i, j), policy)
        L.provenance = {"a": P.value(i), "b": P.value(j), "i": i, "j": j}
        P._lap_cache[key] = L
    return P._lap_cache[key]


def persistent_laplacian(P: PersistenceDgi, a: float, b: float,
                         policy: NumericPolicy | None = None) -> MorphismLaplacian:
    i, j = _pair(P, a, b)
    return laplacian_by_index(P, i, j, policy)


def harmonic_image_by_index(P: PersistenceDgi, i: int, j: int, policy=None):
    """``H^{a,b} = h f_{a->b} h(S_a)`` as subspaces of ``S_b``, per degree."""
    policy = policy or get_policy()
    f = P.morphism(i, j)
    hv, hw = P.hodge(i), P.hodge(j)
    out = []
    for p in range(f.target.max_degree + 1):
        Sb = f.target.space(p)
        if p > f.source.max_degree:
            out.append(Subspace(Sb, np.zeros((Sb.dim, 0))))
            continue
        BW = hw[p].harmonic.basis
        vecs = BW @ (BW.T @ Sb.gram @ f.mat(p) @ hv[p].harmonic.basis)
        out.append(canonical_basis(span(Sb, vecs, policy)))
    return out


def persistent_harmonic(P: PersistenceDgi, a: float, b: float, policy=None):
    i, j = _pair(P, a, b)
    return harmonic_image_by_index(P, i, j, policy)


def _oracle_rank(M, policy) -> int:
    M = np.asarray(M, dtype=np.float64)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.count_nonzero(s > policy.rel_tol * s[0] + policy.abs_tol))


def betti_oracle_by_index(P: PersistenceDgi, i: int, j: int, p: int, policy=None) -> int:
    """``dim Z_p(a) - dim(f Z_p(a) ∩ B_p(b))`` from plain coordinate ranks.

    Ranks and intersections do not depend on the inner product, so this
    uses only raw coordinate matrices and never touches a Laplacian.
    """
    policy = policy or get_policy()
    if i < 0:
        return 0
    Sa, Sb = P.space(i), P.space(j)
    if p > Sa.max_degree:
        return 0
    f = P.morphism(i, j).mat(p)
    dp = Sa.dmat(p)
    if dp.shape[0] == 0:
        Z = np.eye(Sa.dim(p))
    else:
        Z = sla.null_space(dp, rcond=policy.rel_tol)
    Bd = Sb.dmat(p + 1)
    fz = f @ Z
    # dim Z - (rank fZ + rank B - rank [fZ | B]) with rank fZ = dim Z
    return _oracle_rank(np.hstack([fz, Bd]), policy) - _oracle_rank(Bd, policy)


def persistent_betti_oracle(P: PersistenceDgi, a: float, b: float, p: int, policy=None) -> int:
    i, j = _pair(P, a, b)
    return betti_oracle_by_index(P, i, j, p, policy)


def spectrum(P: PersistenceDgi, a: float, b: float, p: int, policy=None):
    return persistent_laplacian(P, a, b, policy).spectrum(p, policy)


def split_residuals(f: DgiMorphism, policy: NumericPolicy | None = None):
    """Per degree ``p``, ``dim(d f(V_p) ∩ d(f(V_p)^⊥))``."""
    policy = policy or get_policy()
    W = f.target
    out = []
    for p in range(1, f.source.max_degree + 1):
        img = span(W.space(p), f.mat(p), policy)
        comp = orth_complement(img, policy)
        A = span(W.space(p - 1), W.dmat(p) @ f.mat(p), policy)
        B = span(W.space(p - 1), W.dmat(p) @ comp.basis, policy)
        out.append(A.dim + B.dim - subspace_sum(A, B, policy).dim)
    return out


def is_split(f: DgiMorphism, policy: NumericPolicy | None = None) -> bool:
    return not any(split_residuals(f, policy))


def laplacians_equal(L1: MorphismLaplacian, L2: MorphismLaplacian) -> bool:
    """Entrywise equality with tolerance ``1e-9 (1 + max|entry|)``."""
    if L1.max_degree != L2.max_degree:
        return False
    tol = get_policy().check_tol
    for p in range(L1.max_degree + 1):
        a, b = L1.matrix(p), L2.matrix(p)
        if a.shape != b.shape:
            return False
        scale = max(max_abs(a), max_abs(b))
        if max_abs(a - b) > tol * (1.0 + scale):
            return False
    return True


def _harmonic_rank(P, j_from, k_to, spaces_b, policy):
    """Rank of ``h_c f_{b->c}`` restricted to each subspace in ``spaces_b``."""
    f = P.morphism(j_from, k_to)
    hc = P.hodge(k_to)
    out = []
    for p, sub in enumerate(spaces_b):
        if p > f.source.max_degree or p > f.target.max_degree:
            out.append(0)
            continue
        BW = hc[p].harmonic.basis
        m = BW.T @ f.target.space(p).gram @ f.mat(p) @ sub.basis
        out.append(_oracle_rank(m, policy))
    return out


def check_equivalences(P: PersistenceDgi, b: float, c: float,
                       policy: NumericPolicy | None = None) -> dict:
    """Evaluate the six equivalent conditions for ``b <= c`` independently.

    Raises :class:`InvariantViolation` if the verdicts disagree, or if the
    Laplacian-invariance verdict differs from "Betti unchanged and split".
    """
    policy = policy or get_policy()
    jb, jc = _pair(P, b, c)
    if jb < 0:
        raise ContractError("b lies below the first critical value")
    D = P.max_degree
    f = P.morphism(jb, jc)
    split = is_split(f, policy)
    crit = list(range(0, jb + 1))
    v = {}
    v["i"] = all(laplacians_equal(laplacian_by_index(P, a, jb, policy),
                                  laplacian_by_index(P, a, jc, policy)) for a in crit)
    v["ii"] = laplacians_equal(laplacian_by_index(P, jb, jb, policy),
                               laplacian_by_index(P, jb, jc, policy))
    hb = [h.harmonic for h in P.hodge(jb).degrees]
    r_iii = _harmonic_rank(P, jb, jc, hb, policy)
    v["iii"] = split and all(r == h.dim for r, h in zip(r_iii, hb))
    ok_iv = True
    for a in crit:
        hab = harmonic_image_by_index(P, a, jb, policy)
        hac = harmonic_image_by_index(P, a, jc, policy)
        r = _harmonic_rank(P, jb, jc, hab, policy)
        for p in range(len(hab)):
            dac = hac[p].dim if p < len(hac) else 0
            if not (r[p] == hab[p].dim == dac):
                ok_iv = False
    v["iv"] = split and ok_iv
    betti = {(x, y, p): betti_oracle_by_index(P, x, y, p, policy)
             for x in crit for y in (jb, jc) for p in range(D + 1)}
    v["v"] = split and all(betti[(jb, jc, p)] == betti[(jb, jb, p)] for p in range(D + 1))
    v["vi"] = split and all(betti[(a, jc, p)] == betti[(a, jb, p)]
                            for a in crit for p in range(D + 1))
    cor = all(betti[(jb, jc, p)] == betti[(jb, jb, p)] for p in range(D + 1)) and split
    report = {
        "b": P.value(jb),
        "c": P.value(jc),
        "split": split,
        "verdicts": v,
        "unanimous": len(set(v.values())) == 1,
        "consistency": {"betti_unchanged_and_split": cor, "agrees": cor == v["ii"]},
    }
    if not report["unanimous"] or not report["consistency"]["agrees"]:
        raise InvariantViolation(f"equivalence verdicts disagree: {report}")
    return report


def persistent_hodge_parts(P: PersistenceDgi, i: int, j: int, policy=None):
    """``S_a = ker Δ^{a,b} ⊕ Im(up part) ⊕ Im(d*d)`` per degree, as subspaces."""
    policy = policy or get_policy()
    L = laplacian_by_index(P, i, j, policy)
    S = P.space(i)
    out = []
    for p in range(S.max_degree + 1):
        sp = S.space(p)
        out.append((
            kernel(L.operator(p), policy),
            image(LinearMap(sp, sp, L.up[p]), policy),
            image(LinearMap(sp, sp, L.down[p]), policy),
        ))
    return out


__all__ = [
    "MorphismLaplacian",
    "OrderingError",
    "PersistenceDgi",
    "betti_oracle_by_index",
    "check_equivalences",
    "harmonic_image_by_index",
    "hodge_laplacian",
    "is_split",
    "laplacian_by_index",
    "laplacians_equal",
    "morphism_laplacian",
    "persistent_betti_oracle",
    "persistent_harmonic",
    "persistent_hodge_parts",
    "persistent_laplacian",
    "spectrum",
    "split_residuals",
    "theta",
]
