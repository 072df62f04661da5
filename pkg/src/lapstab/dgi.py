"""Differential graded inner product spaces and isometric chain maps."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DimensionError,
    InnerSpace,
    LinearMap,
    NumericPolicy,
    ValidationError,
    adjoint,
    get_policy,
    max_abs,
    orth_complement,
    rank,
    span,
    containment_residual,
)

_ZERO = InnerSpace.standard(0)


@dataclass
class ValidationReport:
    ok: bool
    failures: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "failures": self.failures, "residuals": self.residuals}


class DgiSpace:
    """A chain complex of inner product spaces in degrees ``0..max_degree``.

    ``d(p)`` maps degree ``p`` to degree ``p - 1``.  Degrees outside the
    stored range are zero spaces.
    """

    def __init__(self, spaces, differentials, labels=None, *, check: bool = True):
        spaces = [s if isinstance(s, InnerSpace) else InnerSpace(s) for s in spaces]
        if not spaces:
            spaces = [_ZERO]
        self.spaces = tuple(spaces)
        D = len(spaces) - 1
        differentials = list(differentials)
        if len(differentials) != D:
            raise DimensionError(f"expected {D} differentials, got {len(differentials)}")
        ds = [np.zeros((0, spaces[0].dim))]
        for p, m in enumerate(differentials, start=1):
            m = np.asarray(m, dtype=np.float64).reshape(spaces[p - 1].dim, spaces[p].dim)
            ds.append(m)
        self._d = tuple(ds)
        if labels is not None:
            labels = tuple(tuple(str(x) for x in lab) for lab in labels)
            if len(labels) != D + 1 or any(len(l) != s.dim for l, s in zip(labels, spaces)):
                raise DimensionError("labels must give one name per basis vector per degree")
        self.labels = labels
        if check:
            report = validate_space(self)
            if not report.ok:
                raise ValidationError("invalid DGI space", report)

    @classmethod
    def from_matrices(cls, grams, differentials, labels=None, *, check: bool = True):
        return cls([InnerSpace(g) for g in grams], differentials, labels, check=check)

    @classmethod
    def standard(cls, dims, differentials, labels=None, *, check: bool = True):
        return cls([InnerSpace.standard(n) for n in dims], differentials, labels, check=check)

    @classmethod
    def zero(cls) -> "DgiSpace":
        return cls([_ZERO], [], check=False)

    @property
    def max_degree(self) -> int:
        return len(self.spaces) - 1

    @property
    def dims(self) -> tuple:
        return tuple(s.dim for s in self.spaces)

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def space(self, p: int) -> InnerSpace:
        if 0 <= p <= self.max_degree:
            return self.spaces[p]
        return _ZERO

    def dim(self, p: int) -> int:
        return self.space(p).dim

    def dmat(self, p: int):
        if 0 <= p <= self.max_degree:
            return self._d[p]
        return np.zeros((self.dim(p - 1), self.dim(p)))

    def d(self, p: int) -> LinearMap:
        return LinearMap(self.space(p), self.space(p - 1), self.dmat(p))

    def dstar(self, p: int) -> LinearMap:
        """Adjoint of ``d(p)``, from degree ``p - 1`` to ``p``."""
        return adjoint(self.d(p))

    def label(self, p: int):
        if self.labels is None or not 0 <= p <= self.max_degree:
            return tuple(f"v{i}" for i in range(self.dim(p)))
        return self.labels[p]

    def __repr__(self):
        return f"DgiSpace(dims={self.dims})"


def validate_space(S: DgiSpace, policy: NumericPolicy | None = None) -> ValidationReport:
    """Check d∘d = 0 and Gram positivity in every degree."""
    policy = policy or get_policy()
    failures, residuals = [], {}
    for p, sp in enumerate(S.spaces):
        g = sp.gram
        if sp.dim:
            ev = np.linalg.eigvalsh(0.5 * (g + g.T))
            cond = float(ev[-1] / ev[0]) if ev[0] > 0 else float("inf")
            residuals[f"gram_cond_{p}"] = cond
            sym = max_abs(g - g.T)
            if sym > policy.check_tol * (1 + max_abs(g)) or ev[0] <= policy.abs_tol:
                failures.append({"kind": "gram", "degree": p, "min_eig": float(ev[0]), "asym": sym})
    for p in range(1, S.max_degree):
        a, b = S.dmat(p), S.dmat(p + 1)
        r = max_abs(a @ b)
        residuals[f"dd_{p}"] = r
        if not policy.close(r, max_abs(a) * max_abs(b)):
            failures.append({"kind": "d_squared", "degree": p + 1, "residual": r})
    return ValidationReport(not failures, failures, residuals)


class DgiMorphism:
    """Per-degree matrices of an isometric chain map ``source -> target``."""

    def __init__(self, source: DgiSpace, target: DgiSpace, maps, *, check: bool = True):
        self.source = source
        self.target = target
        maps = list(maps)
        if len(maps) != source.max_degree + 1:
            raise DimensionError(
                f"expected {source.max_degree + 1} degree maps, got {len(maps)}"
            )
        mats = []
        for p, m in enumerate(maps):
            m = np.asarray(m, dtype=np.float64).reshape(target.dim(p), source.dim(p))
            mats.append(m)
        self._maps = tuple(mats)
        if check:
            report = validate_morphism(self)
            if not report.ok:
                raise ValidationError("not an isometric chain map", report)

    @property
    def max_degree(self) -> int:
        return max(self.source.max_degree, self.target.max_degree)

    def mat(self, p: int):
        if 0 <= p <= self.source.max_degree:
            return self._maps[p]
        return np.zeros((self.target.dim(p), self.source.dim(p)))

    def map(self, p: int) -> LinearMap:
        return LinearMap(self.source.space(p), self.target.space(p), self.mat(p))

    def adjoint(self, p: int) -> LinearMap:
        return adjoint(self.map(p))

    def __matmul__(self, other: "DgiMorphism") -> "DgiMorphism":
        return compose(self, other)

    def __repr__(self):
        return f"DgiMorphism({self.source.dims} -> {self.target.dims})"


def validate_morphism(f: DgiMorphism, policy: NumericPolicy | None = None) -> ValidationReport:
    """Chain-map and isometry residuals; injectivity is confirmed by rank."""
    policy = policy or get_policy()
    S, T = f.source, f.target
    failures, residuals = [], {}
    top = S.max_degree
    for p in range(0, top + 1):
        m = f.mat(p)
        gs, gt = S.space(p).gram, T.space(p).gram
        iso = max_abs(m.T @ gt @ m - gs)
        residuals[f"isometry_{p}"] = iso
        if not policy.close(iso, max_abs(gs)):
            failures.append({"kind": "isometry", "degree": p, "residual": iso})
        elif rank(f.map(p), policy) != S.dim(p):
            failures.append({"kind": "injective", "degree": p})
        if p >= 1:
            lhs = T.dmat(p) @ m
            rhs = f.mat(p - 1) @ S.dmat(p)
            ch = max_abs(lhs - rhs)
            residuals[f"chain_{p}"] = ch
            if not policy.close(ch, max(max_abs(lhs), max_abs(rhs))):
                failures.append({"kind": "chain", "degree": p, "residual": ch})
    return ValidationReport(not failures, failures, residuals)


def identity_morphism(S: DgiSpace) -> DgiMorphism:
    return DgiMorphism(S, S, [np.eye(n) for n in S.dims], check=False)


def compose(g: DgiMorphism, f: DgiMorphism, *, check: bool = False) -> DgiMorphism:
    """``g ∘ f``.  Composites of valid morphisms are valid, so no recheck by default."""
    if f.target is not g.source and f.target.dims != g.source.dims:
        raise DimensionError("morphisms are not composable")
    return DgiMorphism(f.source, g.target,
                       [g.mat(p) @ f.mat(p) for p in range(f.source.max_degree + 1)],
                       check=check)


def direct_sum(V: DgiSpace, W: DgiSpace):
    """``V ⊕ W`` with block Grams and differentials, plus both injections."""
    D = max(V.max_degree, W.max_degree)
    grams, ds, labels = [], [], []
    for p in range(D + 1):
        grams.append(_bd(V.space(p).gram, W.space(p).gram))
        labels.append(tuple(f"1:{x}" for x in V.label(p)) + tuple(f"2:{x}" for x in W.label(p)))
    for p in range(1, D + 1):
        ds.append(_bd(V.dmat(p), W.dmat(p)))
    S = DgiSpace.from_matrices(grams, ds, labels, check=False)
    j1 = DgiMorphism(V, S, [np.vstack([np.eye(V.dim(p)), np.zeros((W.dim(p), V.dim(p)))])
                            for p in range(V.max_degree + 1)], check=False)
    j2 = DgiMorphism(W, S, [np.vstack([np.zeros((V.dim(p), W.dim(p))), np.eye(W.dim(p))])
                            for p in range(W.max_degree + 1)], check=False)
    return S, j1, j2


def _bd(a, b):
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]))
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0]:, a.shape[1]:] = b
    return out


@dataclass
class Pushout:
    space: DgiSpace
    g1: DgiMorphism
    g2: DgiMorphism
    residuals: dict


def pushout(f1: DgiMorphism, f2: DgiMorphism, policy: NumericPolicy | None = None) -> Pushout:
    """Pushout of two isometric chain maps out of a common source ``V``.

    The quotient ``(W1 ⊕ W2) / {f1 x - f2 x}`` is realised as
    ``W1 ⊕ C`` where ``C = f2(V)^⊥`` inside ``W2``, with the orthogonal
    sum inner product.  Then ``g1`` is the first injection and
    ``g2(w) = (f1 f2* w, P_C w)``; both legs are isometric chain maps and
    ``g1 f1 = g2 f2``.
    """
    policy = policy or get_policy()
    V, W1, W2 = f1.source, f1.target, f2.target
    if f2.source is not V and f2.source.dims != V.dims:
        raise DimensionError("pushout needs a common source")
    for f in (f1, f2):
        rep = validate_morphism(f, policy)
        if not rep.ok:
            raise ValidationError("pushout input is not a valid morphism", rep)
    D = max(W1.max_degree, W2.max_degree)
    comp, f2adj = [], []
    for p in range(D + 2):
        im = span(W2.space(p), f2.mat(p), policy)
        comp.append(orth_complement(im, policy).basis)
        f2adj.append(adjoint(f2.map(p)).matrix)
    grams, labels, g2m, res = [], [], [], {}
    for p in range(D + 1):
        k = comp[p].shape[1]
        grams.append(_bd(W1.space(p).gram, np.eye(k)))
        labels.append(tuple(W1.label(p)) + tuple(f"c{i}" for i in range(k)))
        gw2 = W2.space(p).gram
        g2m.append(np.vstack([f1.mat(p) @ f2adj[p], comp[p].T @ gw2]))
    ds = []
    for p in range(1, D + 1):
        B, Bl = comp[p], comp[p - 1]
        d2 = W2.dmat(p)
        top = np.hstack([W1.dmat(p), f1.mat(p - 1) @ f2adj[p - 1] @ d2 @ B])
        bot = np.hstack([np.zeros((Bl.shape[1], W1.dim(p))), Bl.T @ W2.space(p - 1).gram @ d2 @ B])
        ds.append(np.vstack([top, bot]))
    W = DgiSpace.from_matrices(grams, ds, labels, check=True)
    g1 = DgiMorphism(W1, W, [np.vstack([np.eye(W1.dim(p)), np.zeros((comp[p].shape[1], W1.dim(p)))])
                             for p in range(W1.max_degree + 1)], check=True)
    g2 = DgiMorphism(W2, W, g2m[: W2.max_degree + 1], check=True)
    sq = max((max_abs(g1.mat(p) @ f1.mat(p) - g2.mat(p) @ f2.mat(p))
              for p in range(V.max_degree + 1)), default=0.0)
    res["commutes"] = sq
    if not policy.close(sq):
        raise ValidationError("pushout square does not commute", res)
    # the relation subspace {(f1 x, -f2 x)} is a subcomplex of W1 ⊕ W2
    Sum, _, _ = direct_sum(W1, W2)
    worst = 0.0
    for p in range(1, V.max_degree + 1):
        rel_p = span(Sum.space(p), np.vstack([f1.mat(p), -f2.mat(p)]), policy)
        rel_q = span(Sum.space(p - 1), np.vstack([f1.mat(p - 1), -f2.mat(p - 1)]), policy)
        img = span(Sum.space(p - 1), Sum.dmat(p) @ rel_p.basis, policy)
        worst = max(worst, containment_residual(img, rel_q))
    res["relation_closed"] = worst
    if not policy.close(worst):
        raise ValidationError("relation subspace is not d-closed", res)
    return Pushout(W, g1, g2, res)


def morphisms_equal(f: DgiMorphism, g: DgiMorphism, policy: NumericPolicy | None = None) -> bool:
    policy = policy or get_policy()
    top = max(f.source.max_degree, g.source.max_degree)
    for p in range(top + 1):
        a, b = f.mat(p), g.mat(p)
        if a.shape != b.shape or not policy.close(max_abs(a - b), max(max_abs(a), max_abs(b))):
            return False
    return True


def isomorphic_dims(S: DgiSpace, T: DgiSpace) -> bool:
    D = max(S.max_degree, T.max_degree)
    return all(S.dim(p) == T.dim(p) for p in range(D + 1))


__all__ = [
    "DgiSpace",
    "DgiMorphism",
    "Pushout",
    "ValidationReport",
    "compose",
    "direct_sum",
    "identity_morphism",
    "isomorphic_dims",
    "morphisms_equal",
    "pushout",
    "validate_morphism",
    "validate_space",
]
