"""Interleaving candidates between two persistence DGI objects and their checker.

A candidate at shift ``eps`` is a pair of morphism families
``phi_a : S_a -> T_{a+eps}`` and ``psi_a : T_a -> S_{a+eps}``.  Both families
only change at finitely many parameters, so each is stored on a merged grid:
``phi`` at ``S.values ∪ (T.values - eps)`` and ``psi`` symmetrically.  A family
value at real ``a`` is the stored map at the largest grid point ``<= a``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dgi import DgiMorphism, compose, validate_morphism
from .linalg import NumericPolicy, get_policy, max_abs
from .perslap import PersistenceDgi


def merged_grid(*arrays, tol: float | None = None):
    """Sorted union of parameter arrays, merging points closer than ``tol``."""
    tol = get_policy().grid_tol if tol is None else tol
    pts = np.sort(np.concatenate([np.asarray(a, dtype=np.float64).ravel() for a in arrays]))
    out = []
    for x in pts:
        if not out or x - out[-1] > tol:
            out.append(float(x))
    return np.array(out)


@dataclass
class MorphismFamily:
    """Maps ``X_a -> Y_{a+eps}`` keyed by a sorted parameter grid."""

    grid: np.ndarray
    maps: list

    def index(self, a: float) -> int:
        tol = get_policy().grid_tol
        return int(np.searchsorted(self.grid, a + tol, side="right")) - 1

    def at(self, a: float):
        k = self.index(a)
        return self.maps[k] if k >= 0 else None


@dataclass
class InterleavingCandidate:
    epsilon: float
    phi: MorphismFamily
    psi: MorphismFamily
    meta: dict = field(default_factory=dict)


def family_grids(S: PersistenceDgi, T: PersistenceDgi, eps: float):
    return merged_grid(S.values, T.values - eps), merged_grid(T.values, S.values - eps)


def _src_tgt(X: PersistenceDgi, Y: PersistenceDgi, a: float, eps: float):
    return X.index(a), Y.index(a + eps)


def _map_from(X, Y, a, eps, fam: MorphismFamily):
    """``fam`` at ``a`` with zero-space fallbacks; returns ``(i, k, matrices)``."""
    i, k = _src_tgt(X, Y, a, eps)
    f = fam.at(a)
    Sx, Ty = X.space(i), Y.space(k)
    D = max(Sx.max_degree, Ty.max_degree)
    if f is None:
        if Sx.total_dim:
            raise _Structural(f"no map defined at parameter {a}")
        return i, k, [np.zeros((Ty.dim(p), 0)) for p in range(D + 1)]
    mats = []
    for p in range(D + 1):
        m = f.mat(p)
        if m.shape != (Ty.dim(p), Sx.dim(p)):
            raise _Structural(
                f"map at {a} has shape {m.shape} in degree {p}, expected {(Ty.dim(p), Sx.dim(p))}"
            )
        mats.append(m)
    return i, k, mats


class _Structural(Exception):
    pass


def _step_mats(X: PersistenceDgi, i: int, j: int, D: int):
    f = X.morphism(i, j)
    return [f.mat(p) for p in range(D + 1)]


def _worst(cur, resid, where):
    if resid > cur["residual"]:
        cur["residual"] = resid
        cur["where"] = where


def verify_interleaving(S: PersistenceDgi, T: PersistenceDgi, cand: InterleavingCandidate,
                        policy: NumericPolicy | None = None) -> dict:
    """Check validity, naturality and both triangle identities of ``cand``.

    Never raises on a bad candidate; returns ``{"ok": False, ...}`` with the
    worst residual and its location instead.
    """
    policy = policy or get_policy()
    eps = float(cand.epsilon)
    D = max(S.max_degree, T.max_degree)
    worst = {"residual": 0.0, "where": None}
    report = {"epsilon": eps, "ok": False, "structural": None}
    try:
        for X, Y, fam, name in ((S, T, cand.phi, "phi"), (T, S, cand.psi, "psi")):
            for a, f in zip(fam.grid, fam.maps):
                i, k, _ = _map_from(X, Y, a, eps, fam)
                if f.source is not X.space(i) and f.source.dims != X.space(i).dims:
                    raise _Structural(f"{name} at {a}: wrong source")
                if f.target is not Y.space(k) and f.target.dims != Y.space(k).dims:
                    raise _Structural(f"{name} at {a}: wrong target")
                rep = validate_morphism(f, policy)
                if not rep.ok:
                    res = max(x.get("residual", 1.0) for x in rep.failures)
                    _worst(worst, max(res, 2 * policy.check_tol), f"{name}[{a}] invalid: {rep.failures[0]['kind']}")
            # naturality on consecutive grid points
            g = fam.grid
            for a0, a1 in zip(g[:-1], g[1:]):
                i0, k0, m0 = _map_from(X, Y, a0, eps, fam)
                i1, k1, m1 = _map_from(X, Y, a1, eps, fam)
                if i0 < 0:
                    continue
                left = _step_mats(Y, k0, k1, D)
                right = _step_mats(X, i0, i1, D)
                r = max(max_abs(left[p] @ m0[p] - m1[p] @ right[p]) for p in range(D + 1))
                _worst(worst, r, f"{name} naturality {a0}->{a1}")
        # triangles
        for X, Y, f1, f2, name in ((S, T, cand.phi, cand.psi, "psi.phi"),
                                   (T, S, cand.psi, cand.phi, "phi.psi")):
            pts = merged_grid(X.values, Y.values - eps, X.values - 2 * eps)
            for a in pts:
                i, k, m1 = _map_from(X, Y, a, eps, f1)
                if i < 0:
                    continue
                k2, j, m2 = _map_from(Y, X, a + eps, eps, f2)
                if k2 != k:
                    raise _Structural(f"{name}: grid mismatch at {a}")
                sh = _step_mats(X, i, j, D)
                r = max(max_abs(m2[p] @ m1[p] - sh[p]) for p in range(D + 1))
                _worst(worst, r, f"{name} triangle at {a}")
    except _Structural as exc:
        report["structural"] = str(exc)
        report.update(worst)
        return report
    report.update(worst)
    report["ok"] = bool(policy.close(worst["residual"]))
    return report


def inclusion_family(X: PersistenceDgi, Y: PersistenceDgi, eps: float, grid) -> MorphismFamily:
    """Maps ``X_a -> Y_{a+eps}`` induced by containment inside the shared ambient."""
    from .filtrations import solve_embedding
    from .linalg import ValidationError

    if X.embeddings is None or Y.embeddings is None:
        raise ValidationError("inclusion maps need filtrations with ambient embeddings")
    if X.ambient_labels != Y.ambient_labels:
        raise ValidationError("filtrations live in different ambient spaces")
    maps = []
    for a in grid:
        i, k = X.index(a), Y.index(a + eps)
        Sx = X.space(i)
        if i < 0:
            maps.append(None)
            continue
        if k < 0:
            if Sx.total_dim:
                raise ValidationError(f"S({a}) is nonzero but T({a}+{eps}) is empty")
            maps.append(None)
            continue
        Ty = Y.space(k)
        mats = []
        for p in range(Sx.max_degree + 1):
            try:
                mats.append(solve_embedding(Y.embeddings[k][p], X.embeddings[i][p]))
            except ValidationError as exc:
                raise ValidationError(
                    f"no inclusion at a={a}, eps={eps} in degree {p}: {exc}"
                ) from None
        maps.append(DgiMorphism(Sx, Ty, mats, check=False))
    # parameters below the source grid carry no map
    keep = [(a, m) for a, m in zip(grid, maps) if m is not None]
    return MorphismFamily(np.array([a for a, _ in keep]), [m for _, m in keep])


def inclusion_candidate(S: PersistenceDgi, T: PersistenceDgi, eps: float) -> InterleavingCandidate:
    gphi, gpsi = family_grids(S, T, eps)
    return InterleavingCandidate(
        float(eps), inclusion_family(S, T, eps, gphi), inclusion_family(T, S, eps, gpsi),
        meta={"kind": "inclusion"},
    )


def identity_candidate(S: PersistenceDgi) -> InterleavingCandidate:
    return inclusion_candidate(S, S, 0.0) if S.embeddings is not None else InterleavingCandidate(
        0.0,
        MorphismFamily(S.values.copy(), [S.morphism(i, i) for i in range(len(S))]),
        MorphismFamily(S.values.copy(), [S.morphism(i, i) for i in range(len(S))]),
        meta={"kind": "identity"},
    )


def corrupt_candidate(cand: InterleavingCandidate, which: str = "phi", index: int = 0,
                      scale: float = 2.0) -> InterleavingCandidate:
    """Copy of ``cand`` with one map scaled, breaking isometry and the triangles."""
    fam = getattr(cand, which)
    maps = list(fam.maps)
    k = min(index, len(maps) - 1)
    # prefer a map that is not on zero spaces
    for off in range(len(maps)):
        kk = (k + off) % len(maps)
        if maps[kk].source.total_dim:
            k = kk
            break
    f = maps[k]
    bad = DgiMorphism(f.source, f.target,
                      [scale * f.mat(p) for p in range(f.source.max_degree + 1)], check=False)
    maps[k] = bad
    new = MorphismFamily(fam.grid.copy(), maps)
    kwargs = {"phi": cand.phi, "psi": cand.psi}
    kwargs[which] = new
    return InterleavingCandidate(cand.epsilon, meta={**cand.meta, "corrupted": f"{which}[{k}]"}, **kwargs)


def composite_on_grid(X: PersistenceDgi, Y: PersistenceDgi, cand: InterleavingCandidate,
                      a: float, forward: bool = True):
    """``psi_{a+eps} phi_a`` (or the reverse) as a morphism ``X_a -> X_{a+2eps}``."""
    eps = cand.epsilon
    f1, f2 = (cand.phi, cand.psi) if forward else (cand.psi, cand.phi)
    m1 = f1.at(a)
    m2 = f2.at(a + eps)
    if m1 is None or m2 is None:
        return None
    return compose(m2, m1)


__all__ = [
    "InterleavingCandidate",
    "MorphismFamily",
    "composite_on_grid",
    "corrupt_candidate",
    "family_grids",
    "identity_candidate",
    "inclusion_candidate",
    "inclusion_family",
    "merged_grid",
    "verify_interleaving",
]
