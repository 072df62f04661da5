"""Hodge decomposition, homotopy retract and the harmonic functor."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dgi import DgiMorphism, DgiSpace
from .linalg import (
    ContractError,
    InnerSpace,
    LinearMap,
    NumericPolicy,
    Subspace,
    adjoint,
    canonical_basis,
    get_policy,
    image,
    kernel,
    max_abs,
    orth_complement,
    pseudoinverse_weighted,
    rank,
    subspace_sum,
)


def algebraic_decompose(phi: LinearMap, psi: LinearMap, policy: NumericPolicy | None = None):
    """Split ``V`` for ``V' --phi--> V --psi--> V''`` with ``psi phi = 0``.

    Returns ``(Im phi phi*, Im psi* psi, H)`` where ``H = ker psi ∩ ker phi*``.
    """
    policy = policy or get_policy()
    if phi.codomain.dim != psi.domain.dim:
        raise ContractError("phi and psi are not composable")
    comp = psi.matrix @ phi.matrix
    if comp.size and not policy.close(max_abs(comp), max_abs(psi.matrix) * max_abs(phi.matrix)):
        raise ContractError("psi ∘ phi is not zero")
    phis, psis = adjoint(phi), adjoint(psi)
    up = phi @ phis
    down = psis @ psi
    lap = LinearMap(phi.codomain, phi.codomain, up.matrix + down.matrix)
    return (
        canonical_basis(image(up, policy)),
        canonical_basis(image(down, policy)),
        canonical_basis(kernel(lap, policy)),
    )


@dataclass
class DegreeHodge:
    degree: int
    im_d: Subspace
    im_dstar: Subspace
    harmonic: Subspace
    projector_h: LinearMap
    retract_K: LinearMap
    retract_p: LinearMap
    retract_i: LinearMap

    @property
    def betti(self) -> int:
        return self.harmonic.dim


@dataclass
class HodgeDecomposition:
    space: DgiSpace
    degrees: list

    def __getitem__(self, p: int) -> DegreeHodge:
        return self.degrees[p]

    @property
    def betti(self) -> tuple:
        return tuple(dh.betti for dh in self.degrees)


def _retract_K(S: DgiSpace, policy):
    # K_p : S_p -> S_{p+1}
    return [pseudoinverse_weighted(S.d(p + 1), policy) for p in range(S.max_degree + 1)]


def hodge_decompose(S: DgiSpace, policy: NumericPolicy | None = None) -> HodgeDecomposition:
    policy = policy or get_policy()
    K = _retract_K(S, policy)
    out = []
    for p in range(S.max_degree + 1):
        sp = S.space(p)
        im_d = canonical_basis(image(S.d(p + 1), policy))
        im_ds = canonical_basis(image(S.dstar(p), policy))
        H = canonical_basis(orth_complement(subspace_sum(im_d, im_ds, policy), policy))
        h = np.eye(sp.dim) - S.dmat(p + 1) @ K[p].matrix
        if p >= 1:
            h -= K[p - 1].matrix @ S.dmat(p)
        hsp = InnerSpace.standard(H.dim)
        pmat = H.basis.T @ sp.gram
        out.append(DegreeHodge(
            degree=p,
            im_d=im_d,
            im_dstar=im_ds,
            harmonic=H,
            projector_h=LinearMap(sp, sp, h),
            retract_K=K[p],
            retract_p=LinearMap(sp, hsp, pmat),
            retract_i=LinearMap(hsp, sp, H.basis),
        ))
    return HodgeDecomposition(S, out)


def retract(S: DgiSpace, policy: NumericPolicy | None = None):
    """Per-degree lists ``(i, p, K)`` of the homotopy retract onto harmonics."""
    hd = hodge_decompose(S, policy)
    return ([d.retract_i for d in hd.degrees], [d.retract_p for d in hd.degrees],
            [d.retract_K for d in hd.degrees])


def harmonic_projector(S: DgiSpace, policy: NumericPolicy | None = None):
    """Per-degree ``h = id - dK - Kd`` (the orthogonal projector onto harmonics)."""
    return [d.projector_h for d in hodge_decompose(S, policy).degrees]


def retract_residuals(S: DgiSpace, hd: HodgeDecomposition | None = None) -> dict:
    """Largest residual of each retract identity over all degrees."""
    hd = hd or hodge_decompose(S)
    worst = dict(pi=0.0, KK=0.0, Ki=0.0, pK=0.0, homotopy=0.0, h_formula=0.0)
    D = S.max_degree
    for p in range(D + 1):
        dp = hd[p]
        i, pr, K = dp.retract_i.matrix, dp.retract_p.matrix, dp.retract_K.matrix
        worst["pi"] = max(worst["pi"], max_abs(pr @ i - np.eye(i.shape[1])))
        if p + 1 <= D:
            worst["KK"] = max(worst["KK"], max_abs(hd[p + 1].retract_K.matrix @ K))
            worst["pK"] = max(worst["pK"], max_abs(hd[p + 1].retract_p.matrix @ K))
        worst["Ki"] = max(worst["Ki"], max_abs(K @ i))
        kd_dk = S.dmat(p + 1) @ K
        if p >= 1:
            kd_dk = kd_dk + hd[p - 1].retract_K.matrix @ S.dmat(p)
        lhs = np.eye(S.dim(p)) - i @ pr
        worst["homotopy"] = max(worst["homotopy"], max_abs(lhs - kd_dk))
        worst["h_formula"] = max(worst["h_formula"], max_abs(dp.projector_h.matrix - i @ pr))
    return worst


def summand_projectors(hd: HodgeDecomposition, p: int):
    """Orthogonal projectors onto ``Im d``, ``Im d*`` and ``H`` in degree ``p``."""
    dp = hd[p]
    return (dp.im_d.projector_matrix(), dp.im_dstar.projector_matrix(),
            dp.harmonic.projector_matrix())


def harmonic_map(f: DgiMorphism, hv: HodgeDecomposition | None = None,
                 hw: HodgeDecomposition | None = None, policy: NumericPolicy | None = None):
    """Matrices of ``h(f) = h_W f`` between orthonormal harmonic bases, per degree."""
    hv = hv or hodge_decompose(f.source, policy)
    hw = hw or hodge_decompose(f.target, policy)
    out = []
    for p in range(f.source.max_degree + 1):
        BV = hv[p].harmonic.basis
        if p <= f.target.max_degree:
            BW = hw[p].harmonic.basis
            gw = f.target.space(p).gram
            m = BW.T @ gw @ f.mat(p) @ BV
        else:
            m = np.zeros((0, BV.shape[1]))
        out.append(LinearMap(InnerSpace.standard(BV.shape[1]), InnerSpace.standard(m.shape[0]), m))
    return out


def betti_numbers(S: DgiSpace, policy: NumericPolicy | None = None) -> tuple:
    """Rank-nullity Betti numbers ``dim - rank d_p - rank d_{p+1}``."""
    policy = policy or get_policy()
    return tuple(S.dim(p) - rank(S.d(p), policy) - rank(S.d(p + 1), policy)
                 for p in range(S.max_degree + 1))


def harmonic_homology_check(S: DgiSpace, f: DgiMorphism | None = None,
                            policy: NumericPolicy | None = None) -> dict:
    """Computable content of the harmonic/homology identification.

    Checks ``H ∩ Im d = 0`` and ``dim H_p = beta_p``; with a morphism ``f``
    out of ``S`` also checks ``h(f)(z) - f(z) ∈ Im d`` for harmonic ``z``.
    """
    policy = policy or get_policy()
    hd = hodge_decompose(S, policy)
    betti = betti_numbers(S, policy)
    degrees = []
    ok = True
    for p in range(S.max_degree + 1):
        H, imd = hd[p].harmonic, hd[p].im_d
        overlap = H.dim + imd.dim - subspace_sum(H, imd, policy).dim
        match = H.dim == betti[p]
        ok &= overlap == 0 and match
        degrees.append({"degree": p, "harmonic_dim": H.dim, "betti": betti[p],
                        "overlap_with_im_d": overlap})
    report = {"ok": bool(ok), "degrees": degrees}
    if f is not None:
        hw = hodge_decompose(f.target, policy)
        hm = harmonic_map(f, hd, hw, policy)
        worst = 0.0
        for p in range(S.max_degree + 1):
            if p > f.target.max_degree or hd[p].harmonic.dim == 0:
                continue
            z = hd[p].harmonic.basis
            diff = hw[p].harmonic.basis @ hm[p].matrix - f.mat(p) @ z
            tgt = hw[p].im_d
            amb = f.target.space(p)
            # diff need not be orthonormal; measure the component off Im d
            off = diff - tgt.projector_matrix() @ diff
            worst = max(worst, max_abs(amb.to_euclid(off)))
        report["naturality_residual"] = worst
        report["ok"] = bool(report["ok"] and policy.close(worst))
    return report


__all__ = [
    "DegreeHodge",
    "HodgeDecomposition",
    "algebraic_decompose",
    "betti_numbers",
    "harmonic_homology_check",
    "harmonic_map",
    "harmonic_projector",
    "hodge_decompose",
    "retract",
    "retract_residuals",
    "summand_projectors",
]
