"""Gram-weighted dense linear algebra.

Every vector space carries an explicit symmetric positive definite Gram
matrix ``G``; the inner product of coordinate vectors ``x, y`` is
``x.T @ G @ y``.  Computations go through the Cholesky factor ``G = L L^T``:
a map with matrix ``M`` becomes the Euclidean matrix ``L_cod^T M L_dom^{-T}``
and all rank decisions are SVD thresholds on that matrix.

All integer outputs (ranks, nullities, subspace dimensions) are decided by
the single rule ``sigma > rel_tol * sigma_max + abs_tol`` of the active
:class:`NumericPolicy`.
"""
from __future__ import annotations

import contextlib
import contextvars
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg as sla


class LapstabError(Exception):
    """Base class for library errors."""


class InvalidSpaceError(LapstabError, ValueError):
    """A Gram matrix is not symmetric positive definite."""


class DimensionError(LapstabError, ValueError):
    """Shapes or ambient spaces do not match."""


class ContractError(LapstabError, ValueError):
    """An operation was called outside its precondition."""


class ValidationError(LapstabError, ValueError):
    """An object failed validation; ``report`` holds the details."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InvariantViolation(LapstabError):
    """Two computations that must agree in theory disagreed."""


@dataclass(frozen=True)
class NumericPolicy:
    """Tolerances shared by every numerical decision.

    ``rel_tol`` and ``abs_tol`` decide ranks.  ``check_tol`` bounds the
    residual of identities that hold exactly in theory (d∘d = 0, isometry,
    chain maps).  ``grid_tol`` is the slack used when snapping a real
    parameter down to a critical value.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    check_tol: float = 1e-9
    grid_tol: float = 1e-9

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "check_tol", "grid_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")

    def threshold(self, sigma_max: float) -> float:
        return self.rel_tol * sigma_max + self.abs_tol

    def close(self, residual: float, scale: float = 0.0) -> bool:
        return residual <= self.check_tol * (1.0 + scale)

    def to_dict(self) -> dict:
        return asdict(self)


_POLICY: contextvars.ContextVar[NumericPolicy] = contextvars.ContextVar(
    "lapstab_policy", default=NumericPolicy()
)


def get_policy() -> NumericPolicy:
    return _POLICY.get()


@contextlib.contextmanager
def policy_context(policy: NumericPolicy):
    """Temporarily make ``policy`` the active tolerance policy."""
    token = _POLICY.set(policy)
    try:
        yield policy
    finally:
        _POLICY.reset(token)


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


class InnerSpace:
    """A finite-dimensional real space with an SPD Gram matrix."""

    __slots__ = ("gram", "chol", "is_standard")

    def __init__(self, gram, *, check: bool = True):
        gram = np.array(gram, dtype=np.float64)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
            raise InvalidSpaceError(f"Gram matrix must be square, got shape {gram.shape}")
        n = gram.shape[0]
        self.is_standard = bool(np.array_equal(gram, np.eye(n)))
        if self.is_standard:
            self.gram = gram
            self.chol = gram
            return
        if check:
            if max_abs(gram - gram.T) > get_policy().check_tol * (1.0 + max_abs(gram)):
                raise InvalidSpaceError("Gram matrix is not symmetric")
            gram = 0.5 * (gram + gram.T)
            if n and np.linalg.eigvalsh(gram)[0] <= get_policy().abs_tol:
                raise InvalidSpaceError("Gram matrix is not positive definite")
        try:
            self.chol = np.linalg.cholesky(gram) if n else gram
        except np.linalg.LinAlgError as exc:
            raise InvalidSpaceError("Gram matrix is not positive definite") from exc
        self.gram = gram

    @classmethod
    def standard(cls, dim: int) -> "InnerSpace":
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    def inner(self, x, y) -> float:
        return float(np.asarray(x) @ self.gram @ np.asarray(y))

    def to_euclid(self, X):
        """Coordinates -> orthonormal coordinates (multiply by L^T)."""
        if self.is_standard:
            return np.asarray(X, dtype=np.float64)
        return self.chol.T @ X

    def from_euclid(self, Y):
        """Orthonormal coordinates -> coordinates (solve L^T X = Y)."""
        if self.is_standard:
            return np.asarray(Y, dtype=np.float64)
        return sla.solve_triangular(self.chol.T, Y, lower=False)

    def same_as(self, other: "InnerSpace") -> bool:
        if self is other:
            return True
        return self.dim == other.dim and np.array_equal(self.gram, other.gram)

    def __repr__(self):
        kind = "standard" if self.is_standard else "weighted"
        return f"InnerSpace(dim={self.dim}, {kind})"


class LinearMap:
    """A linear map between inner spaces, stored as a codomain x domain matrix."""

    __slots__ = ("domain", "codomain", "matrix")

    def __init__(self, domain: InnerSpace, codomain: InnerSpace, matrix):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape != (codomain.dim, domain.dim):
            raise DimensionError(
                f"matrix shape {matrix.shape} does not match "
                f"codomain x domain = {(codomain.dim, domain.dim)}"
            )
        self.domain = domain
        self.codomain = codomain
        self.matrix = matrix

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        if other.codomain.dim != self.domain.dim:
            raise DimensionError("cannot compose maps with mismatched dimensions")
        return LinearMap(other.domain, self.codomain, self.matrix @ other.matrix)

    def euclid(self):
        """Matrix of the map in orthonormal coordinates on both sides."""
        m = self.codomain.to_euclid(self.matrix)
        if self.domain.is_standard:
            return m
        # m @ L_dom^{-T}  ==  (L_dom^{-1} m^T)^T
        return sla.solve_triangular(self.domain.chol, m.T, lower=True).T

    def __repr__(self):
        return f"LinearMap({self.domain.dim} -> {self.codomain.dim})"


def identity(space: InnerSpace) -> LinearMap:
    return LinearMap(space, space, np.eye(space.dim))


def zero_map(domain: InnerSpace, codomain: InnerSpace) -> LinearMap:
    return LinearMap(domain, codomain, np.zeros((codomain.dim, domain.dim)))


def _as_columns(vectors, n: int):
    V = np.asarray(vectors, dtype=np.float64)
    if V.ndim == 1:
        V = V.reshape(n, -1) if n else V.reshape(0, 0)
    if V.ndim != 2 or V.shape[0] != n:
        raise DimensionError(f"expected {n} rows, got shape {V.shape}")
    return V


class Subspace:
    """A subspace given by a Gram-orthonormal basis (columns of ``basis``)."""

    __slots__ = ("ambient", "basis", "_proj")

    def __init__(self, ambient: InnerSpace, basis):
        basis = _as_columns(basis, ambient.dim)
        self.ambient = ambient
        self.basis = basis
        self._proj = None

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector_matrix(self):
        if self._proj is None:
            B = self.basis
            self._proj = B @ (B.T @ self.ambient.gram) if not self.ambient.is_standard else B @ B.T
        return self._proj

    def __repr__(self):
        return f"Subspace(dim={self.dim} in {self.ambient.dim})"


def _rank_from_singular(s, policy: NumericPolicy) -> int:
    if s.size == 0:
        return 0
    return int(np.count_nonzero(s > policy.threshold(float(s[0]))))


def span(ambient: InnerSpace, vectors, policy: NumericPolicy | None = None) -> Subspace:
    """Orthonormalised span of the columns of ``vectors``."""
    policy = policy or get_policy()
    V = _as_columns(vectors, ambient.dim)
    if V.shape[1] == 0 or ambient.dim == 0:
        return Subspace(ambient, np.zeros((ambient.dim, 0)))
    U, s, _ = np.linalg.svd(ambient.to_euclid(V), full_matrices=False)
    r = _rank_from_singular(s, policy)
    return Subspace(ambient, ambient.from_euclid(U[:, :r]))


def zero_subspace(ambient: InnerSpace) -> Subspace:
    return Subspace(ambient, np.zeros((ambient.dim, 0)))


def full_subspace(ambient: InnerSpace) -> Subspace:
    return Subspace(ambient, ambient.from_euclid(np.eye(ambient.dim)))


def adjoint(T: LinearMap) -> LinearMap:
    """The adjoint ``G_dom^{-1} M^T G_cod``."""
    dom, cod = T.domain, T.codomain
    mt = T.matrix.T
    if not cod.is_standard:
        mt = mt @ cod.gram
    if not dom.is_standard:
        mt = sla.cho_solve((dom.chol, True), mt)
    return LinearMap(cod, dom, mt)


def rank(T: LinearMap, policy: NumericPolicy | None = None) -> int:
    policy = policy or get_policy()
    m = T.euclid()
    if m.size == 0:
        return 0
    return _rank_from_singular(np.linalg.svd(m, compute_uv=False), policy)


def kernel(T: LinearMap, policy: NumericPolicy | None = None) -> Subspace:
    """Gram-orthonormal basis of ``{x : T x = 0}``."""
    policy = policy or get_policy()
    dom = T.domain
    n = dom.dim
    if n == 0:
        return zero_subspace(dom)
    m = T.euclid()
    if m.shape[0] == 0:
        return full_subspace(dom)
    _, s, vt = np.linalg.svd(m, full_matrices=True)
    r = _rank_from_singular(s, policy)
    return Subspace(dom, dom.from_euclid(vt[r:].T))


def image(T: LinearMap, policy: NumericPolicy | None = None) -> Subspace:
    return span(T.codomain, T.matrix, policy)


def nullity(T: LinearMap, policy: NumericPolicy | None = None) -> int:
    return kernel(T, policy).dim


def _same_ambient(A: Subspace, B: Subspace):
    if not A.ambient.same_as(B.ambient):
        raise DimensionError("subspaces live in different ambient spaces")


def subspace_sum(A: Subspace, B: Subspace, policy: NumericPolicy | None = None) -> Subspace:
    _same_ambient(A, B)
    return span(A.ambient, np.hstack([A.basis, B.basis]), policy)


def subspace_intersect(A: Subspace, B: Subspace, policy: NumericPolicy | None = None) -> Subspace:
    """``A ∩ B``: vectors ``A c`` whose component off ``B`` vanishes."""
    _same_ambient(A, B)
    policy = policy or get_policy()
    amb = A.ambient
    if A.dim == 0 or B.dim == 0:
        return zero_subspace(amb)
    resid = A.basis - B.projector_matrix() @ A.basis
    coeff_space = InnerSpace.standard(A.dim)
    coeffs = kernel(LinearMap(coeff_space, amb, resid), policy)
    return Subspace(amb, A.basis @ coeffs.basis)


def orth_complement(A: Subspace, policy: NumericPolicy | None = None) -> Subspace:
    amb = A.ambient
    if A.dim == 0:
        return full_subspace(amb)
    coords = A.basis.T @ amb.gram if not amb.is_standard else A.basis.T
    return kernel(LinearMap(amb, InnerSpace.standard(A.dim), coords), policy)


def project_onto(A: Subspace) -> LinearMap:
    """Gram-orthogonal projector onto ``A``."""
    return LinearMap(A.ambient, A.ambient, A.projector_matrix())


def containment_residual(A: Subspace, B: Subspace) -> float:
    """Largest Gram-norm of the part of a unit vector of ``A`` off ``B``."""
    _same_ambient(A, B)
    if A.dim == 0:
        return 0.0
    off = A.basis - B.projector_matrix() @ A.basis
    e = A.ambient.to_euclid(off)
    return float(np.linalg.norm(e, ord=2))


def subspace_distance(A: Subspace, B: Subspace) -> float:
    """Mutual-containment residual; zero iff ``A == B``."""
    if A.dim != B.dim:
        return float("inf")
    return max(containment_residual(A, B), containment_residual(B, A))


def pseudoinverse_weighted(T: LinearMap, policy: NumericPolicy | None = None) -> LinearMap:
    """Moore-Penrose inverse with respect to the domain and codomain Grams."""
    policy = policy or get_policy()
    dom, cod = T.domain, T.codomain
    if dom.dim == 0 or cod.dim == 0:
        return zero_map(cod, dom)
    U, s, vt = np.linalg.svd(T.euclid(), full_matrices=False)
    r = _rank_from_singular(s, policy)
    pinv_e = (vt[:r].T / s[:r]) @ U[:, :r].T
    # back to coordinates: L_dom^{-T} pinv_e L_cod^T
    m = dom.from_euclid(pinv_e)
    if not cod.is_standard:
        m = m @ cod.chol.T
    return LinearMap(cod, dom, m)


def is_self_adjoint(T: LinearMap, policy: NumericPolicy | None = None) -> bool:
    policy = policy or get_policy()
    if T.domain.dim != T.codomain.dim:
        return False
    G = T.domain.gram
    gm = G @ T.matrix
    return policy.close(max_abs(gm - gm.T), max_abs(gm))


def eigenvalues_sym(T: LinearMap, policy: NumericPolicy | None = None):
    """Ascending eigenvalues of a self-adjoint operator.

    Eigenvalues with magnitude under the rank threshold are returned as 0.0.
    """
    policy = policy or get_policy()
    if not T.domain.same_as(T.codomain):
        raise ContractError("eigenvalues need an operator on a single space")
    if not is_self_adjoint(T, policy):
        raise ContractError("operator is not self-adjoint")
    if T.domain.dim == 0:
        return np.zeros(0)
    S = T.euclid()
    vals = np.linalg.eigvalsh(0.5 * (S + S.T))
    thr = policy.threshold(float(np.max(np.abs(vals))))
    vals = np.where(np.abs(vals) <= thr, 0.0, vals)
    return np.sort(vals)


def block_diag(*blocks):
    blocks = [np.asarray(b, dtype=np.float64) for b in blocks]
    if not blocks:
        return np.zeros((0, 0))
    return sla.block_diag(*blocks) if any(b.size for b in blocks) else np.zeros(
        (sum(b.shape[0] for b in blocks), sum(b.shape[1] for b in blocks))
    )


def canonical_basis(A: Subspace) -> Subspace:
    """Re-express ``A`` with a reproducible orthonormal basis.

    Column-pivoted QR of the Euclidean projector picks basis directions in a
    fixed pivot order; each column is signed so its largest entry is positive.
    """
    amb = A.ambient
    if A.dim == 0:
        return A
    E = amb.to_euclid(A.basis)
    Pe = E @ E.T
    Q, _, _ = sla.qr(Pe, pivoting=True, mode="economic")
    Q = Q[:, : A.dim]
    # project back to kill the tiny off-subspace component from QR
    Q = E @ (E.T @ Q)
    Q, _ = np.linalg.qr(Q)
    idx = np.argmax(np.abs(Q), axis=0)
    signs = np.sign(Q[idx, np.arange(Q.shape[1])])
    signs[signs == 0] = 1.0
    return Subspace(amb, amb.from_euclid(Q * signs))
