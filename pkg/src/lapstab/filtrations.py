"""Filtration frontends: sublevel sets of simplicial complexes and weighted digraphs.

Digraph chains follow the allowed-path construction: ``A_p`` is spanned by
walks with ``p`` edges, and ``Ω_p`` is the subspace of ``A_p`` whose boundary
stays in ``A_{p-1}``.  ``Ω`` inherits the standard inner product of the
elementary path space, so its Gram in the computed basis is ``E^T E``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dgi import DgiMorphism, DgiSpace
from .linalg import InnerSpace, ValidationError, get_policy, max_abs
from .perslap import PersistenceDgi


def path_label(verts) -> str:
    """``(0, 1, 3) -> "013"``; comma separated once any id exceeds 9."""
    verts = [int(v) for v in verts]
    if all(0 <= v <= 9 for v in verts):
        return "".join(str(v) for v in verts)
    return ",".join(str(v) for v in verts)


def combination_label(coeffs, labels) -> str:
    terms = []
    for c, lab in zip(coeffs, labels):
        if abs(c) < 1e-12:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = lab if abs(mag - 1.0) < 1e-12 else f"{mag:g}*{lab}"
        terms.append((sign, body))
    if not terms:
        return "0"
    out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, body in terms[1:]:
        out += sign + body
    return out


# ---------------------------------------------------------------- simplicial

class SimplicialComplex:
    """A face-closed set of simplices, stored as sorted vertex tuples."""

    def __init__(self, simplices, *, close: bool = False):
        simp = set()
        for s in simplices:
            t = tuple(sorted(int(v) for v in s))
            if len(set(t)) != len(t) or not t:
                raise ValidationError(f"invalid simplex {s!r}")
            simp.add(t)
        if close:
            simp = {f for s in simp for k in range(1, len(s) + 1)
                    for f in itertools.combinations(s, k)}
        else:
            for s in simp:
                for f in faces(s):
                    if f not in simp:
                        raise ValidationError(f"complex not closed: face {f} of {s} missing")
        self.simplices = tuple(sorted(simp, key=lambda t: (len(t), t)))
        self._index = {s: i for i, s in enumerate(self.simplices)}

    @property
    def dim(self) -> int:
        return max((len(s) for s in self.simplices), default=0) - 1

    def of_degree(self, p: int):
        return [s for s in self.simplices if len(s) == p + 1]

    def __contains__(self, s):
        return tuple(s) in self._index

    def __len__(self):
        return len(self.simplices)


def faces(s):
    """Codimension-one faces of a simplex, in boundary order."""
    return [s[:i] + s[i + 1:] for i in range(len(s))] if len(s) > 1 else []


def boundary_matrix(rows, cols):
    """Alternating boundary from simplices ``cols`` into ``rows``."""
    idx = {s: i for i, s in enumerate(rows)}
    B = np.zeros((len(rows), len(cols)))
    for j, s in enumerate(cols):
        for i, f in enumerate(faces(s)):
            B[idx[f], j] += (-1) ** i
    return B


def simplicial_chain(K: SimplicialComplex | list, max_degree: int | None = None) -> DgiSpace:
    """Chain complex with identity Grams and the alternating boundary."""
    simplices = K.simplices if isinstance(K, SimplicialComplex) else sorted(K, key=lambda t: (len(t), t))
    top = max_degree if max_degree is not None else max((len(s) for s in simplices), default=1) - 1
    top = max(top, 0)
    by_deg = [[s for s in simplices if len(s) == p + 1] for p in range(top + 1)]
    ds = [boundary_matrix(by_deg[p - 1], by_deg[p]) for p in range(1, top + 1)]
    labels = [[path_label(s) for s in by_deg[p]] for p in range(top + 1)]
    return DgiSpace.standard([len(b) for b in by_deg], ds, labels, check=False)


def monotone_values(K: SimplicialComplex, values: dict, *, fill: bool = False) -> dict:
    """Check ``f(σ) <= f(τ)`` for faces ``σ ⊂ τ``.

    With ``fill=True`` a missing vertex value is taken as the minimum over its
    valued cofaces and any other missing simplex gets the max of its face
    values (lower-star extension).
    """
    vals = {tuple(sorted(int(v) for v in s)): float(x) for s, x in values.items()}
    for s in vals:
        if s not in K:
            raise ValidationError(f"value given for simplex {s} not in the complex")
    if fill:
        for s in K.simplices:
            if len(s) == 1 and s not in vals:
                cof = [x for t, x in vals.items() if s[0] in t]
                if not cof:
                    raise ValidationError(f"no value for vertex {s}")
                vals[s] = min(cof)
        for s in K.simplices:
            if s not in vals:
                vals[s] = max(vals[f] for f in faces(s))
    for s in K.simplices:
        if s not in vals:
            raise ValidationError(f"no value for simplex {s}")
        for f in faces(s):
            if vals[f] > vals[s]:
                raise ValidationError(
                    f"not monotone: face {f} has value {vals[f]} > {vals[s]} of {s}"
                )
    return vals


def sublevel_filtration(K: SimplicialComplex, values: dict, max_degree: int | None = None) -> PersistenceDgi:
    """Persistence object of the sublevel complexes ``f^{-1}((-inf, a])``."""
    vals = monotone_values(K, values)
    top = K.dim if max_degree is None else max_degree
    top = max(top, 0)
    grid = sorted(set(vals.values()))
    full = [K.of_degree(p) for p in range(top + 1)]
    spaces, embeds = [], []
    for t in grid:
        sub = [s for s in K.simplices if vals[s] <= t and len(s) <= top + 1]
        S = simplicial_chain(sub, top)
        spaces.append(S)
        emb = []
        for p in range(top + 1):
            keep = [s for s in full[p] if vals[s] <= t]
            idx = {s: i for i, s in enumerate(full[p])}
            E = np.zeros((len(full[p]), len(keep)))
            for j, s in enumerate(keep):
                E[idx[s], j] = 1.0
            emb.append(E)
        embeds.append(emb)
    steps = [_inclusion(spaces[i], spaces[i + 1], embeds[i], embeds[i + 1])
             for i in range(len(grid) - 1)]
    return PersistenceDgi(
        grid, spaces, steps,
        embeddings=embeds,
        ambient_labels=[[path_label(s) for s in full[p]] for p in range(top + 1)],
        source={"kind": "simplicial", "complex": K, "values": vals, "max_degree": top},
        check=False,
    )


def _inclusion(S: DgiSpace, T: DgiSpace, ES, ET, *, check: bool = True) -> DgiMorphism:
    """Morphism ``S -> T`` induced by subspace containment in a common ambient."""
    mats = []
    for p in range(S.max_degree + 1):
        mats.append(solve_embedding(ET[p], ES[p]))
    return DgiMorphism(S, T, mats, check=check)


def solve_embedding(E_big, E_small):
    """``M`` with ``E_big M = E_small``; raises if the column space is not contained."""
    E_big = np.asarray(E_big, dtype=np.float64)
    E_small = np.asarray(E_small, dtype=np.float64)
    if E_small.shape[1] == 0:
        return np.zeros((E_big.shape[1], 0))
    if E_big.shape[1] == 0:
        if max_abs(E_small) > 0:
            raise ValidationError("subspace is not contained in the target")
        return np.zeros((0, E_small.shape[1]))
    M, *_ = np.linalg.lstsq(E_big, E_small, rcond=None)
    res = max_abs(E_big @ M - E_small)
    if res > get_policy().check_tol * (1 + max_abs(E_small)):
        raise ValidationError(f"subspace is not contained in the target (residual {res:.3g})")
    return M


# ---------------------------------------------------------------- digraphs

class Digraph:
    """Vertices ``0..n-1`` and a set of directed edges without self-loops."""

    def __init__(self, n_vertices: int, edges):
        n = int(n_vertices)
        if n < 0:
            raise ValidationError("vertex count must be nonnegative")
        seen = set()
        for e in edges:
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise ValidationError(f"self-loop at vertex {i} is not supported")
            if not (0 <= i < n and 0 <= j < n):
                raise ValidationError(f"edge ({i}, {j}) references a missing vertex")
            if (i, j) in seen:
                raise ValidationError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
        self.n_vertices = n
        self.edges = tuple(sorted(seen))

    def adjacency(self):
        A = np.zeros((self.n_vertices, self.n_vertices), dtype=np.uint8)
        for i, j in self.edges:
            A[i, j] = 1
        return A

    def subgraph(self, edges) -> "Digraph":
        return Digraph(self.n_vertices, edges)


def allowed_paths(G: Digraph, p_max: int):
    """``A_p`` for ``p = 0..p_max`` as int arrays of walks in lexicographic order."""
    if p_max < 0:
        raise ValidationError("p_max must be nonnegative")
    adj = np.ascontiguousarray(G.adjacency())
    return [np.asarray(kernels.walks(adj, p), dtype=np.int64).reshape(-1, p + 1)
            for p in range(p_max + 1)]


def path_boundary(paths, allowed_prev):
    """Boundary of elementary paths split into allowed and non-allowed rows.

    Returns ``(B_allowed, B_other)`` where ``B_allowed`` is expressed in the
    ``allowed_prev`` ordering and ``B_other`` has one row per non-allowed face
    (including non-regular faces such as ``e_{i i}``).
    """
    idx = {tuple(r): i for i, r in enumerate(allowed_prev.tolist())}
    other: dict = {}
    n = len(paths)
    rows_a = np.zeros((len(idx), n))
    entries = []
    for j, path in enumerate(paths.tolist()):
        for k in range(len(path)):
            face = tuple(path[:k] + path[k + 1:])
            sgn = -1.0 if k % 2 else 1.0
            if face in idx:
                rows_a[idx[face], j] += sgn
            else:
                r = other.setdefault(face, len(other))
                entries.append((r, j, sgn))
    rows_o = np.zeros((len(other), n))
    for r, j, sgn in entries:
        rows_o[r, j] += sgn
    return rows_a, rows_o


RREF_TOL = 1e-9


def nullspace_rref(C, n_cols: int):
    """Free-variable basis of ``ker C`` from reduced row echelon form.

    Each vector is signed so its first nonzero coordinate is positive.
    """
    if C.shape[0] == 0:
        return np.eye(n_cols)
    R, piv = kernels.rref(np.ascontiguousarray(C, dtype=np.float64), RREF_TOL)
    piv = [int(x) for x in piv]
    free = [j for j in range(n_cols) if j not in set(piv)]
    N = np.zeros((n_cols, len(free)))
    for k, j in enumerate(free):
        N[j, k] = 1.0
        for r, pc in enumerate(piv):
            N[pc, k] = -R[r, j]
    for k in range(N.shape[1]):
        nz = np.flatnonzero(np.abs(N[:, k]) > RREF_TOL)
        if len(nz) and N[nz[0], k] < 0:
            N[:, k] = -N[:, k]
    N[np.abs(N) <= RREF_TOL] = 0.0
    return N


@dataclass
class OmegaComplex:
    space: DgiSpace
    allowed: list      # A_p walk arrays
    basis: list        # E_p: A_p coordinates of the Ω_p basis


def omega(G: Digraph, p_max: int = 3) -> OmegaComplex:
    """``Ω_p = {u ∈ A_p : ∂u ∈ A_{p-1}}`` with the inherited inner product."""
    A = allowed_paths(G, p_max)
    E = [np.eye(len(A[0]))]
    bd = [None]
    for p in range(1, p_max + 1):
        Ba, Bo = path_boundary(A[p], A[p - 1])
        E.append(nullspace_rref(Bo, len(A[p])))
        bd.append(Ba)
    grams, ds, labels = [], [], []
    for p in range(p_max + 1):
        grams.append(E[p].T @ E[p])
        labs = [path_label(r) for r in A[p].tolist()]
        labels.append([combination_label(E[p][:, k], labs) for k in range(E[p].shape[1])])
    for p in range(1, p_max + 1):
        image = bd[p] @ E[p]
        ds.append(solve_embedding(E[p - 1], image))
    spaces = [InnerSpace(g) for g in grams]
    S = DgiSpace(spaces, ds, labels, check=True)
    return OmegaComplex(S, A, E)


def _embed_into(sub_allowed, full_allowed, E_sub):
    idx = {tuple(r): i for i, r in enumerate(full_allowed.tolist())}
    out = np.zeros((len(full_allowed), E_sub.shape[1]))
    for i, r in enumerate(sub_allowed.tolist()):
        out[idx[tuple(r)]] = E_sub[i]
    return out


def digraph_filtration(G: Digraph, weights, p_max: int = 3, *, base_level: bool = True) -> PersistenceDgi:
    """Persistence object ``a -> Ω(V, {e : w(e) <= a})``.

    ``weights`` maps each edge ``(i, j)`` to a real.  All vertices are present
    at every level.  With ``base_level`` an extra critical value
    ``min(w) - 1`` carries the edgeless graph so vertex classes are visible
    before the first edge arrives.
    """
    w = {(int(i), int(j)): float(x) for (i, j), x in dict(weights).items()}
    if set(w) != set(G.edges):
        missing = set(G.edges) - set(w)
        extra = set(w) - set(G.edges)
        raise ValidationError(f"weights must cover exactly the edges (missing {sorted(missing)}, extra {sorted(extra)})")
    grid = sorted(set(w.values()))
    if not grid:
        grid = [0.0]
    elif base_level:
        grid = [grid[0] - 1.0] + grid
    full = omega(G, p_max)
    spaces, embeds = [], []
    for t in grid:
        sub = G.subgraph([e for e in G.edges if w[e] <= t])
        om = full if len(sub.edges) == len(G.edges) else omega(sub, p_max)
        spaces.append(om.space)
        embeds.append([_embed_into(om.allowed[p], full.allowed[p], om.basis[p]) for p in range(p_max + 1)])
    steps = [_inclusion(spaces[i], spaces[i + 1], embeds[i], embeds[i + 1])
             for i in range(len(grid) - 1)]
    return PersistenceDgi(
        grid, spaces, steps,
        embeddings=embeds,
        ambient_labels=[[path_label(r) for r in full.allowed[p].tolist()] for p in range(p_max + 1)],
        source={"kind": "digraph", "graph": G, "weights": w, "p_max": p_max, "base_level": base_level},
        check=False,
    )


def diamond_digraph() -> Digraph:
    """Vertices 0..3 with edges 0->1, 1->3, 0->2, 2->3."""
    return Digraph(4, [(0, 1), (1, 3), (0, 2), (2, 3)])


DIAMOND_WEIGHTS = {(0, 1): 1.0, (2, 3): 2.0, (1, 3): 3.0, (0, 2): 4.0}


__all__ = [
    "DIAMOND_WEIGHTS",
    "Digraph",
    "OmegaComplex",
    "SimplicialComplex",
    "allowed_paths",
    "boundary_matrix",
    "combination_label",
    "diamond_digraph",
    "digraph_filtration",
    "faces",
    "monotone_values",
    "nullspace_rref",
    "omega",
    "path_boundary",
    "path_label",
    "simplicial_chain",
    "solve_embedding",
    "sublevel_filtration",
]
