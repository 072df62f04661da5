"""Random instances for property tests and the stability harness.

Values are drawn on coarse grids (integers, then perturbations in multiples
of ``quantum``) so filtrations keep a small number of critical values.
"""
from __future__ import annotations

import itertools

import numpy as np
import scipy.linalg as sla

from .dgi import DgiSpace
from .filtrations import Digraph, SimplicialComplex, faces


def random_complex(rng: np.random.Generator, n_vertices: int = 6, max_dim: int = 3,
                   n_max_simplices: int | None = None) -> SimplicialComplex:
    """Closure of a few random simplices on ``n_vertices`` vertices."""
    n_max_simplices = n_max_simplices or int(rng.integers(2, 2 * n_vertices + 1))
    tops = [(v,) for v in range(n_vertices)]
    for _ in range(n_max_simplices):
        k = int(rng.integers(2, min(max_dim, n_vertices - 1) + 2)) if n_vertices >= 2 else 1
        tops.append(tuple(sorted(rng.choice(n_vertices, size=k, replace=False).tolist())))
    return SimplicialComplex(tops, close=True)


def random_monotone_values(rng: np.random.Generator, K: SimplicialComplex, levels: int = 4) -> dict:
    """Integer values with ``f(face) <= f(simplex)``."""
    vals = {}
    for s in K.simplices:
        if len(s) == 1:
            vals[s] = float(rng.integers(0, levels))
        else:
            vals[s] = max(vals[f] for f in faces(s)) + float(rng.integers(0, 2))
    return vals


def monotonize(K: SimplicialComplex, vals: dict) -> dict:
    """Raise each value to the max over its faces (keeps sup-distance bounds)."""
    out = {}
    for s in K.simplices:
        v = vals[s]
        for f in faces(s):
            v = max(v, out[f])
        out[s] = v
    return out


def perturb_values(rng: np.random.Generator, K: SimplicialComplex, vals: dict, eps: float,
                   quantum: float = 0.25) -> dict:
    """Monotone ``g`` with ``||f - g||_inf <= eps`` on a ``quantum`` lattice."""
    k = int(np.floor(eps / quantum + 1e-12))
    raw = {s: vals[s] + quantum * float(rng.integers(-k, k + 1)) for s in K.simplices}
    return monotonize(K, raw)


def random_digraph(rng: np.random.Generator, n_vertices: int = 4, p_edge: float = 0.4) -> Digraph:
    edges = [(i, j) for i, j in itertools.permutations(range(n_vertices), 2) if rng.random() < p_edge]
    return Digraph(n_vertices, edges)


def random_weights(rng: np.random.Generator, G: Digraph, levels: int = 4) -> dict:
    return {e: float(rng.integers(1, levels + 1)) for e in G.edges}


def perturb_weights(rng: np.random.Generator, w: dict, eps: float, quantum: float = 0.25) -> dict:
    k = int(np.floor(eps / quantum + 1e-12))
    return {e: x + quantum * float(rng.integers(-k, k + 1)) for e, x in w.items()}


def random_spd(rng: np.random.Generator, n: int, spread: float = 1.0):
    A = rng.normal(size=(n, n))
    return A @ A.T / max(n, 1) + spread * np.eye(n)


def random_dgi_space(rng: np.random.Generator, dims=(3, 4, 2), weighted: bool = True) -> DgiSpace:
    """Random chain complex with ``d∘d = 0`` and random SPD Grams."""
    ds = []
    prev = None
    for p in range(1, len(dims)):
        n_lo, n_hi = dims[p - 1], dims[p]
        if prev is None:
            basis = np.eye(n_lo)
        else:
            basis = sla.null_space(prev) if prev.size else np.eye(n_lo)
        k = basis.shape[1]
        r = int(rng.integers(0, min(k, n_hi) + 1))
        if r == 0 or k == 0:
            d = np.zeros((n_lo, n_hi))
        else:
            d = basis @ rng.normal(size=(k, r)) @ rng.normal(size=(r, n_hi))
        ds.append(d)
        prev = d
    grams = [random_spd(rng, n) if weighted else np.eye(n) for n in dims]
    return DgiSpace.from_matrices(grams, ds)


__all__ = [
    "monotonize",
    "perturb_values",
    "perturb_weights",
    "random_complex",
    "random_dgi_space",
    "random_digraph",
    "random_monotone_values",
    "random_spd",
    "random_weights",
]
