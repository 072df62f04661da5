"""Pure-Python reference versions of the hot kernels.

Signatures and results match ``_kernels.pyx`` exactly; the test suite runs
both through the same cases.
"""
import numpy as np


def rref(A, tol):
    """Gauss-Jordan elimination with row pivoting in fixed column order.

    Returns the reduced matrix and the pivot column indices.  Entries whose
    magnitude is at most ``tol`` are treated as zero when choosing pivots.
    """
    R = np.array(A, dtype=np.float64, copy=True)
    n_rows, n_cols = R.shape
    pivots = []
    row = 0
    for col in range(n_cols):
        if row >= n_rows:
            break
        best = row
        best_val = abs(R[row, col])
        for r in range(row + 1, n_rows):
            v = abs(R[r, col])
            if v > best_val:
                best, best_val = r, v
        if best_val <= tol:
            R[row:, col] = 0.0
            continue
        if best != row:
            tmp = R[row].copy()
            R[row] = R[best]
            R[best] = tmp
        R[row] /= R[row, col]
        for r in range(n_rows):
            if r != row and R[r, col] != 0.0:
                R[r] -= R[r, col] * R[row]
        R[:, col] = 0.0
        R[row, col] = 1.0
        pivots.append(col)
        row += 1
    return R, np.array(pivots, dtype=np.int64)


def max_matching(adj):
    """Size of a maximum matching in the bipartite graph ``adj`` (left x right).

    Kuhn's augmenting-path algorithm.
    """
    adj = np.asarray(adj, dtype=np.uint8)
    n_left, n_right = adj.shape
    neighbours = [np.flatnonzero(adj[i]).tolist() for i in range(n_left)]
    match_right = [-1] * n_right

    def augment(u, seen):
        for v in neighbours[u]:
            if seen[v]:
                continue
            seen[v] = True
            if match_right[v] < 0 or augment(match_right[v], seen):
                match_right[v] = u
                return True
        return False

    size = 0
    for u in range(n_left):
        if augment(u, [False] * n_right):
            size += 1
    return size


def walks(adj, length):
    """All walks with ``length`` edges in lexicographic vertex order.

    ``adj[i, j]`` nonzero means the edge i -> j exists.  Returns an int64
    array of shape (n_walks, length + 1).
    """
    adj = np.asarray(adj, dtype=np.uint8)
    n = adj.shape[0]
    succ = [np.flatnonzero(adj[i]).tolist() for i in range(n)]
    paths = [(v,) for v in range(n)]
    for _ in range(length):
        paths = [p + (w,) for p in paths for w in succ[p[-1]]]
    if not paths:
        return np.zeros((0, length + 1), dtype=np.int64)
    return np.array(paths, dtype=np.int64).reshape(len(paths), length + 1)
