# cython: language_level=3
"""Compiled versions of the combinatorial kernels.

Must agree bit-for-bit with ``_kernels_py``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def rref(A, double tol):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Rarr = np.array(A, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] R = Rarr
    cdef Py_ssize_t n_rows = R.shape[0], n_cols = R.shape[1]
    cdef Py_ssize_t row = 0, col, r, j, best
    cdef double best_val, v, piv, factor, tmp
    pivots = []
    for col in range(n_cols):
        if row >= n_rows:
            break
        best = row
        best_val = fabs(R[row, col])
        for r in range(row + 1, n_rows):
            v = fabs(R[r, col])
            if v > best_val:
                best = r
                best_val = v
        if best_val <= tol:
            for r in range(row, n_rows):
                R[r, col] = 0.0
            continue
        if best != row:
            for j in range(n_cols):
                tmp = R[row, j]
                R[row, j] = R[best, j]
                R[best, j] = tmp
        piv = R[row, col]
        for j in range(n_cols):
            R[row, j] = R[row, j] / piv
        for r in range(n_rows):
            if r != row and R[r, col] != 0.0:
                factor = R[r, col]
                for j in range(n_cols):
                    R[r, j] = R[r, j] - factor * R[row, j]
        for r in range(n_rows):
            R[r, col] = 0.0
        R[row, col] = 1.0
        pivots.append(col)
        row += 1
    return Rarr, np.array(pivots, dtype=np.int64)


cdef bint _augment(Py_ssize_t u, const cnp.uint8_t[:, ::1] adj,
                   Py_ssize_t[::1] match_right, cnp.uint8_t[::1] seen):
    cdef Py_ssize_t v, n_right = adj.shape[1]
    for v in range(n_right):
        if adj[u, v] == 0 or seen[v]:
            continue
        seen[v] = 1
        if match_right[v] < 0 or _augment(match_right[v], adj, match_right, seen):
            match_right[v] = u
            return True
    return False


def max_matching(adj):
    cdef const cnp.uint8_t[:, ::1] A = np.ascontiguousarray(adj, dtype=np.uint8)
    cdef Py_ssize_t n_left = A.shape[0], n_right = A.shape[1], u
    cdef Py_ssize_t[::1] match_right = np.full(n_right, -1, dtype=np.intp)
    cdef cnp.uint8_t[::1] seen = np.zeros(n_right, dtype=np.uint8)
    cdef long size = 0
    for u in range(n_left):
        seen[:] = 0
        if _augment(u, A, match_right, seen):
            size += 1
    return size


def walks(adj, int length):
    cdef const cnp.uint8_t[:, ::1] A = np.ascontiguousarray(adj, dtype=np.uint8)
    cdef Py_ssize_t n = A.shape[0], k, i, w, count, row, step
    cdef cnp.ndarray[cnp.int64_t, ndim=2] cur = np.arange(n, dtype=np.int64).reshape(n, 1)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] nxt
    cdef cnp.int64_t[:, ::1] cv, nv
    cdef cnp.int64_t last
    for step in range(length):
        cv = cur
        count = 0
        for k in range(cv.shape[0]):
            last = cv[k, step]
            for w in range(n):
                if A[last, w]:
                    count += 1
        nxt = np.empty((count, step + 2), dtype=np.int64)
        nv = nxt
        row = 0
        for k in range(cv.shape[0]):
            last = cv[k, step]
            for w in range(n):
                if A[last, w]:
                    for i in range(step + 1):
                        nv[row, i] = cv[k, i]
                    nv[row, step + 1] = w
                    row += 1
        cur = nxt
    return cur
