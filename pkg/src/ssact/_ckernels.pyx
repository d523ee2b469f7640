# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: brute-force fixed-path census and power iteration."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def fixed_path_census(const long[:, ::1] out_edge, const long[:, ::1] restr,
                      const long[::1] edge_source, const long[::1] vert_ptr,
                      const long[::1] vert_edges, const long[::1] domain,
                      const long[::1] terminus, long start, long depth):
    cdef Py_ssize_t n_classes = out_edge.shape[0]
    counts_arr = np.zeros((depth + 1, n_classes), dtype=np.int64)
    totals_arr = np.zeros(depth + 1, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] counts = counts_arr
    cdef cnp.int64_t[::1] totals = totals_arr
    cdef long v0 = domain[start]
    cdef bint fixed0 = domain[start] == terminus[start]
    totals[0] = 1
    if fixed0:
        counts[0, start] = 1
    if depth == 0:
        return counts_arr, totals_arr

    # explicit DFS stack: per level the class, vertex, fixed flag and edge cursor
    cdef long[::1] st_class = np.empty(depth + 1, dtype=np.int_)
    cdef long[::1] st_vertex = np.empty(depth + 1, dtype=np.int_)
    cdef long[::1] st_cursor = np.empty(depth + 1, dtype=np.int_)
    cdef char[::1] st_fixed = np.empty(depth + 1, dtype=np.int8)
    cdef long level = 0, e, image, h1, v
    cdef bint f1
    st_class[0] = start
    st_vertex[0] = v0
    st_fixed[0] = fixed0
    st_cursor[0] = vert_ptr[v0]
    while level >= 0:
        v = st_vertex[level]
        if st_cursor[level] >= vert_ptr[v + 1]:
            level -= 1
            continue
        e = vert_edges[st_cursor[level]]
        st_cursor[level] += 1
        image = out_edge[st_class[level], e]
        h1 = restr[st_class[level], e]
        f1 = st_fixed[level] and image == e
        totals[level + 1] += 1
        if f1:
            counts[level + 1, h1] += 1
        if level + 1 < depth:
            level += 1
            st_class[level] = h1
            st_vertex[level] = edge_source[e]
            st_fixed[level] = f1
            st_cursor[level] = vert_ptr[edge_source[e]]
    return counts_arr, totals_arr


def power_iterate(const double[:, ::1] B, x0, double tol, long max_iter):
    cdef Py_ssize_t n = B.shape[0], i, j
    x_arr = np.array(x0, dtype=np.float64)
    x_arr /= x_arr.sum()
    y_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef double[::1] y = y_arr
    cdef double lam = 0.0, acc, res
    cdef long it
    for it in range(max_iter):
        lam = 0.0
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += B[i, j] * x[j]
            y[i] = acc
            lam += acc
        res = 0.0
        for i in range(n):
            acc = fabs(y[i] - lam * x[i])
            if acc > res:
                res = acc
        if res <= tol:
            return lam, np.asarray(x_arr), it, True
        for i in range(n):
            x[i] = y[i] / lam
    return lam, np.asarray(x_arr), max_iter, False
