"""Pure-Python reference kernels; same signatures as the compiled ``_ckernels``."""

import numpy as np


def fixed_path_census(out_edge, restr, edge_source, vert_ptr, vert_edges, domain, terminus, start, depth):
    """Enumerate every path of length <= depth from ``domain[start]`` and act on it.

    Returns ``(counts, totals)``: ``counts[k, h]`` is the number of length-k paths
    fixed by class ``start`` whose restriction is class ``h``; ``totals[k]`` is the
    number of length-k paths visited.
    """
    n_classes = out_edge.shape[0]
    counts = np.zeros((depth + 1, n_classes), dtype=np.int64)
    totals = np.zeros(depth + 1, dtype=np.int64)
    v0 = domain[start]
    fixed0 = domain[start] == terminus[start]
    totals[0] = 1
    if fixed0:
        counts[0, start] = 1
    if depth == 0:
        return counts, totals
    stack = [(start, v0, 0, fixed0)]
    while stack:
        h, v, k, fixed = stack.pop()
        k1 = k + 1
        for j in range(vert_ptr[v], vert_ptr[v + 1]):
            e = vert_edges[j]
            image = out_edge[h, e]
            h1 = restr[h, e]
            f1 = fixed and image == e
            totals[k1] += 1
            if f1:
                counts[k1, h1] += 1
            if k1 < depth:
                stack.append((h1, edge_source[e], k1, f1))
    return counts, totals


def power_iterate(B, x0, tol, max_iter):
    """Normalized power iteration with 1-norm scaling for a nonnegative matrix.

    Stops when ``max|B x - lam x| <= tol`` with ``lam = sum(B x)``.
    Returns ``(lam, x, iterations, converged)``.
    """
    x = np.array(x0, dtype=np.float64)
    x /= x.sum()
    lam = 0.0
    for it in range(max_iter):
        y = B @ x
        lam = y.sum()
        if np.max(np.abs(y - lam * x)) <= tol:
            return lam, x, it, True
        x = y / lam
    return lam, x, max_iter, False
