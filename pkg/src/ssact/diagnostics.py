"""Fixed-path censuses, the contraction bound behind convergence, and rate reports.

For a class ``g`` with ``d(g) = t(g)``, ``G^k_g(v)`` is the set of length-k paths
from ``d(g)`` to ``v`` fixed by ``g`` and ``F^k_g(v)`` the subset whose
restriction is the unit at ``v``.  The rate fits and witnesses reported here are
empirical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ssact.action import ClosureSet
from ssact.spectral import SpectralData, check_discount, von_neumann_radius
from ssact.trace import IterationReport, _log, _matrix_powers_row, closure_resolvent, fmt

DEFAULT_K = 12
CROSSCHECK_DEPTH = 6


@dataclass(frozen=True)
class CensusRow:
    g: str
    k: int
    G: dict
    F: dict
    residual: float

    @property
    def total_G(self) -> int:
        return sum(self.G.values())

    @property
    def total_F(self) -> int:
        return sum(self.F.values())


def census_GF(closure: ClosureSet, g, k: int, spectral: SpectralData | None = None,
              crosscheck: bool = True) -> CensusRow:
    """Counts ``|G^k_g(v)|`` and ``|F^k_g(v)|`` from powers of the restriction matrix.

    For ``k <= 6`` the counts are checked against brute-force enumeration.
    """
    g = closure.class_of(g)
    if closure.domain[g] != closure.terminus[g]:
        raise ValueError(f"{closure.keys[g]} has d != t")
    if k > closure.graph.max_depth:
        raise ValueError(f"depth {k} exceeds enumeration guard {closure.graph.max_depth}")
    row = _matrix_powers_row(closure.M, g, k)[k]
    graph = closure.graph
    G = {v: 0 for v in graph.vertices}
    for h, c in enumerate(row):
        G[closure.domain[h]] += int(c)
    F = {v: int(row[closure.unit_of[v]]) for v in graph.vertices}
    if crosscheck and k <= CROSSCHECK_DEPTH:
        counts, _ = closure.fixed_path_census(g, k)
        if any(int(counts[k, h]) != int(row[h]) for h in range(len(closure))):
            raise AssertionError(f"transfer-matrix census disagrees with enumeration for {closure.keys[g]}, k={k}")
    residual = 0.0
    if spectral is not None:
        m = spectral.m
        residual = sum((G[v] - F[v]) * m[graph.vertex_index(v)] for v in graph.vertices)
    return CensusRow(closure.keys[g], k, G, F, residual)


@dataclass(frozen=True)
class AlphaBound:
    """Ratio of ``sum_k d^k sum_v |G^k_g(v) - F^k_g(v)| m_v`` to ``rho_vN m_{d(g)}``.

    ``value`` uses the closed form through ``(I - dM)^{-1}``; ``certified`` holds
    when the depth-K truncation plus its geometric tail is strictly below the
    denominator.
    """

    value: float
    certified: bool
    truncated: float
    tail: float
    bound: float


def alpha_bound(closure: ClosureSet, spectral: SpectralData, d, g, K: int = DEFAULT_K) -> AlphaBound:
    check_discount(d, spectral.rho)
    g = closure.class_of(g)
    vix = closure.graph.vertex_index
    m = spectral.m
    md = m[vix(closure.domain[g])]
    rho_vn = von_neumann_radius(d, spectral.rho)
    denom = rho_vn * md
    non_units = [h for h in range(len(closure)) if not closure.is_unit(h)]
    R = closure_resolvent(closure, d)
    closed = sum(R[g, h] * m[vix(closure.domain[h])] for h in non_units)
    rows = _matrix_powers_row(closure.M, g, K)
    truncated = sum(
        d ** k * sum(rows[k][h] * m[vix(closure.domain[h])] for h in non_units) for k in range(K + 1)
    )
    q = float(d) * float(spectral.rho)
    tail = q ** (K + 1) / (1 - q) * float(md)
    certified = float(truncated) + tail < float(denom)
    return AlphaBound(closed / denom, certified, truncated, tail, denom)


def uniform_alpha(closure: ClosureSet, spectral: SpectralData, d, K: int = DEFAULT_K) -> tuple[float, bool]:
    """Max of :func:`alpha_bound` over the closure, and whether every class is certified."""
    bounds = [alpha_bound(closure, spectral, d, g, K) for g in range(len(closure))]
    return max((b.value for b in bounds), key=float), all(b.certified for b in bounds)


def k_witness(closure: ClosureSet, spectral: SpectralData, g, K: int = DEFAULT_K) -> int | None:
    """Smallest ``k <= K`` with ``sum_v |G^{nk} - F^{nk}| m_v <= (rho^k - 1)^n m_{d(g)}`` for all ``nk <= K``.

    An empirical witness found by search.
    """
    g = closure.class_of(g)
    rows = _matrix_powers_row(closure.M, g, K)
    vix = closure.graph.vertex_index
    m = spectral.m
    md = m[vix(closure.domain[g])]
    non_units = [h for h in range(len(closure)) if not closure.is_unit(h)]
    residual = [sum(rows[k][h] * m[vix(closure.domain[h])] for h in non_units) for k in range(K + 1)]
    for k in range(1, K + 1):
        base = spectral.rho ** k - 1
        if all(residual[n * k] <= base ** n * md for n in range(0, K // k + 1)):
            return k
    return None


@dataclass
class ConvergenceSummary:
    ratios: dict
    slopes: dict
    flagged: list
    already_converged: bool
    z_ratio: float | None
    vertex_ratio: float | None
    csv: str = field(repr=False, default="")


def _fit(seq, floor: float):
    pts = [(n, v) for n, v in enumerate(seq) if float(v) > floor]
    if len(pts) < 2:
        return None
    n = np.array([p[0] for p in pts], dtype=float)
    y = np.array([_log(p[1]) for p in pts])
    return float(np.polyfit(n, y, 1)[0])


def convergence_report(report: IterationReport, spectral: SpectralData,
                       floor: float | None = None) -> ConvergenceSummary:
    """Least-squares log-slopes of ``|tau_n(g) - theta(g)|`` per class, plus the CSV.

    Points at or below ``floor`` are ignored (default 0 in exact mode, else
    ``1e-13`` times the initial scale).  A class is flagged when any ratio
    ``delta_{n+1} / delta_n`` over the second half of its fitted points exceeds 1.
    """
    closure = report.traces[0].closure
    exact = report.traces[0].exact
    if floor is None:
        scale = max([1.0] + [float(v) for v in report.deltas[0]])
        floor = 0.0 if exact else 1e-13 * scale
    already = all(float(v) <= floor for dl in report.deltas for v in dl)
    lines = ["step,class,delta,ratio,Z"]
    for n, (dl, z) in enumerate(zip(report.deltas, report.Z)):
        for i, key in enumerate(closure.keys):
            prev = report.deltas[n - 1][i] if n else 0
            ratio = fmt(dl[i] / prev) if n and float(prev) > floor else ""
            lines.append(f"{n},{key},{fmt(dl[i])},{ratio},{fmt(z)}")
    csv = "\n".join(lines) + "\n"
    if already:
        return ConvergenceSummary({}, {}, [], True, None, None, csv)
    if report.steps < 5:
        raise ValueError("insufficient data: need at least 5 iteration steps")
    ratios, slopes, flagged = {}, {}, []
    for i, key in enumerate(closure.keys):
        seq = [dl[i] for dl in report.deltas]
        slope = _fit(seq, floor)
        if slope is None:
            continue
        slopes[key] = slope
        ratios[key] = math.exp(slope)
        pts = [(n, v) for n, v in enumerate(seq) if float(v) > floor]
        tail = pts[len(pts) // 2:]
        if any(float(b) > float(a) for (_, a), (_, b) in zip(tail, tail[1:])):
            flagged.append(key)
    z_err = [abs(z - report.rho_vn) for z in report.Z]
    m = spectral.m
    x_err = [max(abs(a - b) for a, b in zip(t.x, m)) for t in report.traces]
    zs = _fit(z_err, floor)
    xs = _fit(x_err, floor)
    return ConvergenceSummary(
        ratios, slopes, flagged, False,
        math.exp(zs) if zs is not None else None,
        math.exp(xs) if xs is not None else None,
        csv,
    )


def census_csv(closure: ClosureSet, g, k_max: int, spectral: SpectralData | None = None) -> str:
    """CSV with columns ``g, k, vertex, G, F``."""
    lines = ["g,k,vertex,G,F"]
    for k in range(k_max + 1):
        row = census_GF(closure, g, k, spectral)
        for v in closure.graph.vertices:
            lines.append(f"{row.g},{k},{v},{row.G[v]},{row.F[v]}")
    return "\n".join(lines) + "\n"
