"""Trace vectors on a closure, the trace map ``chi``, its iteration and fixed point.

A trace vector stores one value per closure class.  With restriction matrix
``M`` and discount ``d = e^{-beta}``, the map is

    chi(tau) = Z(tau)^{-1} (I - d M)^{-1} tau,

where ``Z(tau) = ||(I - dA)^{-1} x||_1`` and ``x`` is the restriction of ``tau``
to the unit classes.  Exact mode (``Fraction`` values, rational discount and
integral spectral radius) runs the same formulas in rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from graphlib import CycleError, TopologicalSorter
from typing import Mapping

import numpy as np

from ssact.action import ClosureSet
from ssact.graph import enumerate_paths, is_strongly_connected
from ssact.spectral import (
    SpectralData,
    as_fraction_array,
    check_discount,
    exact_solve,
    identity,
    inverse,
    is_exact,
    von_neumann_matrix,
    von_neumann_radius,
)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


class FixedPointError(RuntimeError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, report: "IterationReport"):
        super().__init__(message)
        self.report = report


@dataclass
class TraceVector:
    closure: ClosureSet
    values: np.ndarray

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    @property
    def x(self) -> np.ndarray:
        """Values on the unit classes, in vertex order."""
        return self.values[self.closure.unit_indices]

    def __getitem__(self, item):
        return self.values[self.closure.class_of(item)]

    def __len__(self) -> int:
        return len(self.values)

    def as_dict(self) -> dict:
        return dict(zip(self.closure.keys, self.values))

    def violations(self, tol: float = 1e-12) -> list[str]:
        """Checkable trace constraints that fail (empty when the vector is valid)."""
        cl = self.closure
        vals = self.values
        out = []
        x = self.x
        total = sum(x)
        if abs(total - 1) > tol:
            out.append(f"unit values sum to {total}, not 1")
        for v, xv in zip(cl.graph.vertices, x):
            if _imag(xv) > tol or _real(xv) < -tol:
                out.append(f"unit value at {v} is {xv}, not nonnegative")
        for i, key in enumerate(cl.keys):
            val = vals[i]
            if cl.domain[i] != cl.terminus[i] and abs(val) > tol:
                out.append(f"{key} has d != t but value {val}")
            j = cl.inverse[i]
            if abs(vals[j] - np.conj(val)) > tol:
                out.append(f"value at {cl.keys[j]} is not the conjugate of the value at {key}")
            xd = _real(vals[cl.unit_of[cl.domain[i]]])
            xt = _real(vals[cl.unit_of[cl.terminus[i]]])
            if abs(val) > math.sqrt(max(float(xd * xt), 0.0)) + tol:
                out.append(f"|tau({key})| = {abs(val)} exceeds the Cauchy-Schwarz bound")
        return out

    def check(self, tol: float = 1e-12) -> "TraceVector":
        problems = self.violations(tol)
        if problems:
            raise ValueError("; ".join(problems))
        return self


def _real(z):
    return z.real if isinstance(z, (complex, np.complexfloating)) else z


def _imag(z):
    return abs(z.imag) if isinstance(z, (complex, np.complexfloating)) else 0


def trace_from_mapping(closure: ClosureSet, mapping: Mapping, exact: bool = False) -> TraceVector:
    """Trace vector from ``{class key or word: value}``.

    Missing classes default to 0 and missing units to ``1/|E^0|``.
    """
    n = len(closure)
    nv = closure.graph.num_vertices
    if exact:
        vals = np.array([Fraction(0)] * n, dtype=object)
        for u in closure.unit_indices:
            vals[u] = Fraction(1, nv)
    else:
        complex_input = any(isinstance(v, complex) for v in mapping.values())
        vals = np.zeros(n, dtype=complex if complex_input else float)
        vals[closure.unit_indices] = 1.0 / nv
    for key, val in mapping.items():
        i = closure.class_of(key)
        vals[i] = Fraction(val) if exact else val
    return TraceVector(closure, vals).check(1e-9)


def random_trace(closure: ClosureSet, rng: np.random.Generator, exact: bool = False,
                 complex_values: bool = True) -> TraceVector:
    """A random vector satisfying every checkable trace constraint."""
    cl = closure
    n = len(cl)
    units = cl.unit_indices
    if exact:
        raw = [Fraction(int(k) + 1) for k in rng.integers(0, 8, len(units))]
        x = [r / sum(raw) for r in raw]
        vals = np.array([Fraction(0)] * n, dtype=object)
    else:
        x = rng.dirichlet(np.ones(len(units)))
        vals = np.zeros(n, dtype=complex if complex_values else float)
    for u, xv in zip(units, x):
        vals[u] = xv
    done = set(units)
    for i in range(n):
        if i in done or cl.domain[i] != cl.terminus[i]:
            continue
        j = cl.inverse[i]
        bound = vals[cl.unit_of[cl.domain[i]]]
        if exact:
            val = bound * Fraction(int(rng.integers(-8, 9)), 8)
        elif i == j or not complex_values:
            val = float(np.real(bound)) * rng.uniform(-1, 1)
        else:
            val = float(np.real(bound)) * rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        vals[i] = val
        vals[j] = np.conj(val) if not exact else val
        done.update((i, j))
    return TraceVector(cl, vals)


# --- the map chi -------------------------------------------------------------


def _matrix(M: np.ndarray, exact: bool) -> np.ndarray:
    return as_fraction_array(M) if exact else np.asarray(M, dtype=float)


def closure_resolvent(closure: ClosureSet, d) -> np.ndarray:
    """``(I - dM)^{-1}`` for the restriction matrix, cached on the closure."""
    cache = closure.__dict__.setdefault("_resolvent_cache", {})
    key = (type(d).__name__, d)
    if key not in cache:
        exact = is_exact(d)
        n = len(closure)
        try:
            cache[key] = inverse(identity(n, exact) - d * _matrix(closure.M, exact))
        except (np.linalg.LinAlgError, ZeroDivisionError) as exc:
            raise FixedPointError("I - dM is singular: internal consistency failure") from exc
    return cache[key]


def _vn(spectral: SpectralData, d) -> np.ndarray:
    return von_neumann_matrix(spectral.matrix, d, rho=spectral.rho)


def compute_Z(spectral: SpectralData, closure: ClosureSet, d, tau: TraceVector):
    """``Z = sum_k d^k sum_{mu in E^k} tau(u_{s(mu)}) = ||(I - dA)^{-1} x||_1``."""
    check_discount(d, spectral.rho)
    x = tau.x
    if not tau.exact:
        x = np.real(np.asarray(x, dtype=complex))
    return sum(_vn(spectral, d) @ x)


def compute_N(d, Z):
    """``N = (1 - 1/Z) / d``; equals the spectral radius at the fixed point."""
    return (1 - 1 / Z) / d


def apply_chi(spectral: SpectralData, closure: ClosureSet, d, tau: TraceVector) -> TraceVector:
    check_discount(d, spectral.rho)
    R = closure_resolvent(closure, d)
    y = R @ tau.values
    Z = sum(y[closure.unit_indices])
    if not tau.exact:
        Z = float(np.real(Z))
    return TraceVector(closure, y / Z)


@dataclass
class IterationReport:
    """Iterates ``tau_n``, their ``Z`` values and per-class ``|tau_n - theta|``."""

    traces: list[TraceVector]
    Z: list
    deltas: list[np.ndarray]
    converged: bool
    theta: TraceVector | None
    rho_vn: float | Fraction
    against_fixed_point: bool = True
    ratio: float | None = field(default=None)

    @property
    def steps(self) -> int:
        return len(self.traces) - 1

    @property
    def sup_deltas(self) -> list:
        return [max(dl) if len(dl) else 0 for dl in self.deltas]

    def to_csv(self) -> str:
        keys = self.traces[0].closure.keys
        lines = ["step,class,value,delta,Z"]
        for n, (tau, dl, z) in enumerate(zip(self.traces, self.deltas, self.Z)):
            for key, val, delta in zip(keys, tau.values, dl):
                lines.append(f"{n},{key},{fmt(val)},{fmt(delta)},{fmt(z)}")
        return "\n".join(lines) + "\n"


def fmt(value) -> str:
    """15 significant digits in float mode, exact rationals otherwise."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (complex, np.complexfloating)):
        if value.imag == 0:
            return format(value.real, ".15g")
        return format(complex(value), ".15g")
    return format(float(value), ".15g")


def geometric_ratio(seq) -> float | None:
    """Least-squares ratio of the positive tail of a decaying sequence."""
    pts = [(n, float(v)) for n, v in enumerate(seq) if float(v) > 0]
    if len(pts) < 3:
        return None
    pts = pts[len(pts) // 2:] if len(pts) >= 6 else pts
    n = np.array([p[0] for p in pts], dtype=float)
    y = np.array([_log(p[1]) for p in pts])
    slope = np.polyfit(n, y, 1)[0]
    return float(math.exp(slope))


def _log(v) -> float:
    if isinstance(v, Fraction):
        return math.log(v.numerator) - math.log(v.denominator)
    return math.log(v)


def iterate_chi(spectral: SpectralData, closure: ClosureSet, d, tau0: TraceVector,
                tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                theta: TraceVector | None = None, steps: int | None = None) -> IterationReport:
    """Iterate ``chi`` from ``tau0``.

    Stops once ``sup_g |tau_n(g) - theta(g)| < tol`` and ``|Z_n - rho_vN| < tol``.
    ``theta`` defaults to :func:`fixed_point_eigen` on strongly connected graphs;
    otherwise successive iterates are compared.  With ``steps`` the iteration
    runs exactly that many steps and never raises.
    """
    check_discount(d, spectral.rho)
    against = True
    if theta is None:
        if is_strongly_connected(closure.graph):
            theta = fixed_point_eigen(spectral, closure)
        else:
            against = False
    rho_vn = von_neumann_radius(d, spectral.rho)
    tau = tau0
    traces = [tau]
    Zs = [compute_Z(spectral, closure, d, tau)]
    deltas = [np.abs(tau.values - theta.values) if against else np.zeros(len(tau))]

    def done() -> bool:
        if steps is not None:
            return len(traces) > steps
        small = max(deltas[-1]) < tol if against else (len(traces) > 1 and max(deltas[-1]) < tol)
        return small and abs(Zs[-1] - rho_vn) < tol

    converged = done()
    limit = steps if steps is not None else max_iter
    while not converged and len(traces) <= limit:
        nxt = apply_chi(spectral, closure, d, tau)
        traces.append(nxt)
        Zs.append(compute_Z(spectral, closure, d, nxt))
        ref = theta.values if against else tau.values
        deltas.append(np.abs(nxt.values - ref))
        tau = nxt
        converged = done()
    report = IterationReport(traces, Zs, deltas, converged, theta, rho_vn, against)
    report.ratio = geometric_ratio(report.sup_deltas)
    if steps is not None:
        report.converged = max(deltas[-1]) < tol
        return report
    if not converged:
        raise ConvergenceError(
            f"no convergence after {max_iter} steps (last delta {fmt(max(deltas[-1]))})", report
        )
    return report


# --- the fixed point ---------------------------------------------------------


def fixed_point_eigen(spectral: SpectralData, closure: ClosureSet) -> TraceVector:
    """The fixed point ``theta``: ``M theta = rho theta`` with ``theta`` on units equal to ``m``.

    Non-unit classes satisfy ``(rho I - M_nn) theta_n = M_nu m``; this is solved by
    back-substitution when the restriction digraph off the units is acyclic, and by
    a dense solve otherwise.
    """
    if not is_strongly_connected(closure.graph):
        raise FixedPointError("graph is not strongly connected; no fixed-point claim is available")
    exact = spectral.exact
    units = closure.unit_indices
    non = [i for i in range(len(closure)) if i not in set(units)]
    M = _matrix(closure.M, exact)
    rho = spectral.rho
    theta = np.array([Fraction(0)] * len(closure), dtype=object) if exact else np.zeros(len(closure))
    theta[units] = spectral.m
    if non:
        rhs = M[np.ix_(non, units)] @ np.asarray(spectral.m)
        Mnn = M[np.ix_(non, non)]
        pos = {g: k for k, g in enumerate(non)}
        sorter = TopologicalSorter({g: [h for h in non if Mnn[pos[g], pos[h]] != 0] for g in non})
        try:
            order = list(sorter.static_order())  # dependencies first
        except CycleError:
            order = None
        if order is not None:
            for g in order:
                acc = rhs[pos[g]]
                for h in non:
                    if Mnn[pos[g], pos[h]] != 0:
                        acc = acc + Mnn[pos[g], pos[h]] * theta[h]
                theta[g] = acc / rho
        else:
            lhs = rho * identity(len(non), exact) - Mnn
            try:
                sol = exact_solve(lhs, rhs) if exact else np.linalg.solve(lhs, rhs)
            except (np.linalg.LinAlgError, ZeroDivisionError, ValueError) as exc:
                raise FixedPointError("constrained fixed-point system is singular") from exc
            theta[non] = sol
    return TraceVector(closure, theta)


@dataclass(frozen=True)
class CensusValue:
    """Census ``rho^{-n} sum_v |{mu in E^n : g.mu = mu, g|_mu = v}| m_v`` at the last depths."""

    value: float | Fraction
    spread: float | Fraction
    values: tuple


def _matrix_powers_row(M: np.ndarray, g: int, depth: int) -> list[np.ndarray]:
    """Rows ``M^n[g]`` for ``n = 0..depth`` in exact integer arithmetic."""
    Mo = np.asarray(M).astype(object)
    row = np.array([0] * M.shape[0], dtype=object)
    row[g] = 1
    rows = [row]
    for _ in range(depth):
        row = row @ Mo
        rows.append(row)
    return rows


def compute_cg(spectral: SpectralData, closure: ClosureSet, g, depth: int,
               method: str = "transfer") -> CensusValue:
    """Census value of ``g`` at ``n = depth`` with the spread over the last three depths.

    ``method="enumerate"`` counts fixed paths by brute-force enumeration instead
    of powers of ``M``.
    """
    g = closure.class_of(g)
    if closure.domain[g] != closure.terminus[g]:
        raise ValueError(f"{closure.keys[g]} has d != t")
    if depth > closure.graph.max_depth:
        raise ValueError(f"depth {depth} exceeds enumeration guard {closure.graph.max_depth}")
    units = closure.unit_indices
    if method == "enumerate":
        counts, _ = closure.fixed_path_census(g, depth)
        rows = [counts[n].astype(object) for n in range(depth + 1)]
    else:
        rows = _matrix_powers_row(closure.M, g, depth)
    rho = spectral.rho
    m = spectral.m
    vals = []
    for n in range(max(depth - 2, 1), depth + 1):
        weighted = sum(rows[n][u] * m[k] for k, u in enumerate(units))
        vals.append(weighted / rho ** n)
    if not spectral.exact:
        vals = [float(v) for v in vals]
    return CensusValue(vals[-1], max(vals) - min(vals), tuple(vals))


@dataclass(frozen=True)
class RecursionReport:
    max_matrix: float
    max_bruteforce: float
    matrix_matches_bruteforce: bool
    ok: bool


def verify_recursive(closure: ClosureSet, spectral: SpectralData, theta: TraceVector,
                     n_max: int = 4, tol: float = 1e-9) -> RecursionReport:
    """Check ``rho^n theta(g) = sum_{g.mu = mu, |mu| = n} theta(g|_mu)`` for ``n <= n_max``.

    The right side is computed twice: as ``M^n theta`` and by enumerating paths.
    """
    rho = spectral.rho
    vals = theta.values
    worst_m = 0.0
    worst_b = 0.0
    same = True
    censuses = [closure.fixed_path_census(g, n_max)[0] for g in range(len(closure))]
    Mo = np.asarray(closure.M).astype(object)
    power = identity(len(closure), False).astype(int).astype(object)
    for n in range(1, n_max + 1):
        power = power @ Mo
        lhs = rho ** n * vals
        by_matrix = power @ vals
        for g in range(len(closure)):
            if any(int(power[g, h]) != int(censuses[g][n, h]) for h in range(len(closure))):
                same = False
            by_paths = sum(int(censuses[g][n, h]) * vals[h] for h in range(len(closure)))
            worst_m = max(worst_m, float(abs(lhs[g] - by_matrix[g])))
            worst_b = max(worst_b, float(abs(lhs[g] - by_paths)))
    return RecursionReport(worst_m, worst_b, same, max(worst_m, worst_b) <= tol and same)


def vertex_trajectory(spectral: SpectralData, d, x0, n: int) -> list[np.ndarray]:
    """``x_k = A_vN^k x0 / ||A_vN^k x0||_1`` for ``k = 0..n``."""
    x0 = np.asarray(x0)
    if x0.dtype != object and (np.any(x0 < 0) or abs(x0.sum() - 1) > 1e-12):
        raise ValueError("initial vertex vector must be nonnegative with 1-norm 1")
    if x0.dtype == object and (any(v < 0 for v in x0) or sum(x0) != 1):
        raise ValueError("initial vertex vector must be nonnegative with 1-norm 1")
    A_vn = _vn(spectral, d)
    out = [x0]
    y = x0
    for _ in range(n):
        y = A_vn @ y
        out.append(y / sum(y))
    return out


# --- brute-force series oracles ----------------------------------------------


def z_series(spectral: SpectralData, closure: ClosureSet, d, tau: TraceVector, K: int):
    """``Z`` truncated at depth ``K`` by enumerating ``E^k``, with a certified tail bound."""
    graph = closure.graph
    x = dict(zip(graph.vertices, tau.x))
    total = 0
    for k in range(K + 1):
        total = total + d ** k * sum(x[mu.source] for mu in enumerate_paths(graph, None, k))
    q = float(d) * float(spectral.rho)
    tail = q ** (K + 1) / (1 - q) / float(np.min(np.asarray(spectral.m, dtype=float)))
    return total, tail


def chi_series(spectral: SpectralData, closure: ClosureSet, d, tau: TraceVector, K: int):
    """Unnormalized ``chi`` series truncated at depth ``K`` by path enumeration.

    Returns ``(S, tails)`` with ``S[g] = sum_{k<=K} d^k sum_{g.mu = mu} tau(g|_mu)``
    and ``|Z chi(tau)(g) - S[g]| <= tails[g]`` for valid ``tau``.
    """
    n = len(closure)
    S = np.array([0] * n, dtype=object) if tau.exact else np.zeros(n, dtype=tau.values.dtype)
    for g in range(n):
        counts, _ = closure.fixed_path_census(g, K)
        acc = 0
        for k in range(K + 1):
            acc = acc + d ** k * sum(int(c) * tau.values[h] for h, c in enumerate(counts[k]) if c)
        S[g] = acc
    q = float(d) * float(spectral.rho)
    m = np.asarray(spectral.m, dtype=float)
    vix = closure.graph.vertex_index
    tails = np.array([q ** (K + 1) / (1 - q) * m[vix(dv)] / m.min() for dv in closure.domain])
    return S, tails
