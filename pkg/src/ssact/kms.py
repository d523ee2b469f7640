"""KMS states evaluated on spanning elements ``s_mu u_g s_nu^*``."""

from __future__ import annotations

from dataclasses import dataclass

from ssact.action import ClosureSet
from ssact.graph import Path
from ssact.spectral import SpectralData, check_discount
from ssact.trace import TraceVector, apply_chi, compute_Z, compute_cg, fixed_point_eigen

DEFAULT_CENSUS_DEPTH = 12


class ElementError(ValueError):
    pass


@dataclass(frozen=True)
class SpanningElement:
    """``s_mu u_g s_nu^*`` with ``s(mu) = t(g)`` and ``s(nu) = d(g)``; ``g`` is a class index."""

    mu: Path
    g: int
    nu: Path


def spanning_element(closure: ClosureSet, mu, g, nu) -> SpanningElement:
    """Build an element from paths or path strings; empty strings take their vertex from ``g``."""
    g = closure.class_of(g)
    graph = closure.graph
    if isinstance(mu, str):
        mu = graph.parse_path(mu, closure.terminus[g] if not mu.strip() else None)
    if isinstance(nu, str):
        nu = graph.parse_path(nu, closure.domain[g] if not nu.strip() else None)
    if mu.source != closure.terminus[g]:
        raise ElementError(f"s(mu) = {mu.source!r} but t(g) = {closure.terminus[g]!r}")
    if nu.source != closure.domain[g]:
        raise ElementError(f"s(nu) = {nu.source!r} but d(g) = {closure.domain[g]!r}")
    return SpanningElement(mu, g, nu)


def psi_eval(spectral: SpectralData, closure: ClosureSet, d, tau: TraceVector, elem: SpanningElement):
    """The KMS state built from ``tau`` at discount ``d``.

    Vanishes unless ``mu == nu``; then equals ``d^{|mu|} chi(tau)(g)``, the
    inner series over paths from ``s(mu) = d(g)`` being the resolvent row of ``g``.
    """
    check_discount(d, spectral.rho)
    if elem.mu != elem.nu:
        return 0
    return d ** len(elem.mu) * apply_chi(spectral, closure, d, tau).values[elem.g]


def psi_series(spectral: SpectralData, closure: ClosureSet, d, tau: TraceVector,
               elem: SpanningElement, K: int):
    """Depth-``K`` brute-force evaluation of :func:`psi_eval` by path enumeration."""
    if elem.mu != elem.nu:
        return 0
    counts, _ = closure.fixed_path_census(elem.g, K)
    inner = 0
    for k in range(K + 1):
        inner = inner + d ** k * sum(int(c) * tau.values[h] for h, c in enumerate(counts[k]) if c)
    return d ** len(elem.mu) * inner / compute_Z(spectral, closure, d, tau)


def critical_psi_eval(spectral: SpectralData, closure: ClosureSet, elem: SpanningElement,
                      depth: int = DEFAULT_CENSUS_DEPTH, source: str = "eigen",
                      theta: TraceVector | None = None):
    """The state at the critical inverse temperature ``log rho``.

    Equals ``rho^{-|mu|} c_g`` when ``mu == nu`` and ``d(g) = t(g) = s(mu)``, else 0.
    ``c_g`` is the fixed-point value (``source="eigen"``) or the path census at
    ``depth`` (``source="census"``).
    """
    g = elem.g
    if elem.mu != elem.nu:
        return 0
    if not (closure.domain[g] == closure.terminus[g] == elem.mu.source):
        return 0
    if source == "census":
        c = compute_cg(spectral, closure, g, depth).value
    else:
        if theta is None:
            theta = fixed_point_eigen(spectral, closure)
        c = theta.values[g]
    return c / spectral.rho ** len(elem.mu)
