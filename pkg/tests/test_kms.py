from fractions import Fraction

import pytest

from conftest import CORPUS, setup_for
from ssact.kms import ElementError, critical_psi_eval, psi_eval, psi_series, spanning_element
from ssact.spectral import DiscountError
from ssact.trace import fixed_point_eigen, random_trace, trace_from_mapping
from ssact.graph import enumerate_paths

F = Fraction


def test_off_diagonal_vanishes(partial):
    tau = trace_from_mapping(partial.cl, {}, exact=True)
    elem = spanning_element(partial.cl, "0", "c", "1")
    assert psi_eval(partial.sp, partial.cl, F(1, 4), tau, elem) == 0
    assert critical_psi_eval(partial.sp, partial.cl, elem) == 0


def test_unit_state_is_normalized(odometer):
    tau = trace_from_mapping(odometer.cl, {}, exact=True)
    elem = spanning_element(odometer.cl, "", "id", "")
    assert psi_eval(odometer.sp, odometer.cl, F(1, 4), tau, elem) == 1


def test_single_edge_projection(odometer):
    tau = trace_from_mapping(odometer.cl, {}, exact=True)
    elem = spanning_element(odometer.cl, "0", "id", "0")
    assert psi_eval(odometer.sp, odometer.cl, F(1, 4), tau, elem) == F(1, 4)


def test_critical_examples(partial):
    elem = spanning_element(partial.cl, "0", "c", "0")
    assert critical_psi_eval(partial.sp, partial.cl, elem) == F(1, 4)
    assert critical_psi_eval(partial.sp, partial.cl, elem, source="census") == F(1, 4)
    s = setup_for("twovertex")
    for v, mv in zip(s.graph.vertices, s.sp.m):
        e = spanning_element(s.cl, "", f"id_{v}", "")
        assert critical_psi_eval(s.sp, s.cl, e) == mv


def test_element_composability(partial):
    s = setup_for("twovertex")
    with pytest.raises(ElementError):
        spanning_element(s.cl, "e1", "g", "")
    with pytest.raises(ValueError):
        spanning_element(partial.cl, "2", "c", "")


def test_subcritical_discount_rejected(partial):
    tau = trace_from_mapping(partial.cl, {}, exact=True)
    elem = spanning_element(partial.cl, "", "c", "")
    with pytest.raises(DiscountError):
        psi_eval(partial.sp, partial.cl, F(1, 2), tau, elem)


@pytest.mark.parametrize("name", CORPUS)
def test_psi_matches_series(name, rng):
    s = setup_for(name)
    tau = random_trace(s.cl, rng, exact=True)
    K = 10
    q = float(s.d * s.sp.rho)
    for g in range(len(s.cl)):
        paths = enumerate_paths(s.graph, None, 1)
        mu = next((p for p in paths if p.source == s.cl.terminus[g]), None)
        if mu is None:
            continue
        elem = spanning_element(s.cl, mu, g, mu if s.cl.domain[g] == s.cl.terminus[g] else "")
        exact = psi_eval(s.sp, s.cl, s.d, tau, elem)
        approx = psi_series(s.sp, s.cl, s.d, tau, elem, K)
        m = [float(v) for v in s.sp.m]
        tail = q ** (K + 1) / (1 - q) * max(m) / min(m)
        assert abs(float(exact - approx)) <= tail


@pytest.mark.parametrize("name", CORPUS)
def test_critical_projection_sums(name):
    s = setup_for(name)
    theta = fixed_point_eigen(s.sp, s.cl)
    for n in range(4):
        total = 0
        for mu in enumerate_paths(s.graph, None, n):
            elem = spanning_element(s.cl, mu, f"id_{mu.source}", mu)
            total += critical_psi_eval(s.sp, s.cl, elem, theta=theta)
        assert total == 1
