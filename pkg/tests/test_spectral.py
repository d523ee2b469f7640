from fractions import Fraction

import numpy as np
import pytest

from conftest import random_discount, random_irreducible
from ssact.spectral import (
    DiscountError,
    ReducibleMatrixError,
    SpectralError,
    check_discount,
    neumann_series,
    neumann_tail_bound,
    parse_discount,
    perron_frobenius,
    spectral_radius,
    von_neumann_matrix,
    von_neumann_radius,
)

F = Fraction


@pytest.mark.parametrize("exact", [False, True])
def test_one_by_one(exact):
    sp = perron_frobenius(np.array([[2]]), exact=exact)
    assert sp.rho == 2
    assert list(sp.m) == [1] and list(sp.m_tilde) == [1]


def test_periodic_two_cycle_exact():
    sp = perron_frobenius(np.array([[0, 1], [1, 0]]), exact=True)
    assert sp.exact and sp.rho == 1
    assert list(sp.m) == [F(1, 2), F(1, 2)]
    assert list(sp.m_tilde) == [1, 1]


def test_periodic_two_cycle_float():
    sp = perron_frobenius(np.array([[0, 1], [1, 0]]))
    assert sp.rho == pytest.approx(1, abs=1e-12)
    np.testing.assert_allclose(sp.m, [0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(sp.m_tilde, [1, 1], atol=1e-10)


def test_constant_row_sums():
    sp = perron_frobenius(np.array([[1, 1], [1, 1]]), exact=True)
    assert sp.rho == 2 and list(sp.m) == [F(1, 2), F(1, 2)]


def test_non_integer_radius_falls_back_to_float():
    sp = perron_frobenius(np.array([[1, 1], [1, 0]]), exact=True)
    assert not sp.exact
    assert sp.rho == pytest.approx((1 + 5 ** 0.5) / 2, abs=1e-12)


def test_rejects_bad_matrices():
    with pytest.raises(ReducibleMatrixError):
        perron_frobenius(np.array([[1, 1], [0, 1]]))
    with pytest.raises(SpectralError):
        perron_frobenius(np.array([[1, -1], [1, 1]]))


def test_von_neumann_examples():
    assert von_neumann_matrix(np.array([[2]]), F(1, 4)).tolist() == [[2]]
    R = von_neumann_matrix(np.array([[0, 1], [1, 0]]), F(1, 2))
    assert R.tolist() == [[F(4, 3), F(2, 3)], [F(2, 3), F(4, 3)]]


def test_von_neumann_radius_example():
    assert von_neumann_radius(F(1, 4), 2) == 2
    A = np.array([[2]])
    assert spectral_radius(von_neumann_matrix(A, 0.25)) == pytest.approx(2)


def test_discount_checks():
    check_discount(F(1, 4), 3)
    for d in (F(1, 2), F(0), F(-1, 3)):
        with pytest.raises(DiscountError):
            check_discount(d, 2)
    with pytest.raises(DiscountError, match="log rho"):
        check_discount(0.5, 2.0)
    assert parse_discount("1/4") == F(1, 4)
    assert parse_discount("0.25") == F(1, 4)
    with pytest.raises(DiscountError):
        parse_discount("one quarter")


def test_neumann_series_oracle_random(rng):
    for _ in range(25):
        A = random_irreducible(rng)
        sp = perron_frobenius(A)
        d = random_discount(rng, sp.rho)
        K = 40
        diff = np.abs(von_neumann_matrix(A, d, sp.rho) - neumann_series(A, d, K))
        assert diff.max() <= neumann_tail_bound(sp, d, K) * (1 + 1e-9) + 1e-12


def test_von_neumann_shares_eigenvector_random(rng):
    for _ in range(25):
        A = random_irreducible(rng)
        sp = perron_frobenius(A)
        d = random_discount(rng, sp.rho)
        R = von_neumann_matrix(A, d, sp.rho)
        assert np.all(R > 0)
        spr = perron_frobenius(R)
        assert spr.rho == pytest.approx(von_neumann_radius(d, sp.rho), rel=1e-9)
        np.testing.assert_allclose(spr.m, sp.m, atol=1e-10)


def test_left_eigenvector_normalization(rng):
    for _ in range(10):
        A = random_irreducible(rng)
        sp = perron_frobenius(A)
        assert sp.m_tilde @ sp.m == pytest.approx(1)
        np.testing.assert_allclose(A @ sp.m, sp.rho * sp.m, atol=1e-9)
        np.testing.assert_allclose(sp.m_tilde @ A, sp.rho * sp.m_tilde, atol=1e-8 * sp.m_tilde.max())
