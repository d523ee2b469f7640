"""Perron-Frobenius data and the resolvent ``(I - dA)^{-1}`` of nonnegative matrices.

Matrices are numpy arrays.  In exact mode they are ``object`` arrays holding
:class:`fractions.Fraction`; rational linear algebra is delegated to sympy's
``DomainMatrix`` over QQ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from ssact import kernels
from ssact.graph import is_irreducible

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 200_000


class SpectralError(ValueError):
    pass


class ReducibleMatrixError(SpectralError):
    pass


class DiscountError(ValueError):
    """Discount outside ``(0, 1/rho)``, i.e. inverse temperature at or below critical."""


# --- exact helpers -----------------------------------------------------------


def is_exact(x) -> bool:
    if isinstance(x, np.ndarray):
        return x.dtype == object
    return isinstance(x, Rational)


def as_fraction_array(A) -> np.ndarray:
    A = np.asarray(A)
    out = np.empty(A.shape, dtype=object)
    for idx, val in np.ndenumerate(A):
        if isinstance(val, (np.integer, int)):
            out[idx] = Fraction(int(val))
        elif isinstance(val, (float, np.floating)):
            out[idx] = Fraction(float(val))
        else:
            out[idx] = Fraction(val)
    return out


def as_float_array(A) -> np.ndarray:
    A = np.asarray(A)
    if A.dtype == object:
        if any(isinstance(v, complex) for v in A.flat):
            return A.astype(complex)
        return A.astype(float)
    return A


def _to_domain(A: np.ndarray) -> DomainMatrix:
    rows = [[QQ(int(v.numerator), int(v.denominator)) for v in row] for row in A]
    return DomainMatrix(rows, A.shape, QQ)


def _from_domain(M: DomainMatrix) -> np.ndarray:
    rows = M.to_list()
    out = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            out[i, j] = Fraction(int(v.numerator), int(v.denominator))
    return out


def exact_inverse(A: np.ndarray) -> np.ndarray:
    return _from_domain(_to_domain(as_fraction_array(A)).inv())


def exact_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    b = as_fraction_array(np.asarray(b).reshape(-1, 1))
    sol = _to_domain(as_fraction_array(A)).lu_solve(_to_domain(b))
    return _from_domain(sol)[:, 0]


def exact_nullspace(A: np.ndarray) -> list[np.ndarray]:
    ns = _to_domain(as_fraction_array(A)).nullspace()
    if ns.shape[0] == 0:
        return []
    return list(_from_domain(ns))


def identity(n: int, exact: bool) -> np.ndarray:
    if exact:
        out = np.full((n, n), Fraction(0), dtype=object)
        for i in range(n):
            out[i, i] = Fraction(1)
        return out
    return np.eye(n)


def inverse(A: np.ndarray) -> np.ndarray:
    if is_exact(A):
        return exact_inverse(A)
    return np.linalg.inv(A)


# --- spectral data -----------------------------------------------------------


@dataclass(frozen=True)
class SpectralData:
    """Spectral radius with right (1-norm 1) and left (``m_tilde @ m == 1``) eigenvectors."""

    rho: float | Fraction
    m: np.ndarray
    m_tilde: np.ndarray
    matrix: np.ndarray
    exact: bool = False
    iterations: int = 0

    @property
    def condition(self) -> float:
        """``max m / min m``; bounds entries of ``A^k`` by ``condition * rho^k``."""
        m = np.asarray(self.m, dtype=float)
        return float(m.max() / m.min())


def spectral_radius(A) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(np.asarray(A, dtype=float)))))


def perron_frobenius(A, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                     exact: bool = False) -> SpectralData:
    """Perron-Frobenius data of an irreducible nonnegative matrix.

    Power iteration runs on ``A + I``, which is primitive whenever ``A`` is
    irreducible and has the same eigenvectors, so periodic matrices converge.
    With ``exact=True`` and an integral spectral radius the eigenvectors are
    recomputed as exact rationals; otherwise the float result is returned.
    """
    Af = np.asarray(as_float_array(np.asarray(A)), dtype=np.float64)
    n = Af.shape[0]
    if Af.ndim != 2 or Af.shape[1] != n:
        raise SpectralError("matrix must be square")
    if np.any(Af < 0):
        raise SpectralError("matrix must be nonnegative")
    if not is_irreducible(Af):
        raise ReducibleMatrixError("matrix is reducible")
    B = np.ascontiguousarray(Af + np.eye(n))
    x0 = np.full(n, 1.0 / n)
    lam, m, it_r, ok = kernels.power_iterate(B, x0, tol, max_iter)
    if not ok:
        raise SpectralError(f"power iteration did not converge in {max_iter} steps")
    rho = lam - 1.0
    m = np.asarray(m) / np.sum(m)
    # left vector: tighten so the residual survives rescaling by m_tilde . m
    left_tol = tol * max(rho, 1.0) / n
    lam_l, w, it_l, ok = kernels.power_iterate(np.ascontiguousarray(B.T), x0, left_tol, max_iter)
    if not ok:
        raise SpectralError(f"left power iteration did not converge in {max_iter} steps")
    w = np.asarray(w) / (np.asarray(w) @ m)
    data = SpectralData(float(rho), m, w, np.asarray(A), False, it_r + it_l)
    if exact:
        return _exact_refine(np.asarray(A), data)
    return data


def _exact_refine(A: np.ndarray, approx: SpectralData) -> SpectralData:
    # the spectral radius of an integer matrix is an algebraic integer, so it is
    # rational only when it is an integer
    Aq = as_fraction_array(A)
    if any(v.denominator != 1 for v in Aq.flat):
        return approx
    cand = Fraction(round(approx.rho))
    if abs(float(cand) - approx.rho) > 1e-6:
        return approx
    n = Aq.shape[0]
    shifted = Aq - cand * identity(n, True)
    right = exact_nullspace(shifted)
    left = exact_nullspace(shifted.T)
    if len(right) != 1 or len(left) != 1:
        return approx
    m = right[0] / sum(right[0])
    w = left[0] / (left[0] @ m)
    if any(v <= 0 for v in m) or any(v <= 0 for v in w):
        return approx
    return SpectralData(cand, m, w, A, True, approx.iterations)


def check_discount(d, rho) -> None:
    """Raise :class:`DiscountError` unless ``0 < d`` and ``d * rho < 1``."""
    if not d > 0:
        raise DiscountError(f"discount must be positive, got {d}")
    if is_exact(d) and is_exact(rho):
        sub = d * rho >= 1
    else:
        sub = float(d) * float(rho) >= 1.0
    if sub:
        raise DiscountError(
            f"discount {d} is not supercritical (d*rho = {float(d) * float(rho):.6g} >= 1); "
            "no KMS_beta states exist for beta below log rho(A_E)"
        )


def parse_discount(text: str) -> Fraction:
    """Parse ``"p/q"`` or a decimal string to an exact rational."""
    try:
        d = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DiscountError(f"cannot parse discount {text!r}") from exc
    return d


def discount_from_beta(beta: float) -> float:
    return math.exp(-beta)


def von_neumann_matrix(A, d, rho=None) -> np.ndarray:
    """``(I - dA)^{-1}`` by a dense solve; exact when ``A`` and ``d`` are rational."""
    A = np.asarray(A)
    if rho is None:
        rho = spectral_radius(A)
    check_discount(d, rho)
    n = A.shape[0]
    if is_exact(d):
        Aq = as_fraction_array(A)
        return exact_inverse(identity(n, True) - d * Aq)
    Af = np.asarray(as_float_array(A), dtype=float)
    return np.linalg.solve(np.eye(n) - float(d) * Af, np.eye(n))


def neumann_series(A, d, K: int) -> np.ndarray:
    """Truncated series ``sum_{k<=K} d^k A^k``; the oracle for :func:`von_neumann_matrix`."""
    A = np.asarray(A)
    exact = is_exact(d)
    Aw = as_fraction_array(A) if exact else np.asarray(as_float_array(A), dtype=float)
    n = A.shape[0]
    term = identity(n, exact)
    total = term.copy()
    for _ in range(K):
        term = (d * Aw) @ term
        total = total + term
    return total


def neumann_tail_bound(spec: SpectralData, d, K: int) -> float:
    """Entrywise bound on ``sum_{k>K} d^k A^k``.

    ``A^k m = rho^k m`` gives ``A^k[i, j] <= (m_i / m_j) rho^k``, hence the
    ``condition`` factor in front of the geometric tail.
    """
    q = float(d) * float(spec.rho)
    return spec.condition * q ** (K + 1) / (1.0 - q)


def von_neumann_radius(d, rho):
    """``rho((I - dA)^{-1}) = (1 - d rho)^{-1}``."""
    if is_exact(d) and is_exact(rho):
        return 1 / (1 - d * rho)
    return 1.0 / (1.0 - float(d) * float(rho))


def to_csv(A) -> str:
    return "\n".join(",".join(str(v) for v in row) for row in np.asarray(A)) + "\n"
