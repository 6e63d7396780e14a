"""Orthonormal univariate polynomial families.

Both families are orthonormal with respect to a probability density:

- ``LEGENDRE``: uniform density 1/2 on [-1, 1], psi_n = sqrt(2n+1) P_n.
- ``HERMITE``: standard normal density on the real line, psi_n = He_n / sqrt(n!)
  (probabilists' Hermite polynomials).

Values are produced by the upward three-term recurrence written directly
for the orthonormal polynomials,

    x psi_n(x) = b_{n+1} psi_{n+1}(x) + a_n psi_n(x) + b_n psi_{n-1}(x),

with analytic recurrence coefficients (a_n = 0 for both symmetric families).
"""

from __future__ import annotations

import enum

import numpy as np

MAX_DEGREE = 256


class DomainError(ValueError):
    """Raised when a point lies outside the support of a bounded family."""


class PolynomialFamily(enum.Enum):
    LEGENDRE = "legendre"
    HERMITE = "hermite"

    @property
    def bounded(self) -> bool:
        return self is PolynomialFamily.LEGENDRE

    @property
    def domain(self) -> tuple[float, float]:
        if self is PolynomialFamily.LEGENDRE:
            return (-1.0, 1.0)
        return (-np.inf, np.inf)

    def recurrence(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Jacobi-matrix coefficients ``(a_0..a_{n-1}, b_1..b_{n-1})``."""
        k = np.arange(1, n, dtype=float)
        if self is PolynomialFamily.LEGENDRE:
            b = k / np.sqrt(4.0 * k * k - 1.0)
        else:
            b = np.sqrt(k)
        return np.zeros(n), b

    def density(self, x):
        x = np.asarray(x, dtype=float)
        if self is PolynomialFamily.LEGENDRE:
            return np.where(np.abs(x) <= 1.0, 0.5, 0.0)
        return np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)

    def moment(self, r: int) -> float:
        """E[X^r] under the family's probability density."""
        if r % 2:
            return 0.0
        if self is PolynomialFamily.LEGENDRE:
            return 1.0 / (r + 1)
        out = 1.0
        for k in range(r - 1, 0, -2):
            out *= k
        return out

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self is PolynomialFamily.LEGENDRE:
            return rng.uniform(-1.0, 1.0, n)
        return rng.standard_normal(n)

    @classmethod
    def parse(cls, value) -> "PolynomialFamily":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown polynomial family {value!r}") from None


def _coefficient(family: PolynomialFamily, n: int) -> float:
    # b_n for n >= 1
    if family is PolynomialFamily.LEGENDRE:
        return n / np.sqrt(4.0 * n * n - 1.0)
    return np.sqrt(float(n))


def _check(family: PolynomialFamily, degree: int, x: np.ndarray) -> None:
    if degree < 0:
        raise ValueError(f"degree must be nonnegative, got {degree}")
    if degree > MAX_DEGREE:
        raise ValueError(f"degree {degree} exceeds the supported maximum {MAX_DEGREE}")
    if family.bounded and x.size and (np.max(np.abs(x)) > 1.0 or np.isnan(x).any()):
        bad = x[~(np.abs(x) <= 1.0)].ravel()[0]
        raise DomainError(f"{family.value} polynomials are defined on [-1, 1], got x={bad!r}")


def eval_basis_all(family: PolynomialFamily, max_degree: int, x) -> np.ndarray:
    """Evaluate psi_0..psi_max_degree at ``x``.

    Parameters
    ----------
    family : PolynomialFamily
    max_degree : int
    x : float or ndarray
        Evaluation point(s).

    Returns
    -------
    ndarray
        Shape ``x.shape + (max_degree + 1,)``.
    """
    family = PolynomialFamily.parse(family)
    x = np.asarray(x, dtype=float)
    _check(family, max_degree, x)
    out = np.empty(x.shape + (max_degree + 1,))
    out[..., 0] = 1.0
    if max_degree == 0:
        return out
    b_prev = 0.0
    for n in range(max_degree):
        b_next = _coefficient(family, n + 1)
        prev = out[..., n - 1] if n > 0 else 0.0
        out[..., n + 1] = (x * out[..., n] - b_prev * prev) / b_next
        b_prev = b_next
    return out


def eval_basis(family: PolynomialFamily, degree: int, x):
    """Evaluate the orthonormal polynomial of the given degree at ``x``."""
    vals = eval_basis_all(family, degree, x)[..., degree]
    return float(vals) if vals.ndim == 0 else vals


def eval_basis_derivative(family: PolynomialFamily, degree: int, x):
    """psi_degree and its derivative at ``x`` (used to polish Gauss nodes)."""
    family = PolynomialFamily.parse(family)
    x = np.asarray(x, dtype=float)
    p_prev, p = np.zeros_like(x), np.ones_like(x)
    d_prev, d = np.zeros_like(x), np.zeros_like(x)
    b_prev = 0.0
    for n in range(degree):
        b_next = _coefficient(family, n + 1)
        p_new = (x * p - b_prev * p_prev) / b_next
        d_new = (p + x * d - b_prev * d_prev) / b_next
        p_prev, p, d_prev, d = p, p_new, d, d_new
        b_prev = b_next
    return p, d
