"""One-dimensional quadrature families and tensor-product rules.

Levels start at 1. Every rule is normalized against a probability density,
so weights sum to one. Growth ``p(m)`` and exactness ``a(m)``:

=================  ==============  =====================  ======
family             p(m)            a(m)                   nested
=================  ==============  =====================  ======
GAUSS_LINEAR       m               2m - 1                 no
GAUSS_EXPONENTIAL  2^(m-1)         2^m - 1                no
CLENSHAW_CURTIS    1, 2^(m-1) + 1  p(m)                   yes
GAUSS_PATTERSON    2^m - 1         1, 5, 10, 22, 46, ...  yes
=================  ==============  =====================  ======

The Gauss-Patterson exactness values are the tabulated ones used throughout
the package; they are conservative (the rules are in fact exact to degree
3 * 2^(m-1) - 1 for m >= 2).
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .basis import PolynomialFamily, eval_basis_all, eval_basis_derivative

_PATTERSON_EXACTNESS = (1, 5, 10, 22, 46, 94, 190, 382)


class UnsupportedLevelError(ValueError):
    """Raised when a rule is requested beyond a family's supported levels."""


class QuadratureKind(enum.Enum):
    GAUSS_LINEAR = "gauss_linear"
    GAUSS_EXPONENTIAL = "gauss_exponential"
    CLENSHAW_CURTIS = "clenshaw_curtis"
    GAUSS_PATTERSON = "gauss_patterson"


@dataclass(frozen=True)
class QuadratureFamily:
    """A level-indexed family of 1D rules for one polynomial family.

    ``parity_fix`` only applies to ``GAUSS_LINEAR``: levels then step by two
    points (p(m) = 2m - 1) so each new level adds one even and one odd basis
    function on symmetric domains.
    """

    kind: QuadratureKind
    polynomial: PolynomialFamily = PolynomialFamily.LEGENDRE
    parity_fix: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", QuadratureKind(self.kind))
        object.__setattr__(self, "polynomial", PolynomialFamily.parse(self.polynomial))
        if self.kind in (QuadratureKind.CLENSHAW_CURTIS, QuadratureKind.GAUSS_PATTERSON):
            if self.polynomial is not PolynomialFamily.LEGENDRE:
                raise ValueError(f"{self.kind.value} rules are only available for the uniform weight")
        if self.parity_fix and self.kind is not QuadratureKind.GAUSS_LINEAR:
            raise ValueError("parity_fix only applies to gauss_linear")

    @property
    def nested(self) -> bool:
        return self.kind in (QuadratureKind.CLENSHAW_CURTIS, QuadratureKind.GAUSS_PATTERSON)

    @property
    def max_level(self) -> int:
        if self.kind is QuadratureKind.GAUSS_LINEAR:
            return 64 if self.parity_fix else 128
        if self.kind is QuadratureKind.CLENSHAW_CURTIS:
            return 9
        return 8

    def _check_level(self, m: int) -> None:
        if not isinstance(m, (int, np.integer)) or m < 1:
            raise UnsupportedLevelError(f"quadrature levels start at 1, got {m!r}")
        if m > self.max_level:
            raise UnsupportedLevelError(
                f"{self.kind.value} supports levels up to {self.max_level}, got {m}"
            )

    def growth(self, m: int) -> int:
        self._check_level(m)
        kind = self.kind
        if kind is QuadratureKind.GAUSS_LINEAR:
            return 2 * m - 1 if self.parity_fix else m
        if kind is QuadratureKind.GAUSS_EXPONENTIAL:
            return 2 ** (m - 1)
        if kind is QuadratureKind.CLENSHAW_CURTIS:
            return 1 if m == 1 else 2 ** (m - 1) + 1
        return 2**m - 1

    def exactness(self, m: int) -> int:
        self._check_level(m)
        if self.kind is QuadratureKind.GAUSS_PATTERSON:
            return _PATTERSON_EXACTNESS[m - 1]
        if self.kind is QuadratureKind.CLENSHAW_CURTIS:
            return self.growth(m)
        return 2 * self.growth(m) - 1

    def truncation(self, m: int) -> int:
        """Largest degree q with psi_q^2 integrated exactly: floor(a(m) / 2)."""
        return self.exactness(m) // 2

    def rule(self, m: int) -> "QuadratureRule1D":
        self._check_level(m)
        return _make_rule(self, int(m))

    def to_json(self) -> dict:
        out = {"quadrature": self.kind.value, "polynomial": self.polynomial.value}
        if self.parity_fix:
            out["parity_fix"] = True
        return out

    @classmethod
    def from_json(cls, obj) -> "QuadratureFamily":
        return cls(
            QuadratureKind(obj["quadrature"]),
            PolynomialFamily.parse(obj.get("polynomial", "legendre")),
            bool(obj.get("parity_fix", False)),
        )


@dataclass(frozen=True, eq=False)
class QuadratureRule1D:
    level: int
    points: np.ndarray
    weights: np.ndarray
    family: QuadratureFamily

    def __len__(self):
        return len(self.points)

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.points)))


def make_rule(family: QuadratureFamily, m: int) -> QuadratureRule1D:
    return family.rule(m)


def growth(family: QuadratureFamily, m: int) -> int:
    return family.growth(m)


def exactness(family: QuadratureFamily, m: int) -> int:
    return family.exactness(m)


@functools.lru_cache(maxsize=None)
def _make_rule(family: QuadratureFamily, m: int) -> QuadratureRule1D:
    n = family.growth(m)
    if family.kind in (QuadratureKind.GAUSS_LINEAR, QuadratureKind.GAUSS_EXPONENTIAL):
        x, w = gauss_rule(family.polynomial, n)
    elif family.kind is QuadratureKind.CLENSHAW_CURTIS:
        x, w = clenshaw_curtis_rule(n)
    else:
        x, w = _patterson_table()[m]
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule1D(m, x, w, family)


def _symmetrize(x: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    if len(x) % 2:
        x[len(x) // 2] = 0.0
    return x, w


@functools.lru_cache(maxsize=None)
def _gauss_cached(family: PolynomialFamily, n: int):
    diag, off = family.recurrence(n)
    if n == 1:
        x = np.zeros(1)
    else:
        x = eigh_tridiagonal(diag, off, eigvals_only=True)
        # one Newton step on psi_n tightens the eigenvalues
        p, dp = eval_basis_derivative(family, n, x)
        x = x - p / dp
    x = np.sort(x)
    # Christoffel form keeps small tail weights relatively accurate
    psi = eval_basis_all(family, n - 1, x)
    w = 1.0 / np.sum(psi * psi, axis=1)
    x, w = _symmetrize(x, w)
    w = w / np.sum(w)
    return x, w


def gauss_rule(family: PolynomialFamily, n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss rule for ``family``'s probability density (Jacobi-matrix eigenvalues)."""
    x, w = _gauss_cached(PolynomialFamily.parse(family), int(n))
    return x.copy(), w.copy()


def _cc_node(k: int, n: int) -> float:
    # -cos(pi k / n) evaluated from the reduced fraction so that nested levels
    # reproduce coarse nodes bitwise.
    g = math.gcd(k, n)
    k, n = k // g, n // g
    if 2 * k == n:
        return 0.0
    if 2 * k > n:
        return math.cos(math.pi * (n - k) / n)
    return -math.cos(math.pi * k / n)


def clenshaw_curtis_rule(p: int) -> tuple[np.ndarray, np.ndarray]:
    """p-point Clenshaw-Curtis rule on [-1, 1], weights normalized to sum 1."""
    if p == 1:
        return np.zeros(1), np.ones(1)
    n = p - 1
    x = np.array([_cc_node(k, n) for k in range(p)])
    theta = np.pi * np.arange(p) / n
    w = np.ones(p)
    for j in range(1, n // 2 + 1):
        b = 1.0 if 2 * j == n else 2.0
        w -= b * np.cos(2 * j * theta) / (4 * j * j - 1)
    w *= 2.0 / n
    w[0] *= 0.5
    w[-1] *= 0.5
    _, w = _symmetrize(x.copy(), w)
    return x, w / np.sum(w)


@functools.lru_cache(maxsize=1)
def _patterson_table() -> dict[int, tuple[np.ndarray, np.ndarray]]:
    text = resources.files("smolyak_pce").joinpath("data/gauss_patterson.txt").read_text()
    return parse_patterson_table(text)


def parse_patterson_table(text: str) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Parse the embedded table: ``level <m> points <p>`` headers, then ``point weight`` lines."""
    table: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    level = None
    pts: list[float] = []
    wts: list[float] = []

    def flush():
        if level is not None:
            if len(pts) != expected:
                raise ValueError(f"level {level}: expected {expected} points, found {len(pts)}")
            table[level] = (np.array(pts), np.array(wts))

    expected = 0
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        if tok[0] == "level":
            flush()
            level, expected = int(tok[1]), int(tok[3])
            pts, wts = [], []
        else:
            if len(tok) != 2:
                raise ValueError(f"line {lineno}: expected 'point weight', got {line!r}")
            pts.append(float(tok[0]))
            wts.append(float(tok[1]))
    flush()
    return table


@dataclass(frozen=True, eq=False)
class TensorQuadratureRule:
    """Full tensor grid. Points are ordered lexicographically, first dimension slowest."""

    levels: tuple[int, ...]
    rules: tuple[QuadratureRule1D, ...]
    points: np.ndarray
    weights: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(r) for r in self.rules)

    def __len__(self):
        return len(self.weights)


def tensor_rule(rules) -> TensorQuadratureRule:
    rules = tuple(rules)
    if not rules:
        raise ValueError("tensor_rule needs at least one dimension")
    grids = np.meshgrid(*[r.points for r in rules], indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=-1)
    weights = functools.reduce(np.multiply.outer, [r.weights for r in rules]).ravel()
    return TensorQuadratureRule(tuple(r.level for r in rules), rules, points, weights)


def tensor_rule_for(families, levels) -> TensorQuadratureRule:
    return _tensor_rule_cached(tuple(families), tuple(int(m) for m in levels))


@functools.lru_cache(maxsize=4096)
def _tensor_rule_cached(families, levels) -> TensorQuadratureRule:
    if len(families) != len(levels):
        raise ValueError("one quadrature family per dimension is required")
    return tensor_rule([fam.rule(m) for fam, m in zip(families, levels)])


def integrate(rule: TensorQuadratureRule, f, cache=None) -> float:
    """Weighted sum of ``f`` over the rule's points, reduced in point order."""
    if cache is not None:
        values = cache.evaluate_batch(f, rule.points)
    else:
        from .evalcache import evaluate_model

        values = evaluate_model(f, rule.points)
    return float(np.dot(rule.weights, values))


def grid_points(families, levels) -> np.ndarray:
    return tensor_rule_for(families, levels).points


def point_count(families, levels) -> int:
    return math.prod(f.growth(m) for f, m in zip(families, levels))


def all_levels(family: QuadratureFamily):
    return range(1, family.max_level + 1)
