"""Full-tensor pseudospectral approximation.

For quadrature levels ``m`` the operator returns the coefficients
``Q_m(f * Psi_j)`` for every degree index in the box ``j_i <= q_i`` with
``q_i = floor(a_i(m_i) / 2)``. With that truncation every product
``Psi_j * Psi_j'`` inside the box is integrated exactly, so the operator has
no internal aliasing and reproduces every polynomial of its range.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .basis import eval_basis_all
from .evalcache import evaluate
from .expansion import PolynomialExpansion
from .quadrature import QuadratureFamily, tensor_rule_for


@dataclass(frozen=True)
class TensorPseudospectralSpec:
    levels: tuple[int, ...]
    families: tuple[QuadratureFamily, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(int(m) for m in self.levels))
        object.__setattr__(self, "families", tuple(self.families))
        if len(self.levels) != len(self.families):
            raise ValueError("one quadrature family per dimension is required")
        for fam, m in zip(self.families, self.levels):
            fam.growth(m)  # validates the level

    @property
    def dim(self) -> int:
        return len(self.levels)

    @property
    def truncation(self) -> tuple[int, ...]:
        return tuple(fam.truncation(m) for fam, m in zip(self.families, self.levels))

    @property
    def exactness(self) -> tuple[int, ...]:
        return tuple(fam.exactness(m) for fam, m in zip(self.families, self.levels))

    @property
    def polynomials(self):
        return tuple(fam.polynomial for fam in self.families)

    def rule(self):
        return tensor_rule_for(self.families, self.levels)


def tensor_exact_degrees(spec: TensorPseudospectralSpec):
    """Predicate: monomial degree ``j`` lies in the rule's polynomial exact set."""
    a = spec.exactness
    return lambda j: all(ji <= ai for ji, ai in zip(j, a))


def tensor_halfexact_degrees(spec: TensorPseudospectralSpec):
    """Predicate: ``Psi_j^2`` is integrated exactly, i.e. ``j`` is in the operator's range."""
    q = spec.truncation
    return lambda j: all(ji <= qi for ji, qi in zip(j, q))


@functools.lru_cache(maxsize=8192)
def projection_matrix(family: QuadratureFamily, level: int, max_degree: int) -> np.ndarray:
    """``M[p, j] = w_p psi_j(x_p)`` for the level's 1D rule, shape ``(points, max_degree + 1)``."""
    rule = family.rule(level)
    mat = rule.weights[:, None] * eval_basis_all(family.polynomial, max_degree, rule.points)
    mat.setflags(write=False)
    return mat


def contract(values: np.ndarray, mats: Sequence[np.ndarray]) -> np.ndarray:
    """Apply one 1D projection matrix per leading axis of ``values``.

    ``values`` has shape ``(p_1, ..., p_d, *trailing)``; the result has shape
    ``(n_1, ..., n_d, *trailing)`` with ``n_i = mats[i].shape[1]``.
    """
    out = values
    for axis, mat in enumerate(mats):
        out = np.moveaxis(np.tensordot(mat, out, axes=([0], [axis])), 0, axis)
    return out


def tensor_coefficients(values: np.ndarray, families, levels, max_degrees=None) -> np.ndarray:
    """Coefficient tensor from grid values (point order as in the tensor rule).

    ``values`` is ``(N,)`` or ``(N, k)``; ``max_degrees`` defaults to the
    half-exact truncation of each dimension.
    """
    if max_degrees is None:
        max_degrees = [fam.truncation(m) for fam, m in zip(families, levels)]
    shape = tuple(fam.growth(m) for fam, m in zip(families, levels))
    values = np.asarray(values, dtype=float)
    grid = values.reshape(shape + values.shape[1:])
    mats = [projection_matrix(fam, m, int(q)) for fam, m, q in zip(families, levels, max_degrees)]
    return contract(grid, mats)


def box_indices(shape) -> list[tuple[int, ...]]:
    """All indices of an array of ``shape`` in C order."""
    return list(itertools.product(*[range(n) for n in shape]))


def tensor_pseudospectral(f, spec: TensorPseudospectralSpec, cache=None) -> PolynomialExpansion:
    """Full-tensor pseudospectral expansion of ``f``; model calls go through ``cache``."""
    rule = spec.rule()
    values = evaluate(f, rule.points, cache)
    coef = tensor_coefficients(values, spec.families, spec.levels)
    return PolynomialExpansion(spec.polynomials, dict(zip(box_indices(coef.shape), coef.ravel().tolist())))
