"""Smolyak quadrature and pseudospectral approximation over admissible level sets.

Both operators are the combination ``sum_k c_k L_k`` of full-tensor
operators at the level indices ``k`` of an admissible set, with the integer
coefficients from :func:`~smolyak_pce.multiindex.smolyak_coefficients`.
:func:`direct_quadrature` is the baseline that instead estimates every
coefficient of a chosen basis with one fixed (possibly sparse) rule.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .evalcache import evaluate
from .expansion import PolynomialExpansion
from .multiindex import MultiIndex, MultiIndexSet, smolyak_coefficients
from .quadrature import QuadratureFamily, TensorQuadratureRule, tensor_rule_for
from .tensorop import TensorPseudospectralSpec, box_indices, tensor_coefficients


@dataclass(frozen=True, eq=False)
class SmolyakSpec:
    """An admissible level set with one quadrature family per dimension."""

    levels: MultiIndexSet
    families: tuple[QuadratureFamily, ...]
    coefficients: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "families", tuple(self.families))
        if self.levels.dim != len(self.families):
            raise ValueError("one quadrature family per dimension is required")
        if self.levels.floor != 1:
            raise ValueError("Smolyak level sets use 1-based levels")
        for k in self.levels:
            for fam, m in zip(self.families, k):
                fam.growth(m)
        object.__setattr__(self, "coefficients", smolyak_coefficients(self.levels))

    @property
    def dim(self) -> int:
        return len(self.families)

    @property
    def polynomials(self):
        return tuple(f.polynomial for f in self.families)

    def tensor_spec(self, k) -> TensorPseudospectralSpec:
        return TensorPseudospectralSpec(tuple(k), self.families)

    def truncation(self, k) -> tuple[int, ...]:
        return tuple(f.truncation(m) for f, m in zip(self.families, k))

    def exactness(self, k) -> tuple[int, ...]:
        return tuple(f.exactness(m) for f, m in zip(self.families, k))

    def points(self) -> np.ndarray:
        """Distinct points of the sparse grid: the union of the grids with ``c_k != 0``."""
        seen: dict[tuple, None] = {}
        for k in self.coefficients:
            for p in tensor_rule_for(self.families, k).points.tolist():
                seen.setdefault(tuple(v + 0.0 for v in p))
        return np.array(list(seen), dtype=float).reshape(len(seen), self.dim)


def _in_box(j, box) -> bool:
    return all(a <= b for a, b in zip(j, box))


def _assemble(spec: SmolyakSpec, grid_values: Callable[[MultiIndex, np.ndarray], np.ndarray]):
    """Merge ``c_k``-weighted coefficient tensors; returns ``(keys, matrix)``.

    ``grid_values(k, points)`` returns ``(N,)`` or ``(N, n_out)`` values.
    """
    rows: dict[tuple, int] = {}
    parts = []
    for k, c in spec.coefficients.items():
        rule = tensor_rule_for(spec.families, k)
        vals = np.asarray(grid_values(k, rule.points), dtype=float)
        coef = tensor_coefficients(vals, spec.families, k)
        flat = coef.reshape(-1, *coef.shape[spec.dim:]) if vals.ndim > 1 else coef.reshape(-1)
        idx = [rows.setdefault(j, len(rows)) for j in box_indices(coef.shape[:spec.dim])]
        parts.append((c, np.asarray(idx), flat))
    n_out = parts[0][2].shape[1:] if parts else ()
    total = np.zeros((len(rows),) + n_out)
    for c, idx, flat in parts:
        # every box lists distinct indices, so fancy-index accumulation is safe
        total[idx] += c * flat
    return list(rows), total


def smolyak_pseudospectral(f, spec: SmolyakSpec, cache=None) -> PolynomialExpansion:
    """``sum_k c_k S_k(f)`` as a merged sparse coefficient map."""
    keys, total = _assemble(spec, lambda k, pts: evaluate(f, pts, cache))
    return PolynomialExpansion(spec.polynomials, dict(zip(keys, total.tolist())))


def smolyak_pseudospectral_matrix(f_multi, spec: SmolyakSpec):
    """Vector-valued variant: ``f_multi(points)`` returns ``(N, n_out)``.

    Returns ``(keys, coefficients)`` with ``coefficients`` of shape ``(len(keys), n_out)``.
    """
    return _assemble(spec, lambda k, pts: f_multi(pts))


def smolyak_quadrature(f, spec: SmolyakSpec, cache=None) -> float:
    total = 0.0
    for k, c in spec.coefficients.items():
        rule = tensor_rule_for(spec.families, k)
        total += c * float(np.dot(rule.weights, evaluate(f, rule.points, cache)))
    return total


def smolyak_range(spec: SmolyakSpec) -> MultiIndexSet:
    """Degree indices ``j`` with ``j <= q(k)`` for some ``k`` in the level set."""
    out: dict[tuple, None] = {}
    for k in spec.coefficients:  # boxes of the c_k != 0 indices cover all others
        q = spec.truncation(k)
        out.update(dict.fromkeys(itertools.product(*[range(v + 1) for v in q])))
    return MultiIndexSet(sorted(out), dim=spec.dim, floor=0)


def smolyak_exact_degrees(spec: SmolyakSpec):
    """Predicate for the union of constituent exact boxes ``j <= a(k)``."""
    boxes = _maximal([spec.exactness(k) for k in spec.levels])
    return lambda j: any(_in_box(j, b) for b in boxes)


def _maximal(boxes):
    boxes = sorted(set(boxes), reverse=True)
    out = []
    for b in boxes:
        if not any(_in_box(b, o) for o in out):
            out.append(b)
    return out


def _components(Q):
    """``[(c, families, levels), ...]`` for a Smolyak spec or a single tensor rule."""
    if isinstance(Q, SmolyakSpec):
        return [(c, Q.families, k) for k, c in Q.coefficients.items()]
    if isinstance(Q, TensorPseudospectralSpec):
        return [(1, Q.families, Q.levels)]
    if isinstance(Q, TensorQuadratureRule):
        return [(1, tuple(r.family for r in Q.rules), Q.levels)]
    raise TypeError(f"unsupported quadrature description {type(Q).__name__}")


def exact_degrees(Q):
    """Polynomial exact-set predicate of a Smolyak spec or tensor rule."""
    if isinstance(Q, SmolyakSpec):
        return smolyak_exact_degrees(Q)
    (_, fams, levels), = _components(Q)
    a = tuple(f.exactness(m) for f, m in zip(fams, levels))
    return lambda j: _in_box(j, a)


def direct_quadrature(f, basis: Iterable[MultiIndex], Q, cache=None) -> PolynomialExpansion:
    """Estimate every coefficient ``Q(f * Psi_j)``, ``j`` in ``basis``, with one fixed rule ``Q``."""
    J = [tuple(j) for j in basis]
    comps = _components(Q)
    fams = comps[0][1]
    if not J:
        return PolynomialExpansion([fm.polynomial for fm in fams])
    jarr = np.array(J)
    maxdeg = jarr.max(axis=0)
    total = np.zeros(len(J))
    for c, families, levels in comps:
        rule = tensor_rule_for(families, levels)
        vals = evaluate(f, rule.points, cache)
        coef = tensor_coefficients(vals, families, levels, max_degrees=maxdeg)
        total += c * coef[tuple(jarr.T)]
    return PolynomialExpansion([fm.polynomial for fm in fams], dict(zip(J, total.tolist())))


def aliasing_report(basis: Iterable[MultiIndex], Q, method: str = "direct",
                    external: Iterable[MultiIndex] = ()) -> list[tuple[MultiIndex, MultiIndex]]:
    """Ordered pairs ``(j, j')`` that risk aliasing ``Psi_j'`` onto coefficient ``j``.

    ``method="direct"`` lists every pair with ``j`` in ``basis`` and ``j'`` in
    ``basis`` or ``external`` whose product degree ``j + j'`` falls outside the
    polynomial exact set of ``Q``.

    ``method="smolyak"`` requires ``Q`` to be a :class:`SmolyakSpec` and
    ``basis`` its range. Internal pairs never alias; an external ``j'`` is
    listed only if ``j'_i >= j_i`` in every dimension and no level index ``k``
    has both ``j <= q(k)`` and ``j + j' <= a(k)``.
    """
    J = [tuple(j) for j in basis]
    ext = [tuple(j) for j in external]
    if method == "direct":
        exact = exact_degrees(Q)
        partners = J + [j for j in ext if j not in set(J)]
        return [(j, jp) for j in J for jp in partners
                if not exact(tuple(a + b for a, b in zip(j, jp)))]
    if method != "smolyak":
        raise ValueError(f"unknown method {method!r}")
    if not isinstance(Q, SmolyakSpec):
        raise TypeError("the smolyak aliasing report needs a SmolyakSpec")
    boxes = [(Q.truncation(k), Q.exactness(k)) for k in Q.levels]
    inside = set(J)
    out = []
    for j in J:
        for jp in ext:
            if jp in inside:
                continue
            if any(b < a for a, b in zip(j, jp)):
                continue  # orthogonality in some dimension is resolved by every rule
            s = tuple(a + b for a, b in zip(j, jp))
            if any(_in_box(j, q) and _in_box(s, a) for q, a in boxes):
                continue
            out.append((j, jp))
    return out

