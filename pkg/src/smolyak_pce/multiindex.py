"""Multi-index algebra for Smolyak constructions.

Two index spaces appear in the package and are kept apart by convention:

* level indices, 1-based (the minimal quadrature level is 1), and
* degree indices, 0-based (psi_0 is the constant).

A :class:`MultiIndexSet` records its ``floor`` (1 for level sets, 0 for degree
sets); backward neighbors below the floor do not exist.
"""

from __future__ import annotations

import itertools
import json
from typing import Iterable, Iterator

MultiIndex = tuple[int, ...]


def forward_neighbors(k: MultiIndex) -> list[MultiIndex]:
    k = tuple(k)
    return [k[:i] + (k[i] + 1,) + k[i + 1:] for i in range(len(k))]


def backward_neighbors(k: MultiIndex, floor: int = 0) -> list[MultiIndex]:
    k = tuple(k)
    return [k[:i] + (k[i] - 1,) + k[i + 1:] for i in range(len(k)) if k[i] - 1 >= floor]


class MultiIndexSet:
    """Finite, immutable set of equal-length multi-indices.

    Membership is O(1); iteration follows insertion order. Constructors that
    enumerate (``total_order_set``, ``full_tensor_set``, ``from_iterable`` with
    ``sort=True``) insert in lexicographic order.
    """

    __slots__ = ("dim", "floor", "_members")

    def __init__(self, indices: Iterable[MultiIndex] = (), dim: int | None = None,
                 floor: int = 1, sort: bool = False):
        members = dict.fromkeys(tuple(int(v) for v in k) for k in indices)
        if sort:
            members = dict.fromkeys(sorted(members))
        if dim is None:
            if not members:
                raise ValueError("dimension of an empty MultiIndexSet must be given")
            dim = len(next(iter(members)))
        for k in members:
            if len(k) != dim:
                raise ValueError(f"multi-index {k} does not have dimension {dim}")
            if min(k) < floor:
                raise ValueError(f"multi-index {k} has an entry below the floor {floor}")
        self.dim = dim
        self.floor = floor
        self._members = members

    def __contains__(self, k) -> bool:
        return tuple(k) in self._members

    def __iter__(self) -> Iterator[MultiIndex]:
        return iter(self._members)

    def __len__(self) -> int:
        return len(self._members)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiIndexSet):
            return NotImplemented
        return self.dim == other.dim and set(self._members) == set(other._members)

    def __hash__(self):
        return hash((self.dim, frozenset(self._members)))

    def __repr__(self) -> str:
        body = ", ".join(str(k) for k in itertools.islice(self, 8))
        more = ", ..." if len(self) > 8 else ""
        return f"MultiIndexSet(dim={self.dim}, floor={self.floor}, {{{body}{more}}})"

    def union(self, indices: Iterable[MultiIndex]) -> "MultiIndexSet":
        return MultiIndexSet(itertools.chain(self, indices), self.dim, self.floor)

    def sorted(self) -> list[MultiIndex]:
        return sorted(self._members)

    def to_json(self) -> str:
        return json.dumps([list(k) for k in self])

    @classmethod
    def from_json(cls, text: str, floor: int = 1) -> "MultiIndexSet":
        data = json.loads(text)
        if not isinstance(data, list) or not all(isinstance(k, list) for k in data):
            raise ValueError("expected a JSON array of integer arrays")
        dim = len(data[0]) if data else None
        return cls((tuple(k) for k in data), dim=dim, floor=floor)


def is_admissible_with(k: MultiIndex, indices: MultiIndexSet) -> bool:
    """True when every backward neighbor of ``k`` (above the set's floor) is in the set."""
    return all(b in indices for b in backward_neighbors(k, indices.floor))


def is_admissible(indices: MultiIndexSet) -> bool:
    return all(is_admissible_with(k, indices) for k in indices)


def total_order_set(d: int, n: int, floor: int = 1) -> MultiIndexSet:
    """``{k : k_i >= floor, sum(k - floor) <= n}`` in lexicographic order."""
    if d < 1 or n < 0:
        raise ValueError("total_order_set needs d >= 1 and n >= 0")
    out = []

    def rec(prefix, budget):
        if len(prefix) == d:
            out.append(tuple(prefix))
            return
        for v in range(budget + 1):
            rec(prefix + [floor + v], budget - v)

    rec([], n)
    return MultiIndexSet(out, dim=d, floor=floor)


def full_tensor_set(bounds: MultiIndex, floor: int = 1) -> MultiIndexSet:
    """Every k with ``floor <= k_i <= bounds_i`` (the box with corner ``bounds``)."""
    bounds = tuple(int(b) for b in bounds)
    if any(b < floor for b in bounds):
        raise ValueError(f"bounds must be >= {floor} componentwise")
    ranges = [range(floor, b + 1) for b in bounds]
    return MultiIndexSet(itertools.product(*ranges), dim=len(bounds), floor=floor)


def smolyak_coefficients(indices: MultiIndexSet) -> dict[MultiIndex, int]:
    """Combination coefficients ``c_k = sum_{b in {0,1}^d, k+b in K} (-1)^|b|``.

    Zero coefficients are omitted. Iteration follows the set's order.
    """
    if len(indices) == 0:
        raise ValueError("Smolyak coefficients need a nonempty index set")
    if not is_admissible(indices):
        raise ValueError("Smolyak coefficients need an admissible index set")
    cube = list(itertools.product((0, 1), repeat=indices.dim))
    coeffs = {}
    for k in indices:
        c = 0
        for b in cube:
            if tuple(ki + bi for ki, bi in zip(k, b)) in indices:
                c += -1 if sum(b) % 2 else 1
        if c:
            coeffs[k] = c
    return coeffs


def active_indices(indices: MultiIndexSet) -> list[MultiIndex]:
    """Members with at least one forward neighbor that is admissible and missing."""
    return [k for k in indices if refinable_neighbors(k, indices)]


def refinable_neighbors(k: MultiIndex, indices) -> list[MultiIndex]:
    """Forward neighbors of ``k`` outside ``indices`` whose backward neighbors are all present."""
    floor = getattr(indices, "floor", 1)
    out = []
    for nb in forward_neighbors(k):
        if nb in indices:
            continue
        if all(b in indices for b in backward_neighbors(nb, floor)):
            out.append(nb)
    return out
