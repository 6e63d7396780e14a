"""Greedy dimension-adaptive refinement of the Smolyak level set.

Each level index ``k`` contributes the difference term
``Delta_k = sum_b (-1)^|b| S_{k-b}`` (``b`` in ``{0,1}^d``, ``k - b >= 1``) in
coefficient space. Its L2 norm ``eps(k)`` is computed once, when ``k`` enters
the set, and never changes afterwards. The running expansion is the sum of all
difference terms, which equals the Smolyak pseudospectral operator on the
current set.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .evalcache import EvalCache
from .expansion import PolynomialExpansion
from .multiindex import MultiIndex, MultiIndexSet, backward_neighbors, forward_neighbors, refinable_neighbors
from .quadrature import QuadratureFamily, tensor_rule_for
from .smolyak import SmolyakSpec
from .tensorop import tensor_coefficients


class IndicatorKind(enum.Enum):
    PLAIN = "plain"
    WORK_MAX = "work_max"
    WORK_LINEAR = "work_linear"
    WORK_RATIO = "work_ratio"


@dataclass(frozen=True)
class IndicatorVariant:
    """Refinement priority: plain ``eps`` or one of three cost-aware variants.

    ``weight`` is ``w`` in ``[0, 1]`` for ``WORK_MAX`` and the cost penalty per
    point for ``WORK_LINEAR``; it is ignored otherwise.
    """

    kind: IndicatorKind = IndicatorKind.PLAIN
    weight: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", IndicatorKind(self.kind))
        if self.kind is IndicatorKind.WORK_MAX and not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"work_max weight must lie in [0, 1], got {self.weight}")

    @property
    def uses_cost(self) -> bool:
        return self.kind is not IndicatorKind.PLAIN

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "weight": self.weight}


def work_indicator(variant: IndicatorVariant, eps: float, n: int,
                   eps_ref: float = 1.0, n_ref: int = 1) -> float:
    """Priority of an index with error ``eps`` whose refinement costs ``n`` new points.

    ``eps_ref`` and ``n_ref`` are the error and refinement cost of the initial
    index; they only enter ``WORK_MAX``.
    """
    kind = variant.kind
    if kind is IndicatorKind.PLAIN:
        return eps
    if n < 1:
        raise ValueError("refinement cost n must be >= 1")
    if kind is IndicatorKind.WORK_RATIO:
        return eps / n
    if kind is IndicatorKind.WORK_LINEAR:
        return eps - variant.weight * n
    w = variant.weight
    ratio = eps / eps_ref if eps_ref > 0 else 0.0
    return max(w * ratio, (1.0 - w) * n_ref / n)


@dataclass(frozen=True)
class TerminationPolicy:
    tolerance: float = 0.0
    max_evals: int | None = None
    max_time_s: float | None = None
    indicator: IndicatorVariant = field(default_factory=IndicatorVariant)

    def __post_init__(self):
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")
        if self.max_evals is not None and self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if self.tolerance == 0 and self.max_evals is None and self.max_time_s is None:
            raise ValueError("at least one of tolerance, max_evals, max_time_s must be set")


@dataclass
class TraceStep:
    step: int
    refined_index: MultiIndex | None
    new_indices: list
    evals_total: int
    eps_local: float
    eps_global: float
    wall_ms: float
    stop_reason: str | None = None

    def to_dict(self) -> dict:
        out = {
            "step": self.step,
            "refined_index": list(self.refined_index) if self.refined_index is not None else None,
            "new_indices": [list(k) for k in self.new_indices],
            "evals_total": self.evals_total,
            "eps_local": self.eps_local,
            "eps_global": self.eps_global,
            "wall_ms": self.wall_ms,
        }
        if self.stop_reason is not None:
            out["stop_reason"] = self.stop_reason
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


class AdaptiveState:
    """Level set, frozen local indicators, active set, and running expansion.

    Model values come from ``cache``; ``f`` is only called for unseen points.
    """

    def __init__(self, f, families: Sequence[QuadratureFamily], cache: EvalCache | None = None):
        self.f = f
        self.families = tuple(families)
        self.dim = len(self.families)
        self.cache = cache if cache is not None else EvalCache(self.dim)
        self.levels = MultiIndexSet([], dim=self.dim, floor=1)
        self.eps: dict[MultiIndex, float] = {}
        self.active: set[MultiIndex] = set()
        self.coefficients: dict[MultiIndex, float] = {}
        self.trace: list[TraceStep] = []
        self._tensors: dict[MultiIndex, np.ndarray] = {}
        self._deltas: dict[MultiIndex, np.ndarray] = {}
        self._t0 = time.perf_counter()
        self.eps_ref = 0.0
        self.n_ref = 1

    @property
    def polynomials(self):
        return tuple(fam.polynomial for fam in self.families)

    @property
    def evals_total(self) -> int:
        return self.cache.evals_total

    def elapsed_ms(self) -> float:
        return (time.perf_counter() - self._t0) * 1e3

    def spec(self) -> SmolyakSpec:
        return SmolyakSpec(self.levels, self.families)

    def expansion(self) -> PolynomialExpansion:
        return PolynomialExpansion(self.polynomials, self.coefficients)

    def grid(self, k) -> np.ndarray:
        return tensor_rule_for(self.families, tuple(k)).points

    # --- difference terms -------------------------------------------------

    def _tensor(self, k: MultiIndex) -> np.ndarray:
        """Full-tensor coefficient array ``S_k``; values must already be cached."""
        arr = self._tensors.get(k)
        if arr is None:
            vals = self.cache.evaluate_batch(self.f, self.grid(k))
            arr = tensor_coefficients(vals, self.families, k)
            self._tensors[k] = arr
        return arr

    def delta(self, k: MultiIndex) -> np.ndarray:
        """Coefficient array of ``Delta_k`` on the box of ``S_k``."""
        k = tuple(k)
        if k in self._deltas:
            return self._deltas[k]
        out = self._tensor(k).copy()
        dims = [i for i in range(self.dim) if k[i] > 1]
        for r in range(1, len(dims) + 1):
            sign = -1.0 if r % 2 else 1.0
            for sub in itertools.combinations(dims, r):
                kb = tuple(v - 1 if i in sub else v for i, v in enumerate(k))
                t = self._tensor(kb)
                out[tuple(slice(0, n) for n in t.shape)] += sign * t
        return out

    def n_new(self, indices) -> int:
        """Unique points on the grids of ``indices`` not yet in the cache."""
        grids = [self.grid(k) for k in indices]
        if not grids:
            return 0
        return self.cache.count_new(np.concatenate(grids))

    def refinable(self, k: MultiIndex) -> list[MultiIndex]:
        """Admissible forward neighbors of ``k`` outside the set and within every family's top level."""
        return sorted(nb for nb in refinable_neighbors(k, self.levels)
                      if all(m <= fam.max_level for fam, m in zip(self.families, nb)))

    def refinement_cost(self, k: MultiIndex) -> int:
        return self.n_new(self.refinable(k))

    def priority(self, k: MultiIndex, variant: IndicatorVariant) -> float:
        if not variant.uses_cost:
            return self.eps[k]
        n = max(1, self.refinement_cost(k))
        return work_indicator(variant, self.eps[k], n, self.eps_ref, self.n_ref)

    def global_indicator(self) -> float:
        return math.fsum(self.eps[k] for k in sorted(self.active))

    # --- growth -----------------------------------------------------------

    def add(self, new: Sequence[MultiIndex]) -> None:
        """Insert admissible indices; model failures leave the state unchanged."""
        new = sorted(tuple(k) for k in new)
        grids = [self.grid(k) for k in new]
        if grids:
            self.cache.evaluate_batch(self.f, np.concatenate(grids))
        levels = self.levels.union(new)
        for k in new:
            if any(b not in levels for b in backward_neighbors(k, 1)):
                raise ValueError(f"index {k} is not admissible")
        self.levels = levels
        for k in new:
            d = self.delta(k)
            self._deltas[k] = d
            self.eps[k] = float(math.sqrt(np.sum(d * d)))
            for j, c in zip(itertools.product(*[range(n) for n in d.shape]), d.ravel().tolist()):
                self.coefficients[j] = self.coefficients.get(j, 0.0) + c
        self._update_active(new)

    def _update_active(self, new) -> None:
        touched = set(new)
        for k in new:
            touched.update(backward_neighbors(k, 1))
            for nb in forward_neighbors(k):
                touched.update(backward_neighbors(nb, 1))
        for k in touched:
            if k not in self.levels:
                continue
            if self.refinable(k):
                self.active.add(k)
            else:
                self.active.discard(k)


def initial_state(f, families, cache: EvalCache | None = None) -> AdaptiveState:
    state = AdaptiveState(f, families, cache)
    root = (1,) * state.dim
    state.add([root])
    state.eps_ref = state.eps[root]
    state.n_ref = max(1, state.refinement_cost(root))
    return state


def local_indicator(k: MultiIndex, state: AdaptiveState) -> float:
    """``eps(k)`` for a candidate whose backward neighbors are in the set; the state is not modified."""
    k = tuple(k)
    if k in state.eps:
        return state.eps[k]
    if any(b not in state.levels for b in backward_neighbors(k, 1)):
        raise ValueError(f"index {k} is not admissible with respect to the level set")
    state.cache.evaluate_batch(state.f, state.grid(k))
    d = state.delta(k)
    return float(math.sqrt(np.sum(d * d)))


def global_indicator(state: AdaptiveState) -> float:
    return state.global_indicator()


def select_index(state: AdaptiveState, variant: IndicatorVariant = IndicatorVariant()) -> MultiIndex:
    """Active index of largest priority; ties go to the lexicographically smallest."""
    if not state.active:
        raise StopIteration("no active indices")
    return min(state.active, key=lambda k: (-state.priority(k, variant), k))


def select_and_refine(state: AdaptiveState, variant: IndicatorVariant = IndicatorVariant()):
    """Refine the selected index; returns ``(k, new_indices)``."""
    k = select_index(state, variant)
    new = state.refinable(k)
    state.add(new)
    return k, sorted(new)


def run_adaptive(f, families: Sequence[QuadratureFamily], policy: TerminationPolicy,
                 cache: EvalCache | None = None,
                 callback: Callable[[AdaptiveState], None] | None = None):
    """Greedy refinement from ``{(1, ..., 1)}`` until a stopping rule fires.

    Stopping rules are checked in order: no active index, ``eps_g`` at or
    below the tolerance, the next refinement would exceed ``max_evals``,
    ``max_time_s`` exceeded. ``callback(state)`` runs after every step,
    including the initial one.

    Returns
    -------
    (PolynomialExpansion, list[TraceStep], AdaptiveState)
    """
    state = initial_state(f, families, cache)
    root = (1,) * state.dim
    state.trace.append(TraceStep(0, None, [root], state.evals_total, state.eps[root],
                                 state.global_indicator(), state.elapsed_ms()))
    _notify(state, callback)
    variant = policy.indicator
    while True:
        reason = _stop_reason(state, policy)
        if reason:
            state.trace[-1].stop_reason = reason
            break
        k = select_index(state, variant)
        new = state.refinable(k)
        if policy.max_evals is not None and state.evals_total + state.n_new(new) > policy.max_evals:
            state.trace[-1].stop_reason = "max_evals"
            break
        state.add(new)
        state.trace.append(TraceStep(len(state.trace), k, new, state.evals_total, state.eps[k],
                                     state.global_indicator(), state.elapsed_ms()))
        _notify(state, callback)
    return state.expansion(), state.trace, state


def _notify(state: AdaptiveState, callback) -> None:
    """Run the callback with its duration excluded from the trace's wall clock."""
    if callback is None:
        return
    t = time.perf_counter()
    callback(state)
    state._t0 += time.perf_counter() - t


def _stop_reason(state: AdaptiveState, policy: TerminationPolicy) -> str | None:
    if not state.active:
        return "exhausted"
    if state.global_indicator() <= policy.tolerance:
        return "tolerance"
    if policy.max_evals is not None and state.evals_total >= policy.max_evals:
        return "max_evals"
    if policy.max_time_s is not None and state.elapsed_ms() >= policy.max_time_s * 1e3:
        return "max_time"
    return None
