"""Shared oracles and helpers for the test suite."""

from __future__ import annotations

import math

import numpy as np
import pytest

from smolyak_pce.basis import PolynomialFamily
from smolyak_pce.multiindex import MultiIndexSet, backward_neighbors, forward_neighbors

LEG = PolynomialFamily.LEGENDRE
HER = PolynomialFamily.HERMITE


def moment(family: PolynomialFamily, r: int) -> float:
    """E[x^r] under the family's probability density, from closed forms."""
    if r % 2:
        return 0.0
    if family is LEG:
        return 1.0 / (r + 1)
    return float(math.prod(range(r - 1, 0, -2))) if r else 1.0


def abs_moment(family: PolynomialFamily, r: int) -> float:
    """E[|x|^r] under the family's probability density."""
    if family is LEG:
        return 1.0 / (r + 1)
    return 2.0 ** (r / 2) * math.gamma((r + 1) / 2) / math.sqrt(math.pi)


def log_abs_moment(family: PolynomialFamily, r: int) -> float:
    if family is LEG:
        return -math.log(r + 1)
    return (r / 2) * math.log(2.0) + math.lgamma((r + 1) / 2) - 0.5 * math.log(math.pi)


def monomial_relative_error(points, weights, family, r: int) -> float:
    """``|Q(x^r) - E[x^r]| / E|x|^r`` evaluated in the log domain to avoid overflow."""
    x = np.asarray(points, dtype=float)
    w = np.asarray(weights, dtype=float)
    logscale = log_abs_moment(family, r)
    nz = x != 0.0
    with np.errstate(divide="ignore"):
        logs = np.log(w[nz]) + (r * np.log(np.abs(x[nz])) if r else 0.0) - logscale
    signs = np.sign(x[nz]) ** r if r else np.ones(nz.sum())
    q = float(np.sum(signs * np.exp(logs)))
    if r == 0:
        q += float(np.sum(w[~nz]))
    exact = moment(family, r) / math.exp(logscale) if r % 2 == 0 else 0.0
    return abs(q - exact)


def random_admissible_set(rng: np.random.Generator, d: int, size: int, caps=None) -> MultiIndexSet:
    """Grow ``{(1,...,1)}`` by random admissible forward neighbors up to ``size`` members."""
    caps = caps or (10**9,) * d
    members = {(1,) * d}
    while len(members) < size:
        cands = sorted({
            nb for k in members for nb in forward_neighbors(k)
            if nb not in members and all(v <= c for v, c in zip(nb, caps))
            and all(b in members for b in backward_neighbors(nb, 1))
        })
        if not cands:
            break
        members.add(cands[rng.integers(len(cands))])
    return MultiIndexSet(sorted(members), dim=d, floor=1)


def brute_force_combination(levels: MultiIndexSet) -> dict:
    """Collect ``L_k`` weights by expanding every difference product ``prod_i (L_{k_i} - L_{k_i - 1})``."""
    out: dict = {}
    d = levels.dim
    for k in levels:
        for mask in range(1 << d):
            kb = tuple(v - ((mask >> i) & 1) for i, v in enumerate(k))
            if min(kb) < 1:
                continue  # L_0 is the zero operator
            sign = -1 if bin(mask).count("1") % 2 else 1
            out[kb] = out.get(kb, 0) + sign
    return {k: c for k, c in out.items() if c}


# --- acceptance reporting ---------------------------------------------------

_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance():
    """``acceptance(cid, ok, detail)`` records one criterion outcome for the final summary."""

    def record(cid: str, ok: bool, detail: str = "") -> bool:
        _ACCEPTANCE.append(f"{cid}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip())
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
