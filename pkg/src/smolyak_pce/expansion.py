"""Sparse expansions in a tensor-product orthonormal polynomial basis."""

from __future__ import annotations

import json
import math
from typing import Mapping, Sequence

import numpy as np

from .basis import PolynomialFamily, eval_basis_all
from .evalcache import evaluate_model

# entries of the (samples x terms) work array per evaluation chunk
_CHUNK = 1 << 22


class PolynomialExpansion:
    """``f(x) ~ sum_j c_j prod_i psi_{j_i}(x_i)`` with a sparse coefficient map.

    Terms are kept in lexicographic order of their degree multi-index. Exact
    zeros are retained; use :meth:`pruned` to drop small terms explicitly.
    """

    __slots__ = ("families", "_coef", "_arrays")

    def __init__(self, families: Sequence[PolynomialFamily], coefficients: Mapping | None = None):
        self.families = tuple(PolynomialFamily.parse(f) for f in families)
        d = len(self.families)
        coef = {}
        for j, c in sorted((coefficients or {}).items()):
            j = tuple(int(v) for v in j)
            if len(j) != d:
                raise ValueError(f"degree index {j} does not have dimension {d}")
            if min(j, default=0) < 0:
                raise ValueError(f"degree index {j} has a negative entry")
            coef[j] = float(c)
        self._coef = coef
        self._arrays = None

    @classmethod
    def from_arrays(cls, families, indices: np.ndarray, coeffs: np.ndarray) -> "PolynomialExpansion":
        return cls(families, dict(zip(map(tuple, np.asarray(indices).tolist()), np.asarray(coeffs).tolist())))

    @property
    def dim(self) -> int:
        return len(self.families)

    def __len__(self) -> int:
        return len(self._coef)

    def __contains__(self, j) -> bool:
        return tuple(j) in self._coef

    def __getitem__(self, j) -> float:
        return self._coef[tuple(j)]

    def get(self, j, default: float = 0.0) -> float:
        return self._coef.get(tuple(j), default)

    def items(self):
        return self._coef.items()

    def indices(self):
        return list(self._coef)

    def as_dict(self) -> dict:
        return dict(self._coef)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indices, coefficients)`` as arrays of shape ``(T, d)`` and ``(T,)``."""
        if self._arrays is None:
            idx = np.array(list(self._coef), dtype=np.int64).reshape(len(self._coef), self.dim)
            self._arrays = (idx, np.array(list(self._coef.values()), dtype=float))
        return self._arrays

    def evaluate(self, x):
        """Evaluate at one point ``(d,)`` or a batch ``(n, d)``."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.dim:
            raise ValueError(f"expected points of dimension {self.dim}, got {x.shape[1]}")
        idx, coef = self.arrays()
        out = np.zeros(len(x))
        if len(coef):
            maxdeg = idx.max(axis=0)
            step = max(1, _CHUNK // len(coef))
            for lo in range(0, len(x), step):
                xs = x[lo:lo + step]
                prod = None
                for i, fam in enumerate(self.families):
                    vals = eval_basis_all(fam, int(maxdeg[i]), xs[:, i])[:, idx[:, i]]
                    prod = vals if prod is None else np.multiply(prod, vals, out=prod)
                out[lo:lo + step] = prod @ coef
        return float(out[0]) if single else out

    __call__ = evaluate

    def axpy(self, alpha: float, other: "PolynomialExpansion") -> "PolynomialExpansion":
        """``alpha * self + other``."""
        return axpy(alpha, self, other)

    def l2_norm(self) -> float:
        return l2_norm(self)

    def pruned(self, tol: float = 0.0) -> "PolynomialExpansion":
        return PolynomialExpansion(self.families, {j: c for j, c in self._coef.items() if abs(c) > tol})

    def to_json(self, quadrature=None) -> str:
        """Serialize with coefficients printed to 17 significant digits."""
        fams = json.dumps([f.value for f in self.families])
        head = f'{{"dimension": {self.dim}, "families": {fams}'
        if quadrature is not None:
            head += f', "quadrature": {json.dumps([q.to_json() for q in quadrature])}'
        terms = ",\n".join(
            f'    {{"index": {json.dumps(list(j))}, "coeff": {_fmt(c)}}}' for j, c in self._coef.items()
        )
        body = f'[\n{terms}\n  ]' if terms else "[]"
        return f"{head},\n  \"terms\": {body}\n}}\n"

    @classmethod
    def from_json(cls, text: str) -> "PolynomialExpansion":
        data = json.loads(text)
        if data["dimension"] != len(data["families"]):
            raise ValueError("dimension does not match the number of families")
        return cls(data["families"], {tuple(t["index"]): t["coeff"] for t in data["terms"]})

    def __repr__(self) -> str:
        return f"PolynomialExpansion(dim={self.dim}, terms={len(self)})"


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite coefficient {x!r}")
    return format(x, ".17g")


def _check_compatible(a: PolynomialExpansion, b: PolynomialExpansion) -> None:
    if a.families != b.families:
        raise ValueError(f"family mismatch: {[f.value for f in a.families]} vs {[f.value for f in b.families]}")


def axpy(alpha: float, a: PolynomialExpansion, b: PolynomialExpansion,
         drop_zeros: bool = False) -> PolynomialExpansion:
    """Coefficient-wise ``alpha * a + b``."""
    _check_compatible(a, b)
    out = dict(b.items())
    for j, c in a.items():
        out[j] = alpha * c + out.get(j, 0.0)
    if drop_zeros:
        out = {j: c for j, c in out.items() if c != 0.0}
    return PolynomialExpansion(a.families, out)


def l2_norm(exp: PolynomialExpansion) -> float:
    """L2 norm under the product density; Parseval for an orthonormal basis."""
    if len(exp) == 0:
        return 0.0
    _, coef = exp.arrays()
    return float(math.sqrt(np.dot(coef, coef)))


def sample_points(families: Sequence[PolynomialFamily], samples: int, seed: int) -> np.ndarray:
    """i.i.d. draws from the product density, one column per dimension in order."""
    rng = np.random.default_rng(seed)
    cols = [PolynomialFamily.parse(f).sample(rng, samples) for f in families]
    return np.stack(cols, axis=-1)


class MonteCarloError:
    """Reusable L2 error estimator: the sample points and model values are drawn once."""

    def __init__(self, f, families, samples: int = 10_000, seed: int = 0):
        if samples < 1:
            raise ValueError("samples must be >= 1")
        self.points = sample_points(families, samples, seed)
        self.values = evaluate_model(f, self.points)

    def __call__(self, exp: PolynomialExpansion) -> float:
        diff = self.values - exp.evaluate(self.points)
        return float(math.sqrt(np.mean(diff * diff)))


def mc_l2_error(f, exp: PolynomialExpansion, samples: int = 10_000, seed: int = 0) -> float:
    """Monte Carlo estimate of ``||f - exp||`` under the product density."""
    return MonteCarloError(f, exp.families, samples, seed)(exp)
