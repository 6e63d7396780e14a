"""Deduplicating store of model evaluations.

A model function maps an ``(n, d)`` array of points to ``n`` real values.
Keys are the exact binary coordinates of each point (``-0.0`` is folded into
``0.0``); nested rule constructors generate shared points bitwise-identically,
so no tolerance matching is done.

The on-disk format is a ``dim=<d>`` header line followed by one line per
point: ``d`` coordinates and the value, each printed with 17 significant digits.
"""

from __future__ import annotations

import threading
from concurrent.futures import Future, ThreadPoolExecutor
from pathlib import Path

import numpy as np


class ModelEvaluationError(RuntimeError):
    """One or more model evaluations failed.

    ``failures`` lists ``(point, message)`` pairs.
    """

    def __init__(self, failures):
        self.failures = list(failures)
        point, msg = self.failures[0]
        extra = f" (and {len(self.failures) - 1} more)" if len(self.failures) > 1 else ""
        super().__init__(f"model evaluation failed at {list(point)}: {msg}{extra}")


class ModelAbort(RuntimeError):
    """A failure of the model itself rather than of one point; never retried per point."""


class CacheFormatError(ValueError):
    """A cache file could not be parsed."""


def pointwise(fn):
    """Wrap a scalar function ``fn(x) -> float`` as a batch model function."""

    def batch(points):
        return np.array([float(fn(np.asarray(p))) for p in np.atleast_2d(points)])

    batch.__name__ = getattr(fn, "__name__", "pointwise")
    return batch


def evaluate_model(f, points) -> np.ndarray:
    """Evaluate ``f`` on a batch without caching, attributing failures to points."""
    values, failures = _evaluate_partial(f, points)
    if failures:
        raise ModelEvaluationError(failures)
    return values


def _evaluate_partial(f, points):
    """Values (NaN where failed) and the list of ``(point, message)`` failures."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    try:
        values = np.asarray(f(points), dtype=float).reshape(-1)
        if values.shape[0] != points.shape[0]:
            raise ValueError(f"model returned {values.shape[0]} values for {points.shape[0]} points")
        if np.all(np.isfinite(values)):
            return values, []
    except ModelAbort:
        raise
    except Exception:  # noqa: BLE001 - retried point by point below
        pass
    failures, out = [], np.full(len(points), np.nan)
    for i, p in enumerate(points):
        try:
            v = np.asarray(f(p[None, :]), dtype=float).reshape(-1)
            if v.shape != (1,):
                raise ValueError(f"model returned {v.shape[0]} values for one point")
            if not np.isfinite(v[0]):
                raise ValueError(f"non-finite model value {v[0]!r}")
            out[i] = v[0]
        except ModelAbort:
            raise
        except Exception as exc:  # noqa: BLE001 - reported per point
            failures.append((tuple(p.tolist()), str(exc) or type(exc).__name__))
    return out, failures


class EvalCache:
    """Evaluation store shared by all operators; its miss count is the unit of work.

    Parameters
    ----------
    dim : int, optional
        Point dimension; fixed by the first batch when omitted.
    jobs : int
        Upper bound on concurrent model calls for one batch.
    chunk_size : int
        Points per model call.
    backing : EvalCache, optional
        Read-through store consulted before calling the model. Points found
        there count toward this cache's ``evals_total`` (they are new to this
        run) but not toward ``model_calls``.
    """

    def __init__(self, dim: int | None = None, jobs: int = 1, chunk_size: int = 4096,
                 backing: "EvalCache | None" = None):
        self.dim = dim
        self.jobs = max(1, int(jobs))
        self.chunk_size = max(1, int(chunk_size))
        self._store: dict[tuple, float] = {}
        self._inflight: dict[tuple, Future] = {}
        self._lock = threading.Lock()
        self.backing = backing
        self.evals_total = 0
        self.model_calls = 0
        self.hits = 0

    def __len__(self) -> int:
        return len(self._store)

    def __contains__(self, point) -> bool:
        return _key(point) in self._store

    def items(self):
        with self._lock:
            return list(self._store.items())

    def count_new(self, points) -> int:
        """Number of distinct points in ``points`` not yet stored."""
        keys = {_key(p) for p in np.atleast_2d(points).tolist()}
        with self._lock:
            return sum(1 for k in keys if k not in self._store)

    def evaluate_batch(self, f, points) -> np.ndarray:
        """Values of ``f`` at ``points`` in input order; only unseen points reach ``f``."""
        points = np.atleast_2d(np.asarray(points, dtype=float)) + 0.0
        if points.size == 0:
            return np.empty(0)
        self._check_dim(points.shape[1])
        keys = [tuple(row) for row in points.tolist()]
        owned: dict[tuple, Future] = {}
        waiting: dict[tuple, Future] = {}
        with self._lock:
            for key in keys:
                if key in self._store or key in owned or key in waiting:
                    continue
                fut = self._inflight.get(key)
                if fut is not None:
                    waiting[key] = fut
                else:
                    fut = Future()
                    self._inflight[key] = fut
                    owned[key] = fut
            self.hits += len(keys) - len(owned)
        if owned:
            try:
                self._compute(f, list(owned))
            except BaseException as exc:
                with self._lock:
                    for key, fut in owned.items():
                        if self._inflight.get(key) is fut:
                            del self._inflight[key]
                            fut.set_exception(exc)
                raise
        for fut in waiting.values():
            fut.result()
        with self._lock:
            return np.array([self._store[k] for k in keys])

    def _compute(self, f, keys):
        if self.backing is not None:
            known = self.backing.lookup(keys)
            with self._lock:
                for key, val in known.items():
                    self._store[key] = val
                    self.evals_total += 1
                    self._inflight.pop(key).set_result(val)
            keys = [k for k in keys if k not in known]
            if not keys:
                return
        miss = np.array(keys, dtype=float)
        chunks = [miss[i:i + self.chunk_size] for i in range(0, len(miss), self.chunk_size)]
        if self.jobs > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(self.jobs) as pool:
                outcomes = list(pool.map(lambda c: _evaluate_partial(f, c), chunks))
        else:
            outcomes = [_evaluate_partial(f, c) for c in chunks]
        failures = [fail for _, fails in outcomes for fail in fails]
        values = np.concatenate([vals for vals, _ in outcomes])
        with self._lock:
            for key, val in zip(keys, values.tolist()):
                if np.isfinite(val) and key not in self._store:
                    self._store[key] = val
                    self.evals_total += 1
                    self.model_calls += 1
            error = ModelEvaluationError(failures) if failures else None
            for key in keys:
                fut = self._inflight.pop(key)
                if key in self._store:
                    fut.set_result(self._store[key])
                else:
                    fut.set_exception(error)
        if error is not None:
            raise error

    def lookup(self, keys) -> dict:
        """Stored values (here or in the backing chain) for those of ``keys`` that are present."""
        with self._lock:
            found = {k: self._store[k] for k in keys if k in self._store}
        if self.backing is not None and len(found) < len(keys):
            found.update(self.backing.lookup([k for k in keys if k not in found]))
        return found

    def merge(self, other: "EvalCache") -> None:
        """Copy entries of ``other`` that are missing here."""
        if other.dim is not None:
            self._check_dim(other.dim)
        entries = other.items()
        with self._lock:
            for k, v in entries:
                if k not in self._store:
                    self._store[k] = v
                    self.evals_total += 1

    def _check_dim(self, d: int) -> None:
        if self.dim is None:
            self.dim = d
        elif d != self.dim:
            raise ValueError(f"cache holds {self.dim}-dimensional points, got dimension {d}")

    def snapshot(self, path) -> None:
        with self._lock:
            items = sorted(self._store.items())
        lines = [f"dim={self.dim if self.dim is not None else 0}"]
        for key, val in items:
            lines.append(" ".join(format(v, ".17g") for v in (*key, val)))
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def restore(cls, path, dim: int | None = None, jobs: int = 1) -> "EvalCache":
        """Load a snapshot; ``dim``, when given, must match the file's dimension."""
        text = Path(path).read_text()
        lines = text.splitlines()
        if not lines or not lines[0].startswith("dim="):
            raise CacheFormatError(f"{path}:1: expected header 'dim=<d>'")
        expected = dim
        try:
            file_dim = int(lines[0][4:])
        except ValueError:
            raise CacheFormatError(f"{path}:1: bad dimension {lines[0][4:]!r}") from None
        if expected is not None and file_dim not in (0, expected):
            raise CacheFormatError(f"{path}:1: cache dimension {file_dim} does not match expected {expected}")
        dim = file_dim
        cache = cls(dim=dim or expected, jobs=jobs)
        for lineno, line in enumerate(lines[1:], 2):
            if not line.strip():
                continue
            tok = line.split()
            if len(tok) != dim + 1:
                raise CacheFormatError(
                    f"{path}:{lineno}: expected {dim + 1} numbers (dimension {dim}), found {len(tok)}"
                )
            try:
                nums = [float(t) for t in tok]
            except ValueError:
                bad = next(i for i, t in enumerate(tok) if not _is_float(t))
                raise CacheFormatError(f"{path}:{lineno}: field {bad + 1}: not a number: {tok[bad]!r}") from None
            cache._store[_key(nums[:-1])] = nums[-1]
        cache.evals_total = len(cache._store)
        return cache

    def restore_into(self, path) -> None:
        other = EvalCache.restore(path, dim=self.dim)
        if other.dim is not None:
            self._check_dim(other.dim)
        with self._lock:
            for k, v in other._store.items():
                if k not in self._store:
                    self._store[k] = v
            self.evals_total = len(self._store)


def _key(point) -> tuple:
    return tuple(float(v) + 0.0 for v in point)


def _is_float(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def evaluate(f, points, cache: EvalCache | None = None) -> np.ndarray:
    if cache is None:
        return evaluate_model(f, points)
    return cache.evaluate_batch(f, points)
