"""Evaluation cache.

Covers:
- deduplication (within and across batches), -0.0 folding, input order
- per-point failure attribution, ModelAbort passthrough
- backing layers: evals vs model calls
- snapshot / restore round trip and format errors
- concurrent batches evaluate each point once
"""

import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smolyak_pce.evalcache import (
    CacheFormatError,
    EvalCache,
    ModelAbort,
    ModelEvaluationError,
    evaluate_model,
    pointwise,
)


class Counting:
    def __init__(self, fn=lambda x: x.sum(axis=1)):
        self.fn = fn
        self.points = 0
        self.lock = threading.Lock()

    def __call__(self, x):
        with self.lock:
            self.points += len(x)
        return self.fn(x)


class TestDedup:
    def test_repeated_points_evaluated_once(self):
        f, cache = Counting(), EvalCache(2)
        pts = np.array([[0.1, 0.2], [0.3, 0.4], [0.1, 0.2]])
        np.testing.assert_allclose(cache.evaluate_batch(f, pts), [0.3, 0.7, 0.3])
        cache.evaluate_batch(f, pts[::-1])
        assert f.points == 2 and cache.evals_total == 2 and len(cache) == 2

    def test_negative_zero_folded(self):
        f, cache = Counting(), EvalCache(1)
        cache.evaluate_batch(f, [[0.0]])
        cache.evaluate_batch(f, [[-0.0]])
        assert f.points == 1

    def test_count_new(self):
        cache = EvalCache(1)
        cache.evaluate_batch(Counting(), [[1.0]])
        assert cache.count_new([[1.0], [2.0], [2.0]]) == 1

    def test_dimension_fixed(self):
        cache = EvalCache()
        cache.evaluate_batch(Counting(), [[1.0, 2.0]])
        with pytest.raises(ValueError, match="dimension"):
            cache.evaluate_batch(Counting(), [[1.0]])

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(-5, 5), min_size=1, max_size=60))
    def test_unique_count_property(self, ints):
        f, cache = Counting(), EvalCache(1)
        vals = cache.evaluate_batch(f, np.array(ints, dtype=float)[:, None] / 4)
        np.testing.assert_allclose(vals, np.array(ints) / 4)
        assert f.points == cache.evals_total == len(set(ints))

    def test_concurrent_batches_share_work(self):
        f, cache = Counting(), EvalCache(1, jobs=4, chunk_size=7)
        pts = np.linspace(-1, 1, 200)[:, None]
        threads = [threading.Thread(target=cache.evaluate_batch, args=(f, pts)) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert f.points == 200 and cache.evals_total == 200


class TestFailures:
    def test_failures_attributed_to_points(self):
        def f(x):
            if np.any(x[:, 0] > 0.5):
                raise ValueError("too large")
            return x[:, 0]

        cache = EvalCache(1)
        with pytest.raises(ModelEvaluationError) as info:
            cache.evaluate_batch(f, [[0.1], [0.9], [0.2]])
        assert info.value.failures == [((0.9,), "too large")]
        assert len(cache) == 2 and (0.1,) in cache

    def test_non_finite_is_failure(self):
        with pytest.raises(ModelEvaluationError, match="non-finite"):
            evaluate_model(lambda x: np.full(len(x), np.nan), [[0.0]])

    def test_wrong_length_retried_pointwise(self):
        calls = []

        def f(x):
            calls.append(len(x))
            return np.zeros(1)

        assert evaluate_model(f, [[0.0], [1.0]]).tolist() == [0.0, 0.0]
        assert calls == [2, 1, 1]

    def test_abort_not_retried(self):
        calls = []

        def f(x):
            calls.append(len(x))
            raise ModelAbort("process died")

        with pytest.raises(ModelAbort):
            EvalCache(1).evaluate_batch(f, [[0.0], [1.0]])
        assert calls == [2]

    def test_failed_points_can_be_retried(self):
        state = {"fail": True}

        def f(x):
            if state["fail"]:
                raise RuntimeError("once")
            return x[:, 0]

        cache = EvalCache(1)
        with pytest.raises(ModelEvaluationError):
            cache.evaluate_batch(f, [[1.0]])
        state["fail"] = False
        assert cache.evaluate_batch(f, [[1.0]]).tolist() == [1.0]

    def test_pointwise_wrapper(self):
        f = pointwise(lambda p: p[0] * 2)
        assert f(np.array([[1.0], [2.0]])).tolist() == [2.0, 4.0]


class TestLayers:
    def test_backing_counts_evals_not_model_calls(self):
        base, f = EvalCache(1), Counting()
        base.evaluate_batch(f, [[1.0], [2.0]])
        layer = EvalCache(1, backing=base)
        layer.evaluate_batch(f, [[1.0], [3.0]])
        assert layer.evals_total == 2 and layer.model_calls == 1 and f.points == 3

    def test_merge(self):
        a, b = EvalCache(1), EvalCache(1)
        a.evaluate_batch(Counting(), [[1.0]])
        b.evaluate_batch(Counting(), [[1.0], [2.0]])
        a.merge(b)
        assert len(a) == 2


class TestPersistence:
    def test_roundtrip_bitwise(self, tmp_path):
        cache = EvalCache(2)
        pts = np.random.default_rng(0).uniform(-1, 1, (20, 2))
        vals = cache.evaluate_batch(lambda x: np.exp(x[:, 0]) / 3, pts)
        cache.snapshot(tmp_path / "c.txt")
        back = EvalCache.restore(tmp_path / "c.txt", dim=2)
        f = Counting()
        np.testing.assert_array_equal(back.evaluate_batch(f, pts), vals)
        assert f.points == 0 and back.evals_total == 20

    def test_restore_into(self, tmp_path):
        a = EvalCache(1)
        a.evaluate_batch(Counting(), [[1.0]])
        a.snapshot(tmp_path / "a")
        b = EvalCache(1)
        b.restore_into(tmp_path / "a")
        assert (1.0,) in b

    @pytest.mark.parametrize("text,match", [
        ("", "header"),
        ("dim=x\n", "bad dimension"),
        ("dim=2\n1 2\n", ":2: expected 3 numbers"),
        ("dim=1\n1 abc\n", "field 2: not a number"),
    ])
    def test_format_errors(self, tmp_path, text, match):
        (tmp_path / "c").write_text(text)
        with pytest.raises(CacheFormatError, match=match):
            EvalCache.restore(tmp_path / "c")

    def test_dimension_mismatch(self, tmp_path):
        (tmp_path / "c").write_text("dim=2\n0 0 1\n")
        with pytest.raises(CacheFormatError, match="does not match"):
            EvalCache.restore(tmp_path / "c", dim=3)
