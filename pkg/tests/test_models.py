"""Built-in models and the external-process adapter.

Covers:
- built-in closed forms
- external adapter: batching, one process per model, line counts, protocol errors
"""

import sys
import textwrap

import numpy as np
import pytest

from smolyak_pce.basis import PolynomialFamily, eval_basis
from smolyak_pce.evalcache import EvalCache, ModelAbort
from smolyak_pce.models import (
    ExternalModel,
    ExternalModelError,
    ProtocolError,
    anisotropic14,
    builtin,
    legendre_mode_0_4,
    legendre_mode_6_6,
)

LEG = PolynomialFamily.LEGENDRE

SUM_SCRIPT = """
import os, sys
print(os.getpid(), file=sys.stderr)
for line in sys.stdin:
    print(sum(float(t) for t in line.split()), flush=True)
"""


def script(tmp_path, body, name="model.py"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(body))
    return [sys.executable, str(path)]


class TestBuiltins:
    def test_single_mode(self):
        x = np.array([[0.3, -0.4], [-0.9, 0.8]])
        np.testing.assert_allclose(legendre_mode_0_4(x), eval_basis(LEG, 4, x[:, 1]))

    def test_product_mode(self):
        x = np.array([[0.3, -0.4]])
        assert legendre_mode_6_6(x)[0] == pytest.approx(eval_basis(LEG, 6, 0.3) * eval_basis(LEG, 6, -0.4))

    def test_anisotropic14(self):
        x = np.zeros((1, 14))
        assert anisotropic14(x)[0] == pytest.approx(1.0)
        with pytest.raises(ValueError):
            anisotropic14(np.zeros((1, 3)))

    def test_lookup(self):
        assert builtin("legendre_mode_0_4")[1] == 2
        with pytest.raises(ValueError, match="unknown builtin"):
            builtin("nope")


class TestExternal:
    def test_batches_reuse_one_process(self, tmp_path):
        with ExternalModel(script(tmp_path, SUM_SCRIPT), dim=2, batch_size=3) as model:
            pts = np.random.default_rng(0).uniform(-1, 1, (10, 2))
            np.testing.assert_allclose(model(pts), pts.sum(axis=1), rtol=1e-15)
            proc = model._proc
            model(pts[:2])
            assert model._proc is proc
            assert model.lines_sent == model.lines_read == 12

    def test_full_precision_round_trip(self, tmp_path):
        echo = script(tmp_path, "import sys\nfor line in sys.stdin:\n    print(line.split()[0], flush=True)\n")
        x = np.array([[1 / 3], [np.pi * 1e-300]])
        with ExternalModel(echo, dim=1) as model:
            np.testing.assert_array_equal(model(x), x[:, 0])

    def test_lines_equal_cache_evals(self, tmp_path):
        cache = EvalCache(2)
        with ExternalModel(script(tmp_path, SUM_SCRIPT), dim=2) as model:
            pts = np.array([[0.0, 1.0], [0.5, 0.5], [0.0, 1.0]])
            cache.evaluate_batch(model, pts)
            cache.evaluate_batch(model, pts)
            assert model.lines_read == cache.evals_total == 2

    def test_malformed_response(self, tmp_path):
        bad = script(tmp_path, "import sys\nfor line in sys.stdin:\n    print('oops', flush=True)\n")
        with ExternalModel(bad, dim=1) as model:
            with pytest.raises(ProtocolError, match="response line 1: malformed value 'oops'"):
                model(np.zeros((1, 1)))

    def test_process_exit(self, tmp_path):
        dead = script(tmp_path, "import sys\nsys.stdin.readline()\nsys.exit(4)\n")
        with ExternalModel(dead, dim=1) as model:
            with pytest.raises(ExternalModelError, match="status 4"):
                model(np.zeros((2, 1)))

    def test_missing_program(self):
        with pytest.raises(ExternalModelError, match="cannot launch"):
            ExternalModel(["/nonexistent/model"], dim=1)(np.zeros((1, 1)))

    def test_errors_abort_cache_batch(self, tmp_path):
        bad = script(tmp_path, "import sys\nfor line in sys.stdin:\n    print('x', flush=True)\n")
        with ExternalModel(bad, dim=1) as model:
            with pytest.raises(ModelAbort):
                EvalCache(1).evaluate_batch(model, np.zeros((3, 1)))

    def test_string_command_split(self, tmp_path):
        cmd = script(tmp_path, SUM_SCRIPT)
        model = ExternalModel(f"{cmd[0]} {cmd[1]}", dim=1)
        assert model.command == cmd
        model.close()

    def test_dimension_check(self, tmp_path):
        with ExternalModel(script(tmp_path, SUM_SCRIPT), dim=2) as model:
            with pytest.raises(ValueError):
                model(np.zeros((1, 3)))
