"""Model functions: built-in test models and an external-process adapter.

A model function maps an ``(n, d)`` array of points to ``n`` real values.

External protocol: the adapter writes one request line per point (``d``
space-separated decimals with 17 significant digits) and reads one response
line per request, in order. The process is started once and reused for
every batch.
"""

from __future__ import annotations

import shlex
import subprocess
import threading
from typing import Sequence

import numpy as np

from .basis import PolynomialFamily, eval_basis
from .evalcache import ModelAbort


class ExternalModelError(ModelAbort):
    """The external model process failed or violated the protocol."""


class ProtocolError(ExternalModelError):
    """A response line could not be parsed."""


class ExternalModel:
    """Persistent subprocess evaluated in batches of ``batch_size`` points.

    Parameters
    ----------
    command : str or list of str
        Program and arguments; a string is split with shell rules.
    dim : int
        Point dimension.
    batch_size : int
        Requests written before reading the responses back.
    """

    def __init__(self, command, dim: int, batch_size: int = 256):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.command:
            raise ValueError("external model command is empty")
        self.dim = int(dim)
        self.batch_size = max(1, int(batch_size))
        self.lines_sent = 0
        self.lines_read = 0
        self._proc: subprocess.Popen | None = None
        self._lock = threading.Lock()

    def _start(self) -> subprocess.Popen:
        if self._proc is None:
            try:
                self._proc = subprocess.Popen(
                    self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                    text=True, bufsize=1,
                )
            except OSError as exc:
                raise ExternalModelError(f"cannot launch {self.command[0]!r}: {exc}") from None
        return self._proc

    def __call__(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.dim:
            raise ValueError(f"expected points of dimension {self.dim}, got {points.shape[1]}")
        out = np.empty(len(points))
        with self._lock:
            for lo in range(0, len(points), self.batch_size):
                out[lo:lo + self.batch_size] = self._exchange(points[lo:lo + self.batch_size])
        return out

    def _exchange(self, batch: np.ndarray) -> np.ndarray:
        proc = self._start()
        request = "".join(" ".join(format(v, ".17g") for v in row) + "\n" for row in batch.tolist())
        try:
            proc.stdin.write(request)
            proc.stdin.flush()
        except (BrokenPipeError, OSError):
            self._fail_exited()
        self.lines_sent += len(batch)
        values = np.empty(len(batch))
        for i in range(len(batch)):
            line = proc.stdout.readline()
            if not line:
                self._fail_exited()
            self.lines_read += 1
            tok = line.strip()
            try:
                values[i] = float(tok)
            except ValueError:
                self.close()
                raise ProtocolError(f"response line {self.lines_read}: malformed value {tok!r}") from None
        return values

    def _fail_exited(self):
        proc = self._proc
        code = proc.wait(timeout=5) if proc is not None else None
        self._proc = None
        if code:
            raise ExternalModelError(f"external model exited with status {code}")
        raise ExternalModelError("external model closed its output before answering every request")

    def close(self) -> None:
        proc, self._proc = self._proc, None
        if proc is None:
            return
        try:
            proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()
        if proc.stdout:
            proc.stdout.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def legendre_mode_0_4(x) -> np.ndarray:
    """``psi_0(x_1) psi_4(x_2)`` in the orthonormal Legendre basis."""
    x = np.atleast_2d(x)
    return eval_basis(PolynomialFamily.LEGENDRE, 4, x[:, 1]) * np.ones(len(x))


def legendre_mode_6_6(x) -> np.ndarray:
    """``psi_6(x_1) psi_6(x_2)`` in the orthonormal Legendre basis."""
    x = np.atleast_2d(x)
    leg = PolynomialFamily.LEGENDRE
    return eval_basis(leg, 6, x[:, 0]) * eval_basis(leg, 6, x[:, 1])


# Sensitivities of the 14-dimensional stand-in decay geometrically so that a
# few inputs dominate; three pairwise couplings make the function non-additive.
_ANISO_WEIGHTS = 0.9 * 0.55 ** np.arange(14)
_ANISO_COUPLINGS = ((0, 1, 0.35), (1, 2, 0.2), (0, 4, 0.15))


def anisotropic14(x) -> np.ndarray:
    """Smooth anisotropic function on ``[-1, 1]^14``.

    ``exp(sum_i a_i x_i + sum_(i,j) b_ij x_i x_j) + 0.2 sin(pi x_1 x_3)`` with
    ``a_i = 0.9 * 0.55^(i-1)`` and couplings ``b_12 = 0.35``, ``b_23 = 0.2``,
    ``b_15 = 0.15``.
    """
    x = np.atleast_2d(x)
    if x.shape[1] != 14:
        raise ValueError(f"anisotropic14 takes 14-dimensional points, got {x.shape[1]}")
    expo = x @ _ANISO_WEIGHTS
    for i, j, b in _ANISO_COUPLINGS:
        expo = expo + b * x[:, i] * x[:, j]
    return np.exp(expo) + 0.2 * np.sin(np.pi * x[:, 0] * x[:, 2])


BUILTINS = {
    "legendre_mode_0_4": (legendre_mode_0_4, 2),
    "legendre_mode_6_6": (legendre_mode_6_6, 2),
    "anisotropic14": (anisotropic14, 14),
}


def builtin(name: str):
    """``(function, dimension)`` for a built-in model name."""
    try:
        return BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown builtin model {name!r}; expected one of {', '.join(BUILTINS)}") from None


def builtin_names() -> Sequence[str]:
    return tuple(BUILTINS)
