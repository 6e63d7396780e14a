"""The six Genz test functions on ``[-1, 1]^d`` with seeded random parameters."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .basis import DomainError


class GenzKind(enum.Enum):
    OSCILLATORY = "oscillatory"
    PRODUCT_PEAK = "product_peak"
    CORNER_PEAK = "corner_peak"
    GAUSSIAN = "gaussian"
    CONTINUOUS = "continuous"
    DISCONTINUOUS = "discontinuous"

    @classmethod
    def parse(cls, value) -> "GenzKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower().replace("-", "_"))
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown Genz kind {value!r}; expected one of {names}") from None


# Difficulty constants ||c||_1 from Barthelmann, Novak and Ritter (2000), stated
# for functions on the unit cube.
UNIT_CUBE_B = {
    GenzKind.OSCILLATORY: 9.0,
    GenzKind.PRODUCT_PEAK: 7.25,
    GenzKind.CORNER_PEAK: 1.85,
    GenzKind.GAUSSIAN: 7.03,
    GenzKind.CONTINUOUS: 20.4,
    GenzKind.DISCONTINUOUS: 4.3,
}

# On [-1, 1] the substitution x = 2u - 1 doubles every c_i relative to the
# unit-cube form, so the defaults halve the reference constants to keep the
# reference difficulty. The corner peak is evaluated on the unit-cube image and
# keeps its constant. The continuous kind uses c_i^2 like the Gaussian kind (with
# |x - w| for (x - w)^2), so it shares the Gaussian default; its reference
# constant belongs to a form linear in c and does not carry over.
DEFAULT_B = {k: (b if k is GenzKind.CORNER_PEAK else b / 2.0) for k, b in UNIT_CUBE_B.items()}
DEFAULT_B[GenzKind.CONTINUOUS] = DEFAULT_B[GenzKind.GAUSSIAN]

SMOOTH_KINDS = (GenzKind.OSCILLATORY, GenzKind.PRODUCT_PEAK, GenzKind.CORNER_PEAK, GenzKind.GAUSSIAN)


@dataclass(frozen=True, eq=False)
class GenzInstance:
    """A Genz function; ``c`` holds the final (post-decay) coefficients."""

    kind: GenzKind
    c: np.ndarray
    w: np.ndarray
    decay: bool = False
    b: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GenzKind.parse(self.kind))
        c = np.array(self.c, dtype=float)
        w = np.array(self.w, dtype=float)
        if c.ndim != 1 or c.shape != w.shape or len(c) == 0:
            raise ValueError("c and w must be nonempty vectors of equal length")
        if self.kind is GenzKind.DISCONTINUOUS and len(c) < 2:
            raise ValueError("the discontinuous Genz function needs d >= 2")
        c.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "w", w)

    @property
    def d(self) -> int:
        return len(self.c)

    def __call__(self, x) -> np.ndarray:
        return genz_eval(self, x)

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value, "d": self.d, "c": self.c.tolist(), "w": self.w.tolist(),
               "decay": self.decay}
        if self.b is not None:
            out["b"] = self.b
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "GenzInstance":
        inst = cls(data["kind"], data["c"], data["w"], bool(data.get("decay", False)), data.get("b"))
        if "d" in data and data["d"] != inst.d:
            raise ValueError(f"d={data['d']} does not match len(c)={inst.d}")
        return inst


def genz_eval(inst: GenzInstance, x) -> np.ndarray | float:
    """Evaluate at one point ``(d,)`` or a batch ``(n, d)`` in ``[-1, 1]^d``."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != inst.d:
        raise ValueError(f"expected points of dimension {inst.d}, got {x.shape[1]}")
    if np.any(np.abs(x) > 1.0):
        raise DomainError("Genz functions are defined on [-1, 1]^d")
    c, w = inst.c, inst.w
    kind = inst.kind
    if kind is GenzKind.OSCILLATORY:
        out = np.cos(2.0 * np.pi * w[0] + x @ c)
    elif kind is GenzKind.PRODUCT_PEAK:
        out = 1.0 / np.prod(c ** -2.0 + (x - w) ** 2, axis=1)
    elif kind is GenzKind.CORNER_PEAK:
        # evaluated on the unit cube image u = (x + 1) / 2, where 1 + c.u > 0
        out = (1.0 + ((x + 1.0) / 2.0) @ c) ** (-(inst.d + 1))
    elif kind is GenzKind.GAUSSIAN:
        out = np.exp(-((x - w) ** 2) @ (c * c))
    elif kind is GenzKind.CONTINUOUS:
        out = np.exp(-np.abs(x - w) @ (c * c))
    else:
        inside = (x[:, 0] <= w[0]) & (x[:, 1] <= w[1])
        out = np.where(inside, np.exp(x @ c), 0.0)
    return float(out[0]) if single else out


def genz_sample(kind, d: int, b: float | None = None, seed: int = 0, decay: bool = False) -> GenzInstance:
    """Draw ``c, w ~ U[0, 1]^d``, normalize ``||w||_1 = 1``, ``||c||_1 = b``, then optionally
    scale ``c_i`` by ``exp(i / 5)`` (``i`` counted from 1)."""
    kind = GenzKind.parse(kind)
    if b is None:
        b = DEFAULT_B[kind]
    if b <= 0:
        raise ValueError("b must be positive")
    if d < 1:
        raise ValueError("d must be >= 1")
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.0, 1.0, d)
    w = rng.uniform(0.0, 1.0, d)
    w = w / w.sum()
    c = c * (b / c.sum())
    if decay:
        c = c * np.exp(np.arange(1, d + 1) / 5.0)
    return GenzInstance(kind, c, w, decay, float(b))
