"""Run configuration: one JSON document per experiment.

Example::

    {
      "dim": 5,
      "families": {"polynomial": "legendre", "quadrature": "gauss_patterson"},
      "mode": {"type": "adaptive", "max_evals": 10000},
      "model": {"type": "genz", "kind": "oscillatory", "seed": 3, "decay": true},
      "error": {"mc_samples": 10000, "seed": 0},
      "checkpoints": [100, 1000, 10000]
    }

``families`` is one object (used for every dimension) or a list of ``dim``
objects. Mode types: ``full_tensor`` (``levels``), ``smolyak_total_order``
(``level`` or a ``levels`` list for sweeps), ``adaptive`` (``tolerance``,
``max_evals``, ``max_time_s``, ``indicator``) and ``direct_quadrature``
(``basis`` and ``quadrature`` sub-specs). Model types: ``genz`` (sampled
parameters or an explicit ``instance``), ``builtin`` (``name``) and
``external`` (``command``, ``batch_size``).
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .adaptive import IndicatorKind, IndicatorVariant, TerminationPolicy
from .basis import PolynomialFamily
from .genz import DEFAULT_B, GenzInstance, GenzKind, genz_sample
from .models import builtin, builtin_names
from .quadrature import QuadratureFamily, QuadratureKind


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


MODE_TYPES = ("full_tensor", "smolyak_total_order", "adaptive", "direct_quadrature")
MODEL_TYPES = ("genz", "builtin", "external")


@dataclass
class ModelSpec:
    type: str
    genz: GenzInstance | None = None
    name: str | None = None
    command: list[str] | str | None = None
    batch_size: int = 256


@dataclass
class RunConfig:
    dim: int
    families: tuple[QuadratureFamily, ...]
    mode: dict
    model: ModelSpec | None
    mc_samples: int = 10_000
    mc_seed: int = 0
    seed: int = 0
    checkpoints: list[int] | None = None
    raw: dict = field(default_factory=dict)

    @property
    def mode_type(self) -> str:
        return self.mode["type"]

    def policy(self) -> TerminationPolicy:
        m = self.mode
        return TerminationPolicy(m["tolerance"], m["max_evals"], m["max_time_s"], m["indicator"])

    def config_hash(self) -> str:
        return config_hash(self.raw)


def config_hash(raw: dict) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def load_config(path, seed: int | None = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("", f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    return parse_config(raw, seed)


def _get(obj: dict, key: str, path: str, kind, default: Any = ...):
    if key not in obj:
        if default is ...:
            raise ConfigError(_join(path, key), "required field is missing")
        return default
    val = obj[key]
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if kind is not None and (not isinstance(val, kind) or (kind is int and isinstance(val, bool))):
        name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise ConfigError(_join(path, key), f"expected {name}, got {type(val).__name__}")
    return val


def _join(path: str, key) -> str:
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else key


def parse_config(raw: dict, seed: int | None = None) -> RunConfig:
    """Validate a decoded config; ``seed`` overrides the top-level ``seed`` field."""
    if not isinstance(raw, dict):
        raise ConfigError("", "config must be a JSON object")
    raw = copy.deepcopy(raw)
    if seed is not None:
        raw["seed"] = int(seed)
    dim = _get(raw, "dim", "", int)
    if dim < 1:
        raise ConfigError("dim", "must be >= 1")
    top_seed = _get(raw, "seed", "", int, 0)
    families = _parse_families(raw.get("families"), dim)
    mode = _parse_mode(_get(raw, "mode", "", dict), "mode", dim, families)
    model = _get(raw, "model", "", dict, None)
    if model is not None:
        model = _parse_model(model, "model", dim, top_seed)
    error = _get(raw, "error", "", dict, {})
    samples = _get(error, "mc_samples", "error", int, 10_000)
    if samples < 0:
        raise ConfigError("error.mc_samples", "must be >= 0 (0 disables error estimation)")
    mc_seed = _get(error, "seed", "error", int, top_seed)
    cps = _get(raw, "checkpoints", "", list, None)
    if cps is not None:
        for i, c in enumerate(cps):
            if not isinstance(c, int) or isinstance(c, bool) or c < 1:
                raise ConfigError(f"checkpoints[{i}]", "expected a positive integer")
        cps = sorted(cps)
    return RunConfig(dim, families, mode, model, samples, mc_seed, top_seed, cps, raw)


def parse_families(obj, dim: int, path: str = "families") -> tuple[QuadratureFamily, ...]:
    return _parse_families(obj, dim, path)


def _parse_families(obj, dim: int, path: str = "families") -> tuple[QuadratureFamily, ...]:
    if obj is None:
        raise ConfigError(path, "required field is missing")
    items = [obj] * dim if isinstance(obj, dict) else obj
    if not isinstance(items, list):
        raise ConfigError(path, "expected an object or a list of objects")
    if len(items) != dim:
        raise ConfigError(path, f"expected {dim} entries (one per dimension), got {len(items)}")
    out = []
    for i, item in enumerate(items):
        p = _join(path, i) if isinstance(obj, list) else path
        if not isinstance(item, dict):
            raise ConfigError(p, "expected an object")
        poly = _get(item, "polynomial", p, str, "legendre")
        quad = _get(item, "quadrature", p, str)
        try:
            poly = PolynomialFamily.parse(poly)
        except ValueError as exc:
            raise ConfigError(_join(p, "polynomial"), str(exc)) from None
        try:
            kind = QuadratureKind(quad)
        except ValueError:
            names = ", ".join(k.value for k in QuadratureKind)
            raise ConfigError(_join(p, "quadrature"), f"unknown quadrature {quad!r}; expected one of {names}") from None
        try:
            out.append(QuadratureFamily(kind, poly, _get(item, "parity_fix", p, bool, False)))
        except ValueError as exc:
            raise ConfigError(p, str(exc)) from None
    return tuple(out)


def _levels(obj, path: str, dim: int, families) -> tuple[int, ...]:
    if not isinstance(obj, list) or len(obj) != dim or not all(isinstance(v, int) and v >= 1 for v in obj):
        raise ConfigError(path, f"expected a list of {dim} positive integers")
    for i, (fam, m) in enumerate(zip(families, obj)):
        if m > fam.max_level:
            raise ConfigError(_join(path, i), f"level {m} exceeds the maximum {fam.max_level} of {fam.kind.value}")
    return tuple(obj)


def _order(val, path: str, families) -> int:
    if not isinstance(val, int) or isinstance(val, bool) or val < 0:
        raise ConfigError(path, "expected a nonnegative integer")
    top = min(f.max_level for f in families)
    if val + 1 > top:
        raise ConfigError(path, f"total-order level {val} needs quadrature level {val + 1} > maximum {top}")
    return val


def _parse_mode(obj: dict, path: str, dim: int, families) -> dict:
    kind = _get(obj, "type", path, str)
    if kind not in MODE_TYPES:
        raise ConfigError(_join(path, "type"), f"unknown mode {kind!r}; expected one of {', '.join(MODE_TYPES)}")
    if kind == "full_tensor":
        return {"type": kind, "levels": _levels(_get(obj, "levels", path, list), _join(path, "levels"), dim, families)}
    if kind == "smolyak_total_order":
        if "levels" in obj:
            lv = _get(obj, "levels", path, list)
            if not lv:
                raise ConfigError(_join(path, "levels"), "expected a nonempty list")
            levels = [_order(v, _join(_join(path, "levels"), i), families) for i, v in enumerate(lv)]
            return {"type": kind, "levels": sorted(set(levels))}
        return {"type": kind, "levels": [_order(_get(obj, "level", path, int), _join(path, "level"), families)]}
    if kind == "adaptive":
        ind = _get(obj, "indicator", path, dict, {})
        ipath = _join(path, "indicator")
        try:
            variant = IndicatorVariant(IndicatorKind(_get(ind, "kind", ipath, str, "plain")),
                                       _get(ind, "weight", ipath, float, 0.0))
        except ValueError as exc:
            raise ConfigError(ipath, str(exc)) from None
        mode = {
            "type": kind,
            "tolerance": _get(obj, "tolerance", path, float, 0.0),
            "max_evals": _get(obj, "max_evals", path, int, None),
            "max_time_s": _get(obj, "max_time_s", path, float, None),
            "indicator": variant,
        }
        try:
            TerminationPolicy(mode["tolerance"], mode["max_evals"], mode["max_time_s"], variant)
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from None
        return mode
    qpath = _join(path, "quadrature")
    q = _get(obj, "quadrature", path, dict)
    qtype = _get(q, "type", qpath, str)
    if qtype == "full_tensor":
        quad = ("full_tensor", _levels(_get(q, "levels", qpath, list), _join(qpath, "levels"), dim, families))
    elif qtype == "smolyak_total_order":
        quad = ("smolyak_total_order", _order(_get(q, "level", qpath, int), _join(qpath, "level"), families))
    else:
        raise ConfigError(_join(qpath, "type"), "expected 'full_tensor' or 'smolyak_total_order'")
    bpath = _join(path, "basis")
    b = _get(obj, "basis", path, dict, {"type": "range"})
    btype = _get(b, "type", bpath, str)
    if btype == "range":
        basis = ("range",)
    elif btype == "total_degree":
        n = _get(b, "degree", bpath, int)
        if n < 0:
            raise ConfigError(_join(bpath, "degree"), "expected a nonnegative integer")
        basis = ("total_degree", n)
    elif btype == "indices":
        idx = _get(b, "indices", bpath, list)
        for i, j in enumerate(idx):
            if not isinstance(j, list) or len(j) != dim or not all(isinstance(v, int) and v >= 0 for v in j):
                raise ConfigError(_join(_join(bpath, "indices"), i), f"expected {dim} nonnegative integers")
        basis = ("indices", [tuple(j) for j in idx])
    else:
        raise ConfigError(_join(bpath, "type"), "expected 'range', 'total_degree' or 'indices'")
    ext = _get(obj, "external", path, list, [])
    for i, j in enumerate(ext):
        if not isinstance(j, list) or len(j) != dim or not all(isinstance(v, int) and v >= 0 for v in j):
            raise ConfigError(_join(_join(path, "external"), i), f"expected {dim} nonnegative integers")
    return {"type": kind, "quadrature": quad, "basis": basis, "external": [tuple(j) for j in ext]}


def _parse_model(obj: dict, path: str, dim: int, top_seed: int) -> ModelSpec:
    kind = _get(obj, "type", path, str)
    if kind not in MODEL_TYPES:
        raise ConfigError(_join(path, "type"), f"unknown model {kind!r}; expected one of {', '.join(MODEL_TYPES)}")
    if kind == "builtin":
        name = _get(obj, "name", path, str)
        try:
            _, bdim = builtin(name)
        except ValueError:
            raise ConfigError(_join(path, "name"), f"unknown builtin {name!r}; expected one of {', '.join(builtin_names())}") from None
        if bdim != dim:
            raise ConfigError(_join(path, "name"), f"builtin {name!r} is {bdim}-dimensional but dim is {dim}")
        return ModelSpec(kind, name=name)
    if kind == "external":
        cmd = _get(obj, "command", path, (str, list))
        if not cmd or (isinstance(cmd, list) and not all(isinstance(c, str) for c in cmd)):
            raise ConfigError(_join(path, "command"), "expected a nonempty string or list of strings")
        batch = _get(obj, "batch_size", path, int, 256)
        if batch < 1:
            raise ConfigError(_join(path, "batch_size"), "must be >= 1")
        return ModelSpec(kind, command=cmd, batch_size=batch)
    if "instance" in obj:
        try:
            inst = GenzInstance.from_dict(_get(obj, "instance", path, dict))
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(_join(path, "instance"), f"invalid Genz instance: {exc}") from None
    else:
        kname = _get(obj, "kind", path, str)
        try:
            gkind = GenzKind.parse(kname)
        except ValueError as exc:
            raise ConfigError(_join(path, "kind"), str(exc)) from None
        b = _get(obj, "b", path, float, DEFAULT_B[gkind])
        if b <= 0:
            raise ConfigError(_join(path, "b"), "must be positive")
        try:
            inst = genz_sample(gkind, dim, b, _get(obj, "seed", path, int, top_seed),
                               _get(obj, "decay", path, bool, False))
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from None
    if inst.d != dim:
        raise ConfigError(_join(path, "instance"), f"instance dimension {inst.d} does not match dim {dim}")
    return ModelSpec(kind, genz=inst)
