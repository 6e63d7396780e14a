"""Experiment drivers behind the command-line subcommands.

Every driver writes plain CSV/JSON files into an output directory. Floats are
printed with 17 significant digits; quantities that do not apply to a mode
(for example ``eps_global`` of a single tensor rule) are left empty.
"""

from __future__ import annotations

import contextlib
import csv
import io
import itertools
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from .adaptive import AdaptiveState, run_adaptive
from .config import ConfigError, RunConfig, config_hash, parse_config
from .evalcache import EvalCache
from .expansion import MonteCarloError, PolynomialExpansion
from .genz import DEFAULT_B, GenzKind, SMOOTH_KINDS
from .models import ExternalModel, builtin
from .multiindex import MultiIndexSet, total_order_set
from .smolyak import SmolyakSpec, aliasing_report, direct_quadrature, smolyak_pseudospectral, smolyak_range
from .tensorop import TensorPseudospectralSpec, tensor_pseudospectral

SUMMARY_HEADER = ("mode", "dim", "evals", "eps_global", "mc_l2_error", "wall_ms", "config_hash")
CONVERGENCE_HEADER = ("step", "evals", "l2_error", "eps_global")
OUT_ENV = "SMOLYAK_PCE_OUT"


def output_dir(out: str | os.PathLike | None) -> Path:
    """``out``, else ``$SMOLYAK_PCE_OUT``, else the working directory; created if missing."""
    path = Path(out or os.environ.get(OUT_ENV) or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


@contextlib.contextmanager
def open_model(cfg: RunConfig):
    """Yield the configured model function, closing external processes afterwards."""
    spec = cfg.model
    if spec is None:
        raise ConfigError("model", "required field is missing")
    if spec.type == "genz":
        yield spec.genz
    elif spec.type == "builtin":
        yield builtin(spec.name)[0]
    else:
        with ExternalModel(spec.command, cfg.dim, spec.batch_size) as model:
            yield model


@contextlib.contextmanager
def run_cache(dim: int, jobs: int, cache_path=None):
    """A fresh per-run cache backed by the persistent cache file, saved back on success."""
    store = EvalCache(dim)
    path = Path(cache_path) if cache_path else None
    if path is not None and path.exists():
        store = EvalCache.restore(path, dim=dim)
    run = EvalCache(dim, jobs=jobs, backing=store)
    yield run
    if path is not None:
        store.merge(run)
        store.snapshot(path)


@dataclass
class RunResult:
    expansion: PolynomialExpansion
    evals: int
    eps_global: float = math.nan
    wall_ms: float = 0.0
    trace: list = field(default_factory=list)
    mc_l2_error: float = math.nan


def _eps_for_set(f, families, levels: MultiIndexSet, cache: EvalCache) -> float:
    """Global indicator of a fixed admissible set (sum of eps over its active members)."""
    side = EvalCache(cache.dim, jobs=cache.jobs, backing=cache)
    state = AdaptiveState(f, families, side)
    state.add(list(levels))
    return state.global_indicator()


def basis_for(cfg: RunConfig, Q) -> list[tuple[int, ...]]:
    basis = cfg.mode["basis"]
    if basis[0] == "indices":
        return list(basis[1])
    if basis[0] == "total_degree":
        return [tuple(v - 1 for v in k) for k in total_order_set(cfg.dim, basis[1])]
    if isinstance(Q, SmolyakSpec):
        return smolyak_range(Q).sorted()
    return list(itertools.product(*[range(v + 1) for v in Q.truncation]))


def quadrature_for(cfg: RunConfig):
    kind, arg = cfg.mode["quadrature"]
    if kind == "full_tensor":
        return TensorPseudospectralSpec(arg, cfg.families)
    return SmolyakSpec(total_order_set(cfg.dim, arg), cfg.families)


def construct(cfg: RunConfig, f, cache: EvalCache, level: int | None = None, callback=None) -> RunResult:
    """Run the configured construction (``level`` selects one total-order level of a sweep)."""
    t0 = time.perf_counter()
    mode = cfg.mode_type
    if mode == "full_tensor":
        exp = tensor_pseudospectral(f, TensorPseudospectralSpec(cfg.mode["levels"], cfg.families), cache)
        return RunResult(exp, cache.evals_total, wall_ms=_ms(t0))
    if mode == "smolyak_total_order":
        n = cfg.mode["levels"][-1] if level is None else level
        levels = total_order_set(cfg.dim, n)
        exp = smolyak_pseudospectral(f, SmolyakSpec(levels, cfg.families), cache)
        evals, wall = cache.evals_total, _ms(t0)
        return RunResult(exp, evals, _eps_for_set(f, cfg.families, levels, cache), wall)
    if mode == "adaptive":
        exp, trace, _ = run_adaptive(f, cfg.families, cfg.policy(), cache, callback)
        return RunResult(exp, trace[-1].evals_total, trace[-1].eps_global, trace[-1].wall_ms, trace)
    Q = quadrature_for(cfg)
    exp = direct_quadrature(f, basis_for(cfg, Q), Q, cache)
    return RunResult(exp, cache.evals_total, wall_ms=_ms(t0))


def _ms(t0: float) -> float:
    return (time.perf_counter() - t0) * 1e3


def _mc(cfg: RunConfig, f):
    if cfg.mc_samples == 0:
        return None
    return MonteCarloError(f, [fam.polynomial for fam in cfg.families], cfg.mc_samples, cfg.mc_seed)


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    path.write_text(buf.getvalue())


def _write_trace(path: Path, trace) -> None:
    path.write_text("".join(step.to_json() + "\n" for step in trace))


def _summary_row(cfg: RunConfig, res: RunResult):
    return (cfg.mode_type, cfg.dim, res.evals, res.eps_global, res.mc_l2_error, res.wall_ms, cfg.config_hash())


def cmd_approximate(cfg: RunConfig, out=None, jobs: int = 1, cache_path=None) -> RunResult:
    """Writes ``expansion.json``, ``coefficients.csv``, ``summary.csv`` and, when adaptive, ``trace.jsonl``."""
    out = output_dir(out)
    with open_model(cfg) as f, run_cache(cfg.dim, jobs, cache_path) as cache:
        res = construct(cfg, f, cache)
        mc = _mc(cfg, f)
        if mc is not None:
            res.mc_l2_error = mc(res.expansion)
    (out / "expansion.json").write_text(res.expansion.to_json(quadrature=cfg.families))
    _write_csv(out / "coefficients.csv", [f"j{i + 1}" for i in range(cfg.dim)] + ["coeff"],
               [(*j, c) for j, c in res.expansion.items()])
    _write_csv(out / "summary.csv", SUMMARY_HEADER, [_summary_row(cfg, res)])
    if res.trace:
        _write_trace(out / "trace.jsonl", res.trace)
    return res


def convergence_rows(cfg: RunConfig, f, cache: EvalCache):
    """``(rows, result)`` for an adaptive run or a total-order level sweep."""
    mc = _mc(cfg, f)
    err = (lambda e: mc(e)) if mc is not None else (lambda e: math.nan)
    if cfg.mode_type == "smolyak_total_order":
        rows, res = [], None
        for n in cfg.mode["levels"]:
            layer = EvalCache(cfg.dim, jobs=cache.jobs, backing=cache)
            res = construct(cfg, f, layer, level=n)
            cache.merge(layer)
            res.mc_l2_error = err(res.expansion)
            rows.append((n, res.evals, res.mc_l2_error, res.eps_global))
        return rows, res
    if cfg.mode_type != "adaptive":
        raise ConfigError("mode.type", "convergence needs 'adaptive' or a 'smolyak_total_order' levels sweep")
    every_step = cfg.checkpoints is None
    cps = list(cfg.checkpoints or [])
    rows = []

    def record(state):
        last = state.trace[-1]
        due = every_step or bool(cps and last.evals_total >= cps[0])
        while cps and last.evals_total >= cps[0]:
            cps.pop(0)
        if due:
            rows.append((last.step, last.evals_total, err(state.expansion()), last.eps_global))

    res = construct(cfg, f, cache, callback=record)
    final = res.trace[-1]
    if not rows or rows[-1][0] != final.step:
        rows.append((final.step, final.evals_total, err(res.expansion), final.eps_global))
    res.mc_l2_error = rows[-1][2]
    return rows, res


def cmd_convergence(cfg: RunConfig, out=None, jobs: int = 1, cache_path=None):
    """Writes ``convergence.csv`` (and ``trace.jsonl`` and ``summary.csv``)."""
    out = output_dir(out)
    with open_model(cfg) as f, run_cache(cfg.dim, jobs, cache_path) as cache:
        rows, res = convergence_rows(cfg, f, cache)
    _write_csv(out / "convergence.csv", CONVERGENCE_HEADER, rows)
    _write_csv(out / "summary.csv", SUMMARY_HEADER, [_summary_row(cfg, res)])
    if res.trace:
        _write_trace(out / "trace.jsonl", res.trace)
    return rows


SUITE_HEADER = ("kind", "instance", "seed", "b", "step", "evals", "l2_error", "eps_global")


def suite_configs(raw: dict, seed: int | None = None):
    """Expand a suite config into one :class:`RunConfig` per Genz instance.

    The ``suite`` field holds ``kinds`` (default: the four smooth kinds),
    ``instances`` per kind, ``decay`` and an optional per-kind ``b`` map.
    Instance ``i`` of every kind uses seed ``seed + i``.
    """
    if not isinstance(raw, dict):
        raise ConfigError("", "config must be a JSON object")
    suite = raw.get("suite")
    if not isinstance(suite, dict):
        raise ConfigError("suite", "required object is missing")
    kinds = suite.get("kinds", [k.value for k in SMOOTH_KINDS])
    if not isinstance(kinds, list) or not kinds:
        raise ConfigError("suite.kinds", "expected a nonempty list of Genz kinds")
    count = suite.get("instances", 1)
    if not isinstance(count, int) or isinstance(count, bool) or count < 1:
        raise ConfigError("suite.instances", "expected a positive integer")
    decay = suite.get("decay", False)
    if not isinstance(decay, bool):
        raise ConfigError("suite.decay", "expected bool")
    bmap = suite.get("b", {})
    if not isinstance(bmap, dict):
        raise ConfigError("suite.b", "expected an object mapping kind to b")
    base = seed if seed is not None else raw.get("seed", 0)
    if not isinstance(base, int) or isinstance(base, bool):
        raise ConfigError("seed", "expected int")
    out = []
    for ki, name in enumerate(kinds):
        try:
            kind = GenzKind.parse(name)
        except ValueError as exc:
            raise ConfigError(f"suite.kinds[{ki}]", str(exc)) from None
        b = bmap.get(kind.value, DEFAULT_B[kind])
        for i in range(count):
            run = {k: v for k, v in raw.items() if k != "suite"}
            run["seed"] = base
            run["model"] = {"type": "genz", "kind": kind.value, "b": b, "seed": base + i,
                            "decay": decay and kind is not GenzKind.DISCONTINUOUS}
            out.append((kind, i, base + i, b, parse_config(run)))
    return out


def cmd_genz_suite(raw: dict, out=None, jobs: int = 1, seed: int | None = None):
    """Writes ``genz_suite.csv`` (one row per checkpoint per instance) and ``instances.jsonl``."""
    runs = suite_configs(raw, seed)
    out = output_dir(out)
    rows, instances = [], []
    for kind, i, s, b, cfg in runs:
        f = cfg.model.genz
        cache = EvalCache(cfg.dim, jobs=jobs)
        conv, _ = convergence_rows(cfg, f, cache)
        rows.extend((kind.value, i, s, b, *r) for r in conv)
        instances.append(json.dumps({"instance": i, **f.to_dict()}))
    _write_csv(out / "genz_suite.csv", SUITE_HEADER, rows)
    (out / "instances.jsonl").write_text("".join(line + "\n" for line in instances))
    return rows


def cmd_aliasing_report(cfg: RunConfig, out=None) -> dict:
    """Writes ``aliasing_report.json`` for a ``direct_quadrature`` mode config.

    ``direct`` lists pairs risking aliasing under direct quadrature on the
    configured basis; ``smolyak`` (total-order quadrature only) lists the
    external pairs not screened out for the Smolyak operator on its range.
    """
    if cfg.mode_type != "direct_quadrature":
        raise ConfigError("mode.type", "aliasing-report needs a 'direct_quadrature' mode")
    out = output_dir(out)
    Q = quadrature_for(cfg)
    basis = basis_for(cfg, Q)
    ext = cfg.mode["external"]
    report = {
        "basis": [list(j) for j in basis],
        "external": [list(j) for j in ext],
        "direct": [[list(j), list(jp)] for j, jp in aliasing_report(basis, Q, "direct", ext)],
        "smolyak": None,
        "config_hash": config_hash(cfg.raw),
    }
    if isinstance(Q, SmolyakSpec):
        rng = smolyak_range(Q).sorted()
        report["smolyak"] = [[list(j), list(jp)] for j, jp in aliasing_report(rng, Q, "smolyak", ext)]
    (out / "aliasing_report.json").write_text(json.dumps(report, indent=1) + "\n")
    return report
