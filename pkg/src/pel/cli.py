"""Command-line runner: ``pel <task> [--config FILE] [overrides]``.

Exit status is 0 on success, 1 when a verification criterion (or a
hypothesis check under ``--strict``) fails, and 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Any

from . import bounds, entropy as ent, verify
from .distributions import label_from_json
from .library import builtin_spec, builtin_specs
from .patterns import EnumerationCapError, format_pattern, pattern_of
from .processes import IID, MixedMarkovModel, NonErgodicError, simulate, spec_from_json, spec_id, spec_to_json

TASKS = ("pattern", "exact-entropy", "mc-entropy", "rate", "bounds", "growth", "verify-all")
FORMATS = ("csv", "json")
NEEDS_SPEC = {"exact-entropy", "mc-entropy", "rate", "bounds"}
OVERRIDABLE = ("spec", "seed", "samples", "n_max", "out", "format", "workers", "estimator", "eps", "delta", "B", "input", "n_grid")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    task: str
    spec: Any = None
    seed: int | None = None
    samples: int | None = None
    n_max: int | None = None
    estimator: str = "plugin"
    eps: float | None = None
    delta: float | None = None
    B: list | None = None
    n_grid: list[int] | None = None
    input: str | None = None
    out: str | None = None
    format: str = "csv"
    workers: int = 1
    strict: bool = False
    base_dir: str = field(default=".", repr=False)

    def validate(self) -> None:
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.task in NEEDS_SPEC and self.spec is None:
            raise ConfigError(f"task {self.task} needs a spec")
        if self.task == "mc-entropy":
            for name in ("seed", "samples", "n_max"):
                if getattr(self, name) is None:
                    raise ConfigError(f"mc-entropy needs an explicit {name}")
            if self.estimator not in ent.ESTIMATORS:
                raise ConfigError(f"estimator must be one of {ent.ESTIMATORS}")
        if self.task == "exact-entropy" and self.n_max is None:
            raise ConfigError("exact-entropy needs n_max")
        if self.task == "pattern" and self.input is None and (self.spec is None or self.seed is None or self.n_max is None):
            raise ConfigError("pattern needs an input file, or a spec with seed and n_max")
        if self.task == "growth" and self.eps is None:
            raise ConfigError("growth needs eps")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def load_config(path: str | None, task: str) -> ExperimentConfig:
    raw: dict = {}
    base = "."
    if path:
        with open(path, encoding="utf-8") as fp:
            raw = json.load(fp)
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        base = os.path.dirname(os.path.abspath(path))
        if raw.get("task", task) != task:
            raise ConfigError(f"config is for task {raw['task']!r}, not {task!r}")
    raw = {k.replace("-", "_"): v for k, v in raw.items()}
    raw["task"] = task
    known = set(ExperimentConfig.__dataclass_fields__) - {"base_dir"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(base_dir=base, **raw)


def resolve_spec(ref: Any, base_dir: str = "."):
    """A builtin name, a path to a JSON spec file, or an inline JSON object."""
    if isinstance(ref, dict):
        return spec_from_json(ref)
    if isinstance(ref, str):
        if ref in builtin_specs():
            return builtin_spec(ref)
        path = ref if os.path.isabs(ref) else os.path.join(base_dir, ref)
        if os.path.exists(path):
            with open(path, encoding="utf-8") as fp:
                return spec_from_json(json.load(fp))
        raise ConfigError(f"spec {ref!r} is neither a builtin name nor a file")
    raise ConfigError("spec must be a name, a path or an object")


# --------------------------------------------------------------------------
# tasks


def _csv(header: str, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(header + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _note(msg: str) -> None:
    sys.stderr.write(f"pel: {msg}\n")


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def task_pattern(cfg: ExperimentConfig) -> tuple[str, int]:
    if cfg.input is not None:
        path = cfg.input if os.path.isabs(cfg.input) else os.path.join(cfg.base_dir, cfg.input)
        with open(path, encoding="utf-8") as fp:
            lines = [line.rstrip("\n") for line in fp]
        pats = [pattern_of(line) for line in lines]
    else:
        spec = resolve_spec(cfg.spec, cfg.base_dir)
        count = cfg.samples or 1
        pats = [pattern_of(simulate(spec, cfg.n_max, cfg.seed + i)) for i in range(count)]
    if cfg.format == "json":
        return _json([list(p) for p in pats]), 0
    return "".join(format_pattern(p) + "\n" for p in pats), 0


def task_exact(cfg: ExperimentConfig) -> tuple[str, int]:
    spec = resolve_spec(cfg.spec, cfg.base_dir)
    rep = ent.exact_profile(spec, cfg.n_max)
    return (rep.to_json() if cfg.format == "json" else rep.to_csv()), 0


def task_mc(cfg: ExperimentConfig) -> tuple[str, int]:
    spec = resolve_spec(cfg.spec, cfg.base_dir)
    rep = ent.mc_pattern_entropy(spec, cfg.n_max, cfg.samples, cfg.seed, cfg.estimator, workers=cfg.workers)
    return (rep.to_json() if cfg.format == "json" else rep.to_csv()), 0


def task_rate(cfg: ExperimentConfig) -> tuple[str, int]:
    spec = resolve_spec(cfg.spec, cfg.base_dir)
    res = ent.theoretical_rate(spec)
    for w in res.warnings:
        _note(f"hypothesis check: {w}")
    status = 1 if (cfg.strict and res.warnings) else 0
    sid = spec_id(spec)
    rounded = "" if res.value is None else f"{res.value:.5f}"
    if cfg.format == "json":
        return _json({"spec_id": sid, "rate_rounded": rounded, **res.as_dict()}), status
    cols = ("spec_id", "rate_bits", "rate_rounded", "tilde_rate_bits", "lower_bits", "upper_bits", "basis", "warnings")
    fmt = lambda v: "" if v is None else repr(v)  # noqa: E731
    row = (sid, fmt(res.value), rounded, fmt(res.tilde_rate), fmt(res.lower), fmt(res.upper), res.basis, "; ".join(res.warnings))
    return _csv("# pel-rate/1", cols, [row]), status


def task_bounds(cfg: ExperimentConfig) -> tuple[str, int]:
    spec = resolve_spec(cfg.spec, cfg.base_dir)
    if isinstance(spec, IID):
        if cfg.n_max is None:
            raise ConfigError("bounds on an iid spec needs n_max")
        dist = spec.dist
        B = [label_from_json(b) for b in cfg.B] if cfg.B is not None else list(dist.labels)
        Bs = " ".join(str(b) for b in B)
        rows = []
        for n in range(1, cfg.n_max + 1):
            v = bounds.clumped_bracket(dist, B, n)
            rows.append((n, Bs, repr(v.bits), int(v.vacuous)))
        if cfg.format == "json":
            return _json({"spec_id": spec_id(spec), "B": Bs, "rows": [dict(zip(("n", "B", "bound_bits", "vacuous"), r)) for r in rows]}), 0
        return _csv("# pel-clumped-bound/1", ("n", "B", "bound_bits", "vacuous"), rows), 0
    if isinstance(spec, MixedMarkovModel):
        rows = []
        for x in spec.atoms:
            lo, hi = bounds.waiting_time_extremes(spec, x)
            rows.append((str(x), str(lo), str(hi), repr(bounds.waiting_time_entropy_bound(lo, hi))))
        cols = ("atom", "d_min", "d_max", "waiting_time_bound_bits")
        if cfg.format == "json":
            return _json({"spec_id": spec_id(spec), "rows": [dict(zip(cols, r)) for r in rows]}), 0
        return _csv("# pel-waiting-time/1", cols, rows), 0
    raise ConfigError("bounds needs an iid or mixed_markov spec")


def task_growth(cfg: ExperimentConfig) -> tuple[str, int]:
    params = bounds.growth_distribution(cfg.eps, cfg.delta)
    grid = cfg.n_grid or [10**k for k in range(1, 7)]
    curve = bounds.theorem5_curve(params, grid)
    if cfg.format == "json":
        payload = {
            "eps": params.eps,
            "delta": params.delta,
            "c": params.c,
            "c_enclosure": [params.c_lo, params.c_hi],
            "truncation": params.truncation,
            "points": [{"n": n, "bound_bits": b, "argmax_l": l} for n, b, l in curve.points],
        }
        return _json(payload), 0
    return curve.to_csv(), 0


def task_verify(cfg: ExperimentConfig) -> tuple[str, int]:
    seed = verify.VERIFY_SEED if cfg.seed is None else cfg.seed
    samples = cfg.samples or 100_000
    results = verify.run_all(seed, samples, cfg.workers)
    text = verify.render(results, "json" if cfg.format == "json" else "text", seed)
    return text, 0 if all(r.passed for r in results) else 1


HANDLERS = {
    "pattern": task_pattern,
    "exact-entropy": task_exact,
    "mc-entropy": task_mc,
    "rate": task_rate,
    "bounds": task_bounds,
    "growth": task_growth,
    "verify-all": task_verify,
}


def run(cfg: ExperimentConfig) -> int:
    cfg.validate()
    text, status = HANDLERS[cfg.task](cfg)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pel", description="Pattern entropy experiments.")
    ap.add_argument("task", choices=TASKS)
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--spec", help="builtin spec name or JSON spec file")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--samples", type=int)
    ap.add_argument("--n-max", dest="n_max", type=int)
    ap.add_argument("--out")
    ap.add_argument("--format", choices=FORMATS)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--estimator", choices=ent.ESTIMATORS)
    ap.add_argument("--eps", type=float)
    ap.add_argument("--delta", type=float)
    ap.add_argument("--B", nargs="+", help="atom labels for the clumped-entropy bound")
    ap.add_argument("--n-grid", dest="n_grid", type=int, nargs="+")
    ap.add_argument("--input", help="text file for the pattern task")
    ap.add_argument("--strict", action="store_true", help="treat hypothesis warnings as failures")
    ap.add_argument("--list-specs", action="store_true", help="print builtin spec names as JSON and exit")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.list_specs:
        sys.stdout.write(_json({k: spec_to_json(v) for k, v in builtin_specs().items()}))
        return 0
    try:
        cfg = load_config(args.config, args.task)
        for name in OVERRIDABLE:
            v = getattr(args, name)
            if v is not None:
                setattr(cfg, name, v)
        cfg.strict = cfg.strict or args.strict
        return run(cfg)
    except (ConfigError, EnumerationCapError, NonErgodicError, ValueError, KeyError, TypeError, OSError) as exc:
        _note(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
