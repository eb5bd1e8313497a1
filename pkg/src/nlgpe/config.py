"""Flat dotted-key configuration: parsing, environment overrides, validation.

A config file holds one ``key = value`` per line; ``#`` starts a comment.
Lists are comma separated.  Any key can be overridden from the environment
as ``NLGPE_`` + the key upper-cased with ``.`` replaced by ``__``, e.g.
``NLGPE_MODEL__KAPPA=0.1``.  The full schema is in docs/schema.md.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math
import os
import re
from typing import Callable, Mapping

from .closedform import MAX_NU
from .errors import ConfigError
from .model import QuadraticModel

ENV_PREFIX = "NLGPE_"
WORKFLOWS = ("exact", "evolve", "verify", "sweep")
MODEL_KEYS = ("mu", "rho", "sigma", "a", "b", "c", "kappa", "hbar")

# the reference model: every coupling on, comfortably oscillatory
REFERENCE = QuadraticModel(mu=1.0, rho=0.3, sigma=1.2, a=0.5, b=0.3, c=0.4, kappa=0.2, hbar=1.0)

_COMPLEX = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
                      r"([+-])((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)i\s*$")


def parse_complex(text: str) -> complex:
    """Parse ``re+imi`` / ``re-imi`` (sign required); a bare real is also accepted."""
    m = _COMPLEX.match(text)
    if m:
        re_, sign, im = m.groups()
        return complex(float(re_), float(im) if sign == "+" else -float(im))
    try:
        return complex(_real(text), 0.0)
    except ValueError:
        raise ValueError(f"expected a complex literal like 0.5+0.5i, got {text!r}") from None


def _real(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {text!r}")
    return v


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"expected an integer, got {text!r}") from None


def _list(item: Callable) -> Callable:
    def parse(text: str):
        parts = [p.strip() for p in text.split(",")]
        if parts == [""]:
            return ()
        if any(p == "" for p in parts):
            raise ValueError("empty list entry")
        return tuple(item(p) for p in parts)
    return parse


def _workflow(text: str) -> str:
    if text not in WORKFLOWS:
        raise ValueError(f"workflow must be one of {', '.join(WORKFLOWS)}, got {text!r}")
    return text


def _sweep_key(text: str) -> str:
    if not text.startswith("model.") or text[6:] not in MODEL_KEYS:
        raise ValueError(f"sweep.key must be a model.* key, got {text!r}")
    return text


def _optional(parse: Callable) -> Callable:
    return lambda text: None if text.lower() in ("", "auto", "none") else parse(text)


PARSERS: dict[str, Callable[[str], object]] = {
    **{f"model.{k}": _real for k in MODEL_KEYS},
    "grid.half_width": _optional(_real),
    "grid.points": _optional(_int),
    "evolve.dt": _optional(_real),
    "evolve.t_final": _optional(_real),
    "evolve.record_every": _int,
    "task.workflow": _optional(_workflow),
    "task.nu": _list(_int),
    "task.alpha": _list(parse_complex),
    "task.times": _list(_real),
    "task.out": str,
    "sweep.key": _sweep_key,
    "sweep.values": _list(_real),
    "verify.oracle_kappa": _optional(_real),
    "verify.criteria": _list(_int),
    "verify.seed": _int,
    "run.workers": _int,
}

DEFAULTS: dict[str, object] = {
    **{f"model.{k}": getattr(REFERENCE, k) for k in MODEL_KEYS},
    "grid.half_width": None,
    "grid.points": None,
    "evolve.dt": None,
    "evolve.t_final": None,
    "evolve.record_every": 100,
    "task.workflow": None,
    "task.nu": (0,),
    "task.alpha": (0j,),
    "task.times": (0.0,),
    "task.out": "out",
    "sweep.key": "model.kappa",
    "sweep.values": (),
    "verify.oracle_kappa": None,
    "verify.criteria": tuple(range(1, 13)),
    "verify.seed": 12345,
    "run.workers": 1,
}


@dataclass(frozen=True)
class RunConfig:
    model: QuadraticModel
    grid_half_width: float | None
    grid_points: int | None
    dt: float | None
    t_final: float | None
    record_every: int
    workflow: str | None
    nu: tuple
    alpha: tuple
    times: tuple
    out: str
    sweep_key: str
    sweep_values: tuple
    oracle_kappa: float | None
    criteria: tuple
    seed: int
    workers: int
    values: Mapping[str, object] = field(repr=False, compare=False, default_factory=dict)
    origins: Mapping[str, str] = field(repr=False, compare=False, default_factory=dict)

    def oracle_model(self) -> QuadraticModel | None:
        if self.oracle_kappa is None:
            return None
        return self.model.replace(kappa=self.oracle_kappa)

    def dump(self) -> str:
        """Canonical ``key = value`` text of every setting."""
        return "".join(f"{k} = {format_value(self.values[k])}\n" for k in sorted(self.values))


def format_value(v) -> str:
    if v is None:
        return "auto"
    if isinstance(v, tuple):
        return ", ".join(format_value(x) for x in v)
    if isinstance(v, complex):
        return f"{v.real:.17g}{'+' if v.imag >= 0 else '-'}{abs(v.imag):.17g}i"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _parse_value(key: str, text: str, where: str):
    if key not in PARSERS:
        raise ConfigError(f"{where}: unknown key {key!r}")
    try:
        return PARSERS[key](text.strip())
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key}: {exc}") from None


def parse_text(text: str, source: str = "<config>"):
    """Parse config text into ``(values, origins)`` dicts."""
    values, origins = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ConfigError(f"{where}: duplicate key {key!r} (first set at {origins[key]})")
        values[key] = _parse_value(key, val, where)
        origins[key] = where
    return values, origins


def env_overrides(environ: Mapping[str, str]):
    values, origins = {}, {}
    for name in sorted(environ):
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX):].lower().replace("__", ".")
        where = f"environment {name}"
        values[key] = _parse_value(key, environ[name], where)
        origins[key] = where
    return values, origins


def load_config(path=None, environ: Mapping[str, str] | None = None,
                overrides: Mapping[str, object] | None = None) -> RunConfig:
    """Merge defaults, the file at ``path``, environment and explicit overrides."""
    values = dict(DEFAULTS)
    origins = {k: "default" for k in DEFAULTS}
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        v, o = parse_text(text, str(path))
        values.update(v), origins.update(o)
    v, o = env_overrides(os.environ if environ is None else environ)
    values.update(v), origins.update(o)
    for k, val in (overrides or {}).items():
        values[k] = val
        origins[k] = "command line"
    return validate(values, origins)


def _fail(origins, key, msg):
    raise ConfigError(f"{origins.get(key, 'default')}: {key}: {msg}")


def validate(values: dict, origins: dict) -> RunConfig:
    try:
        model = QuadraticModel(**{k: values[f"model.{k}"] for k in MODEL_KEYS})
    except ValueError as exc:
        key = "model.hbar" if "hbar" in str(exc) else "model.mu"
        _fail(origins, key, str(exc))
    nu = values["task.nu"]
    if not nu:
        _fail(origins, "task.nu", "list must not be empty")
    for n in nu:
        if not 0 <= n <= MAX_NU:
            _fail(origins, "task.nu", f"entries must be integers in [0, {MAX_NU}], got {n}")
    if not values["task.alpha"]:
        _fail(origins, "task.alpha", "list must not be empty")
    if not values["task.times"]:
        _fail(origins, "task.times", "list must not be empty")
    for key in ("grid.half_width", "evolve.dt", "evolve.t_final"):
        if values[key] is not None and not values[key] > 0:
            _fail(origins, key, "must be positive")
    pts = values["grid.points"]
    if pts is not None and (pts < 2 or pts & (pts - 1)):
        _fail(origins, "grid.points", f"must be a power of two, got {pts}")
    if values["evolve.record_every"] < 1:
        _fail(origins, "evolve.record_every", "must be a positive integer")
    if values["run.workers"] < 1:
        _fail(origins, "run.workers", "must be a positive integer")
    for c in values["verify.criteria"]:
        if not 1 <= c <= 12:
            _fail(origins, "verify.criteria", f"criteria are numbered 1..12, got {c}")
    return RunConfig(
        model=model, grid_half_width=values["grid.half_width"], grid_points=pts,
        dt=values["evolve.dt"], t_final=values["evolve.t_final"],
        record_every=values["evolve.record_every"], workflow=values["task.workflow"],
        nu=tuple(nu), alpha=tuple(values["task.alpha"]), times=tuple(values["task.times"]),
        out=values["task.out"], sweep_key=values["sweep.key"],
        sweep_values=tuple(values["sweep.values"]), oracle_kappa=values["verify.oracle_kappa"],
        criteria=tuple(values["verify.criteria"]), seed=values["verify.seed"],
        workers=values["run.workers"], values=dict(values), origins=dict(origins))
