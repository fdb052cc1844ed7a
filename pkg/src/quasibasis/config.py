"""Run configuration: a small versioned TOML document.

Example::

    spec = "opexpr-v1"
    seed = 7

    [model]
    name = "example3"          # or T_expr = "mul(1 + x^2)"
    alpha = "harmonic"

    [run]
    N = [32, 64, 128]
    quadrature_order = "auto"
    inverse_mode = "matrix"

    [tolerances]
    biorthogonality = 1e-9

    [test_vectors]
    profiles = ["basis_0", "geometric(0.5)", "gaussian(8)"]
    pairs = 50

    [output]
    path = "reports"
    format = "json"
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field, replace

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from . import hermite
from .errors import ConfigurationError, ExprError
from .models import MODEL_NAMES
from .operators import MAX_DIM
from .opexpr import VERSION, parse
from .riesz import parse_profile

DEFAULT_PROFILES = ("basis_0", "geometric(0.5)", "gaussian(8)")
INVERSE_MODES = ("matrix", "kernel")
FORMATS = ("json", "csv")


@dataclass(frozen=True)
class RunConfig:
    model: object = "example1"
    N: tuple = (16,)
    alpha: object = None
    tolerances: dict = field(default_factory=dict)
    quadrature_order: object = "auto"
    test_vectors: tuple = DEFAULT_PROFILES
    pairs: int = 50
    inverse_mode: str = "matrix"
    output_path: str = "reports"
    output_format: str = "json"
    seed: int = 0

    def __post_init__(self):
        validate(self)

    @property
    def model_name(self):
        return self.model if isinstance(self.model, str) else "custom"

    def rule_for(self, N):
        order = hermite.default_order(N) if self.quadrature_order == "auto" else self.quadrature_order
        return hermite.gauss_hermite_rule(order)

    def tolerance(self, check, default):
        return float(self.tolerances.get(check, default))

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


def validate(cfg):
    m = cfg.model
    if isinstance(m, str):
        if m not in MODEL_NAMES:
            raise ConfigurationError(f"unknown model {m!r}; choose from {', '.join(MODEL_NAMES)}")
    elif isinstance(m, dict):
        if "T_expr" not in m:
            raise ConfigurationError("custom model needs a T_expr")
        try:
            parse(m["T_expr"])
        except ExprError as exc:
            raise ConfigurationError(f"model.T_expr: {exc}") from exc
    else:
        raise ConfigurationError("model must be a name or a table with T_expr")
    Ns = cfg.N
    if not Ns or any(not isinstance(n, int) or isinstance(n, bool) or not 1 <= n <= MAX_DIM for n in Ns):
        raise ConfigurationError(f"N values must be integers in [1, {MAX_DIM}], got {list(Ns)}")
    for k, v in cfg.tolerances.items():
        if not isinstance(v, (int, float)) or not v > 0:
            raise ConfigurationError(f"tolerance {k!r} must be positive, got {v!r}")
    q = cfg.quadrature_order
    if q != "auto":
        if not isinstance(q, int) or isinstance(q, bool) or not 1 <= q <= hermite.MAX_ORDER:
            raise ConfigurationError(f"quadrature_order must be 'auto' or an integer in [1, {hermite.MAX_ORDER}]")
    for p in cfg.test_vectors:
        parse_profile(p)
    if not isinstance(cfg.pairs, int) or cfg.pairs < 1:
        raise ConfigurationError("test_vectors.pairs must be a positive integer")
    if cfg.inverse_mode not in INVERSE_MODES:
        raise ConfigurationError(f"inverse_mode must be one of {INVERSE_MODES}")
    if cfg.output_format not in FORMATS:
        raise ConfigurationError(f"output format must be one of {FORMATS}")
    if not isinstance(cfg.seed, int) or isinstance(cfg.seed, bool) or cfg.seed < 0:
        raise ConfigurationError("seed must be a nonnegative integer")


def parse_N(text):
    """'32,64,128' or '64' -> tuple of ints."""
    try:
        vals = tuple(int(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise ConfigurationError(f"bad N list {text!r}") from None
    if not vals:
        raise ConfigurationError("empty N list")
    return vals


def from_dict(doc):
    doc = dict(doc)
    if doc.get("spec") != VERSION:
        raise ConfigurationError(f'config header must be spec = "{VERSION}", got {doc.get("spec")!r}')
    model = doc.get("model", {})
    run = doc.get("run", {})
    tv = doc.get("test_vectors", {})
    out = doc.get("output", {})
    if isinstance(model, str):
        model = {"name": model}
    name = model.get("name")
    mspec = name if name is not None else {"T_expr": model.get("T_expr")}
    if name is None and model.get("T_expr") is None:
        raise ConfigurationError("[model] needs name or T_expr")
    Ns = run.get("N", [16])
    Ns = (Ns,) if isinstance(Ns, int) else tuple(Ns)
    return RunConfig(
        model=mspec,
        N=Ns,
        alpha=model.get("alpha"),
        tolerances=dict(doc.get("tolerances", {})),
        quadrature_order=run.get("quadrature_order", "auto"),
        test_vectors=tuple(tv.get("profiles", DEFAULT_PROFILES)),
        pairs=tv.get("pairs", 50),
        inverse_mode=run.get("inverse_mode", "matrix"),
        output_path=out.get("path", "reports"),
        output_format=out.get("format", "json"),
        seed=doc.get("seed", 0),
    )


def to_dict(cfg):
    model = {"name": cfg.model} if isinstance(cfg.model, str) else {"T_expr": cfg.model["T_expr"]}
    if cfg.alpha is not None:
        model["alpha"] = cfg.alpha if isinstance(cfg.alpha, str) else list(cfg.alpha)
    return {
        "spec": VERSION,
        "seed": cfg.seed,
        "model": model,
        "run": {"N": list(cfg.N), "quadrature_order": cfg.quadrature_order,
                "inverse_mode": cfg.inverse_mode},
        "tolerances": dict(sorted(cfg.tolerances.items())),
        "test_vectors": {"profiles": list(cfg.test_vectors), "pairs": cfg.pairs},
        "output": {"path": cfg.output_path, "format": cfg.output_format},
    }


def loads(text):
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"config is not valid TOML: {exc}") from exc
    return from_dict(doc)


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc


def dumps(cfg):
    return tomli_w.dumps(to_dict(cfg))


def config_hash(cfg):
    """First 16 hex digits of the SHA-256 of the canonical JSON form.

    The output section is left out: where reports go does not change them.
    """
    doc = to_dict(cfg)
    doc.pop("output")
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


__all__ = ["RunConfig", "config_hash", "dumps", "from_dict", "load", "loads",
           "parse_N", "to_dict", "validate"]
