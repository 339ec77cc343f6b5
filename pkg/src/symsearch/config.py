"""Run configuration: a YAML document merged with command-line overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import InvalidParameterError, ParseError
from .graph import FAMILIES, MATRIX_KINDS

FAMILY_PARAMS = {
    "complete": ("n",),
    "balanced_tree": ("r", "M"),
    "truncated_simplex": ("order", "M"),
}
SYMMETRY_SOURCES = ("auto", "family", "search", "file")
BASIS_KINDS = ("stabilizer", "unmarked")


class ConfigError(InvalidParameterError):
    """The configuration is inconsistent or names something unknown."""


@dataclass
class RunConfig:
    family: str | None = None
    params: dict = field(default_factory=dict)
    edges: str | None = None
    marked: int | None = None  # None -> family default
    matrix_kind: str | None = None  # None -> family default
    gamma: float | None = None
    schedule: Any = "predicted"  # "predicted" or [[gamma, duration], ...]
    t_max: float | None = None
    steps: int = 1001
    symmetry: str = "auto"
    generators: str | None = None
    search_cap: int = 512
    search_timeout: float | None = None
    basis: str = "stabilizer"
    gammas: list | None = None
    krylov_dim: int | None = None
    krylov_start: str = "marked"
    json: str | None = None
    csv: str | None = None
    export_edges: str | None = None
    export_generators: str | None = None
    tol_eigen: float = 1e-14
    tol_verify: float = 1e-8
    verify_full: bool = False

    def validate(self) -> "RunConfig":
        if (self.family is None) == (self.edges is None):
            raise ConfigError("give exactly one graph source: a family or an edge-list path")
        if self.family is not None:
            if self.family not in FAMILY_PARAMS:
                known = ", ".join(f for f in FAMILIES if f != "custom")
                raise ConfigError(f"unknown family {self.family!r} (known: {known})")
            missing = [p for p in FAMILY_PARAMS[self.family] if p not in self.params]
            if self.family == "balanced_tree" and missing == ["r"]:
                self.params["r"] = 2
                missing = []
            if self.family == "truncated_simplex" and missing == ["order"]:
                self.params["order"] = 2
                missing = []
            if missing:
                raise ConfigError(f"family {self.family} needs parameter(s) {', '.join(missing)}")
            extra = set(self.params) - set(FAMILY_PARAMS[self.family])
            if extra:
                raise ConfigError(f"family {self.family} does not take {', '.join(sorted(extra))}")
            for k, v in self.params.items():
                if isinstance(v, bool) or not isinstance(v, int):
                    raise ConfigError(f"graph parameter {k} must be an integer")
        if self.matrix_kind is not None and self.matrix_kind not in MATRIX_KINDS:
            raise ConfigError(f"matrix_kind must be one of {MATRIX_KINDS}")
        if self.symmetry not in SYMMETRY_SOURCES:
            raise ConfigError(f"symmetry source must be one of {SYMMETRY_SOURCES}")
        if self.symmetry == "file" and not self.generators:
            raise ConfigError("symmetry source 'file' needs a generators path")
        if self.basis not in BASIS_KINDS:
            raise ConfigError(f"basis must be one of {BASIS_KINDS}")
        if self.krylov_start not in ("marked", "uniform"):
            raise ConfigError("krylov start must be 'marked' or 'uniform'")
        if isinstance(self.steps, bool) or not isinstance(self.steps, int) or self.steps < 2:
            raise ConfigError("time grid needs steps >= 2")
        for name in ("tol_eigen", "tol_verify"):
            tol = getattr(self, name)
            if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not tol >= 0:
                raise ConfigError(f"{name} must be a nonnegative number")
        if self.t_max is not None and not self.t_max > 0:
            raise ConfigError("t_max must be positive")
        if self.schedule != "predicted":
            self.schedule = parse_stages(self.schedule)
        return self

    def stages(self) -> list[tuple[float, float]] | None:
        return None if self.schedule == "predicted" else list(self.schedule)


def parse_stages(value) -> list[tuple[float, float]]:
    """Explicit stages from ``[[gamma, T], ...]`` or the flag form ``"g:T,g:T"``."""
    if isinstance(value, str):
        try:
            value = [tuple(float(x) for x in part.split(":")) for part in value.split(",") if part.strip()]
        except ValueError:
            raise ConfigError(f"cannot parse schedule {value!r}; expected 'gamma:T,gamma:T'") from None
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError("schedule must be 'predicted' or a nonempty list of [gamma, duration]")
    out = []
    for stage in value:
        if isinstance(stage, dict):
            stage = (stage.get("gamma"), stage.get("duration"))
        if not isinstance(stage, (list, tuple)) or len(stage) != 2:
            raise ConfigError(f"stage {stage!r} is not a [gamma, duration] pair")
        try:
            gamma, duration = float(stage[0]), float(stage[1])
        except (TypeError, ValueError):
            raise ConfigError(f"stage {stage!r} is not numeric") from None
        out.append((gamma, duration))
    return out


_SECTIONS = {
    "graph": None,
    "marked": "marked",
    "matrix_kind": "matrix_kind",
    "gamma": "gamma",
    "gammas": "gammas",
    "schedule": "schedule",
    "time": {"t_max": "t_max", "steps": "steps"},
    "symmetry": {"source": "symmetry", "generators": "generators", "cap": "search_cap",
                 "timeout": "search_timeout", "basis": "basis"},
    "krylov": {"dim": "krylov_dim", "start": "krylov_start"},
    "output": {"json": "json", "csv": "csv", "edges": "export_edges", "generators": "export_generators"},
    "tolerances": {"eigen": "tol_eigen", "verify": "tol_verify"},
    "verify_full": "verify_full",
}


# YAML 1.1 reads ``1e-8`` (no dot) as a string, so these keys accept numeric strings
_FLOAT_FIELDS = ("gamma", "t_max", "search_timeout", "tol_eigen", "tol_verify")


def _coerce_floats(cfg: RunConfig) -> None:
    for name in _FLOAT_FIELDS:
        value = getattr(cfg, name)
        if isinstance(value, str):
            try:
                setattr(cfg, name, float(value))
            except ValueError:
                raise ConfigError(f"{name} must be a number, got {value!r}") from None


def config_from_mapping(doc: dict | None) -> RunConfig:
    """Map the nested document onto a :class:`RunConfig`; unknown keys are errors."""
    cfg = RunConfig()
    doc = doc or {}
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    for key, value in doc.items():
        if key not in _SECTIONS:
            raise ConfigError(f"unknown config key {key!r}")
        target = _SECTIONS[key]
        if key == "graph":
            if not isinstance(value, dict):
                raise ConfigError("graph must be a mapping")
            value = dict(value)
            cfg.family = value.pop("family", None)
            cfg.edges = value.pop("edges", None)
            cfg.params = value
        elif isinstance(target, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{key} must be a mapping")
            for sub, v in value.items():
                if sub not in target:
                    raise ConfigError(f"unknown config key {key}.{sub}")
                setattr(cfg, target[sub], v)
        else:
            if key == "marked" and value == "default":
                value = None
            setattr(cfg, target, value)
    _coerce_floats(cfg)
    return cfg


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ParseError(f"invalid YAML: {getattr(exc, 'problem', exc)}",
                         None if mark is None else mark.line + 1) from None
    return config_from_mapping(doc)


def apply_overrides(cfg: RunConfig, overrides: dict[str, Any]) -> RunConfig:
    """Set every non-None override; graph parameters go into ``params``."""
    names = {f.name for f in dataclasses.fields(cfg)}
    for key, value in overrides.items():
        if value is None:
            continue
        if key in ("n", "r", "M", "order"):
            cfg.params[key] = value
        elif key == "family":
            if cfg.family != value:
                cfg.params = {k: v for k, v in cfg.params.items() if k in FAMILY_PARAMS.get(value, ())}
            cfg.family, cfg.edges = value, None
        elif key == "edges":
            cfg.edges, cfg.family, cfg.params = value, None, {}
        elif key in names:
            setattr(cfg, key, value)
        else:
            raise ConfigError(f"unknown override {key!r}")
    return cfg
