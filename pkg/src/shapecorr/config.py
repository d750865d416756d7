"""Run configuration with a flat ``key=value`` file form."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import InputError
from .evaluation import DEFAULT_THRESHOLD
from .integrators import DEFAULT_EPSILON, DEFAULT_M0, DEFAULT_T_M, MODEL_NAMES, SCHEME_NAMES
from .spectrum import DEFAULT_R

WORKERS_ENV = "SHAPECORR_WORKERS"


@dataclass
class RunConfig:
    model: str = "heat"
    scheme: str = "twizell"
    r: int = DEFAULT_R
    m0: int = DEFAULT_M0
    c: float = 1.0
    t_m: float = DEFAULT_T_M
    epsilon: float = DEFAULT_EPSILON
    psi: float | None = None
    threshold: float = DEFAULT_THRESHOLD
    lambda_max: float | None = None
    mesh: str = ""
    target_mesh: str = ""
    cache_dir: str = "cache"
    out: str = ""
    truth: str = ""
    query: str = ""
    target: str = ""
    matching: str = ""
    workers: int = 1

    def validate(self) -> "RunConfig":
        if self.model not in MODEL_NAMES:
            raise InputError(f"model must be one of {MODEL_NAMES}, got {self.model!r}")
        if self.scheme not in SCHEME_NAMES:
            raise InputError(f"scheme must be one of {SCHEME_NAMES}, got {self.scheme!r}")
        if self.r < 2:
            raise InputError(f"r must be at least 2, got {self.r}")
        if self.m0 < 1:
            raise InputError(f"m0 must be positive, got {self.m0}")
        for key in ("c", "t_m", "epsilon"):
            if not getattr(self, key) > 0:
                raise InputError(f"{key} must be positive, got {getattr(self, key)}")
        if round(self.m0 / self.c) < 1:
            raise InputError(f"m0={self.m0} with c={self.c} leaves no time steps")
        if self.model == "dampedwave" and not (self.psi is not None and self.psi > 0):
            raise InputError("dampedwave requires psi > 0")
        if not self.threshold >= 0:
            raise InputError(f"threshold must be non-negative, got {self.threshold}")
        if self.lambda_max is not None and not self.lambda_max > 0:
            raise InputError(f"lambda_max must be positive, got {self.lambda_max}")
        if self.workers < 1:
            raise InputError(f"workers must be at least 1, got {self.workers}")
        return self

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name}={'' if v is None else repr(v) if isinstance(v, float) else v}")
        return "\n".join(lines) + "\n"

    def as_comment(self) -> str:
        return "".join(f"# {line}\n" for line in self.to_text().splitlines())

    @classmethod
    def from_text(cls, text: str, source: str = "<config>") -> "RunConfig":
        pairs = parse_pairs(text, source)
        return cls().updated({k: v for k, v in pairs.items() if not k.startswith("meta.")})

    def updated(self, values: dict[str, str | object]) -> "RunConfig":
        kinds = {f.name: f.type for f in fields(self)}
        out = {}
        for key, raw in values.items():
            if key not in kinds:
                raise InputError(f"unknown config key {key!r}")
            out[key] = _coerce(key, kinds[key], raw)
        return dataclasses.replace(self, **out)


def parse_pairs(text: str, source: str = "<config>") -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if s.startswith("# "):
            s = s[2:].strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise InputError(f"{source}:{lineno}: expected key=value, got {line!r}")
        key, value = s.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _coerce(key: str, kind: str, raw):
    if not isinstance(raw, str):
        return raw
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "float | None":
            return None if raw == "" else float(raw)
    except ValueError:
        raise InputError(f"config key {key!r}: cannot parse {raw!r} as {kind}") from None
    return raw


def load_config(path) -> RunConfig:
    return RunConfig.from_text(Path(path).read_text(), str(path))


def env_workers() -> int | None:
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
