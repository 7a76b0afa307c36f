"""Run configuration: one TOML or JSON file plus GOVMINE_ env overrides."""

from __future__ import annotations

import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

POLICY_MODE_FULL = "full"
POLICY_MODE_REDUCED = "reduced"
PROVIDERS_FALLBACK = "fallback"
PROVIDERS_REMOTE = "remote"


@dataclass
class PathsConfig:
    mailboxes: dict[str, str] = field(default_factory=dict)   # project_id -> archive path
    policies: str = ""
    covariates: str = ""


@dataclass
class FilterSettings:
    bot_senders: list[str] = field(default_factory=list)
    report_templates: list[str] = field(default_factory=list)


@dataclass
class PolicyConfig:
    mode: str = POLICY_MODE_FULL
    excluded_sections: list[list[str]] = field(default_factory=list)

    def __post_init__(self):
        if self.mode not in (POLICY_MODE_FULL, POLICY_MODE_REDUCED):
            raise ValueError(f"unknown policy mode: {self.mode}")


@dataclass
class ProvidersConfig:
    mode: str = PROVIDERS_FALLBACK
    remote_url: str = "http://127.0.0.1:8731"
    embed_dim: int = 512
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (PROVIDERS_FALLBACK, PROVIDERS_REMOTE):
            raise ValueError(f"unknown providers mode: {self.mode}")


@dataclass
class ClusterConfig:
    min_cluster_size: list[int] = field(default_factory=lambda: list(range(10, 101, 10)))
    min_samples: list[int] = field(default_factory=lambda: list(range(10, 101, 10)))
    n_neighbors: list[int] = field(default_factory=lambda: list(range(10, 101, 10)))
    reduce_dim: int | None = None
    seed_threshold: float | None = None    # None -> provider-mode default
    coherence_window: int = 110
    top_n_words: int = 10
    seed: int = 0


@dataclass
class AnalyticsConfig:
    vif_threshold: float = 5.0
    cv_folds: int = 5
    grouped_lasso: bool = False
    impute_max_iter: int = 20
    impute_tol: float = 1e-8


@dataclass
class Config:
    paths: PathsConfig = field(default_factory=PathsConfig)
    filters: FilterSettings = field(default_factory=FilterSettings)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    providers: ProvidersConfig = field(default_factory=ProvidersConfig)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    analytics: AnalyticsConfig = field(default_factory=AnalyticsConfig)

    def to_dict(self) -> dict:
        return asdict(self)


_SECTIONS = {
    "paths": PathsConfig,
    "filters": FilterSettings,
    "policy": PolicyConfig,
    "providers": ProvidersConfig,
    "cluster": ClusterConfig,
    "analytics": AnalyticsConfig,
}


def _coerce(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _env_overrides(environ: dict[str, str]) -> dict[str, dict]:
    out: dict[str, dict] = {}
    for key, raw in environ.items():
        if not key.startswith("GOVMINE_"):
            continue
        rest = key[len("GOVMINE_"):].lower()
        section, _, field_name = rest.partition("_")
        if section in _SECTIONS and field_name:
            out.setdefault(section, {})[field_name] = _coerce(raw)
    return out


def load_config(path: str | Path | None, environ: dict[str, str] | None = None) -> Config:
    """Build a Config from a TOML/JSON file with env-var overrides applied.

    Env vars use the pattern GOVMINE_<SECTION>_<FIELD>, e.g.
    GOVMINE_PROVIDERS_MODE=remote; values parse as JSON when possible.
    """
    data: dict = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        if path.suffix == ".json":
            data = json.loads(path.read_text(encoding="utf-8"))
        else:
            with path.open("rb") as fh:
                data = tomllib.load(fh)
    environ = dict(os.environ) if environ is None else environ
    for section, overrides in _env_overrides(environ).items():
        data.setdefault(section, {}).update(overrides)

    kwargs = {}
    for section, cls in _SECTIONS.items():
        raw = data.get(section, {})
        allowed = {f.name for f in fields(cls)}
        unknown = set(raw) - allowed
        if unknown:
            raise ValueError(f"unknown keys in [{section}]: {sorted(unknown)}")
        kwargs[section] = cls(**raw)
    return Config(**kwargs)
