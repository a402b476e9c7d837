"""Service configuration: one YAML file plus environment overrides.

Environment variables named STUDYATLAS_<FIELD> (upper-cased field name)
override file values; booleans accept 1/0/true/false, numbers parse
naturally.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

import yaml

from .graph import MatcherConfig

ENV_PREFIX = "STUDYATLAS_"


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8350
    snapshot_dir: str = "snapshot"
    data_dir: str = "data"
    embedding_provider: str = "fallback"  # "fallback" | "none"
    embedding_cache_dir: str = ""
    decisions_path: str = ""
    submissions_path: str = ""
    maintainer_token: str = ""
    rate_limit_per_minute: int = 30
    title_weight: float = 0.7
    year_weight: float = 0.2
    author_weight: float = 0.1
    auto_threshold: float = 0.90
    flag_threshold: float = 0.60
    author_flag_distance: int = 2
    strip_diacritics: bool = False

    def matcher(self) -> MatcherConfig:
        return MatcherConfig(
            title_weight=self.title_weight,
            year_weight=self.year_weight,
            author_weight=self.author_weight,
            auto_threshold=self.auto_threshold,
            flag_threshold=self.flag_threshold,
            author_flag_distance=self.author_flag_distance,
            strip_diacritics=self.strip_diacritics,
        )


def _coerce(raw: str, target_type):
    if target_type is bool:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    return target_type(raw)


def load_config(path=None, env=None) -> ServiceConfig:
    """Read the config file (optional) and apply environment overrides."""
    env = os.environ if env is None else env
    values = {}
    if path is not None:
        text = Path(path).read_text("utf-8")
        loaded = yaml.safe_load(text) or {}
        if not isinstance(loaded, dict):
            raise ValueError(f"config file {path} must hold a mapping")
        known = {f.name for f in fields(ServiceConfig)}
        unknown = set(loaded) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for spec in fields(ServiceConfig):
        env_name = ENV_PREFIX + spec.name.upper()
        if env_name in env:
            values[spec.name] = _coerce(env[env_name], type(getattr(ServiceConfig(), spec.name)))
    return ServiceConfig(**values)
