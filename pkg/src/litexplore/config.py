"""Service configuration: key=value file plus ISLE_-prefixed env overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ConfigError
from .vectors import EmbedderBinding

ENV_PREFIX = "ISLE_"


@dataclass(frozen=True)
class ServiceConfig:
    corpus_dir: str = "corpus"
    index_dir: str = "index"
    explorations_dir: str = "explorations"
    embedder_mode: str = "deterministic-projection"
    embedder_endpoint: str = ""
    embedder_seed: int = 42
    embedder_dim: int = 384
    embedder_model: str = ""
    embedder_timeout: float = 5.0
    default_limit: int = 5000
    rrf_k: int = 60
    topic_mode: str = "auto"
    topic_seed: int = 13
    fuzzy: bool = True
    k1: float = 1.2
    b: float = 0.75
    title_weight: float = 2.0
    abstract_weight: float = 1.0
    phrase_bonus_factor: float = 1.5
    listen_host: str = "127.0.0.1"
    listen_port: int = 8910
    cache_size: int = 32

    def __post_init__(self):
        positives = {
            "embedder_dim": self.embedder_dim,
            "default_limit": self.default_limit,
            "rrf_k": self.rrf_k,
            "listen_port": self.listen_port,
            "cache_size": self.cache_size,
            "k1": self.k1,
            "title_weight": self.title_weight,
            "abstract_weight": self.abstract_weight,
            "phrase_bonus_factor": self.phrase_bonus_factor,
            "embedder_timeout": self.embedder_timeout,
        }
        for name, value in positives.items():
            if value <= 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if self.topic_mode not in ("auto", "nmf", "cluster"):
            raise ConfigError(f"topic_mode must be auto|nmf|cluster, got {self.topic_mode!r}")

    def embedder_binding(self) -> EmbedderBinding:
        if self.embedder_mode == "external-service":
            return EmbedderBinding(
                mode="external-service",
                dimension=self.embedder_dim,
                endpoint=self.embedder_endpoint,
                model=self.embedder_model or None,
                timeout=self.embedder_timeout,
            )
        return EmbedderBinding(
            mode="deterministic-projection",
            dimension=self.embedder_dim,
            seed=self.embedder_seed,
        )


_BOOL_KEYS = {"fuzzy"}
_INT_KEYS = {
    "embedder_seed", "embedder_dim", "default_limit", "rrf_k", "topic_seed",
    "listen_port", "cache_size",
}
_FLOAT_KEYS = {
    "embedder_timeout", "k1", "b", "title_weight", "abstract_weight",
    "phrase_bonus_factor",
}


def _coerce(key: str, raw: str):
    if key in _BOOL_KEYS:
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key} must be a boolean, got {raw!r}")
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return raw.strip().strip('"')


def load_config(path=None, env=None) -> ServiceConfig:
    """Parse key=value lines, then apply ISLE_<KEY> environment overrides."""
    values: dict = {}
    known = set(ServiceConfig.__dataclass_fields__)
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, _, raw = line.partition("=")
            key = key.strip().lower()
            if key not in known:
                raise ConfigError(f"{path}:{lineno}: unknown setting {key!r}")
            values[key] = _coerce(key, raw.strip())
    env = os.environ if env is None else env
    for key in known:
        env_key = ENV_PREFIX + key.upper()
        if env_key in env:
            values[key] = _coerce(key, env[env_key])
    return replace(ServiceConfig(), **values)
