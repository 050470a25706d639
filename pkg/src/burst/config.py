"""Server configuration: flat ``key = value`` file, TOML-like.

The path comes from the CLI/--config or the BURSTD_CONFIG env var; every key
has a default so an empty config is valid.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .core.types import DEFAULT_EMOJI_ALLOWLIST, EngineConfig, ThresholdPolicy

ENV_VAR = "BURSTD_CONFIG"


@dataclass
class AppConfig:
    listen_addr: str = "127.0.0.1:8400"
    data_dir: str = "./burst-data"
    threshold_ratio: float = 0.05
    threshold_min: int = 1
    threshold_max: int = 50
    threshold_everyone_ratio: float = 0.15
    team_max_size: int = 50
    onboarding_enabled: bool = True
    onboarding_min_team: int = 3
    onboarding_min_channels: int = 3
    emoji_allowlist: tuple = DEFAULT_EMOJI_ALLOWLIST
    session_ttl_ms: int = 7 * 24 * 3600 * 1000
    raw: dict = field(default_factory=dict)

    def engine_config(self) -> EngineConfig:
        return EngineConfig(
            policy=ThresholdPolicy(
                ratio=self.threshold_ratio,
                min_threshold=self.threshold_min,
                max_threshold=self.threshold_max,
                everyone_ratio=self.threshold_everyone_ratio,
            ),
            max_team_size=self.team_max_size,
            emoji_allowlist=tuple(self.emoji_allowlist),
        )


def _parse_bool(value: str) -> bool:
    if value.lower() in ("true", "1", "yes", "on"):
        return True
    if value.lower() in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def parse_config_text(text: str) -> AppConfig:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        raw[key.strip()] = value.strip().strip('"')

    cfg = AppConfig(raw=raw)
    if "listen_addr" in raw:
        cfg.listen_addr = raw["listen_addr"]
    if "data_dir" in raw:
        cfg.data_dir = raw["data_dir"]
    if "threshold.ratio" in raw:
        cfg.threshold_ratio = float(raw["threshold.ratio"])
    if "threshold.min" in raw:
        cfg.threshold_min = int(raw["threshold.min"])
    if "threshold.max" in raw:
        cfg.threshold_max = int(raw["threshold.max"])
    if "threshold.everyone_ratio" in raw:
        cfg.threshold_everyone_ratio = float(raw["threshold.everyone_ratio"])
    if "team.max_size" in raw:
        cfg.team_max_size = int(raw["team.max_size"])
    if "onboarding.enabled" in raw:
        cfg.onboarding_enabled = _parse_bool(raw["onboarding.enabled"])
    if "onboarding.min_team" in raw:
        cfg.onboarding_min_team = int(raw["onboarding.min_team"])
    if "onboarding.min_channels" in raw:
        cfg.onboarding_min_channels = int(raw["onboarding.min_channels"])
    if "emoji_allowlist" in raw:
        cfg.emoji_allowlist = tuple(
            e.strip() for e in raw["emoji_allowlist"].split(",") if e.strip()
        )
    return cfg


def load_config(path: Optional[str] = None) -> AppConfig:
    path = path or os.environ.get(ENV_VAR)
    if path is None:
        return AppConfig()
    return parse_config_text(Path(path).read_text())
