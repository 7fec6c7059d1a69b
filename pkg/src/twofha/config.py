"""Runtime configuration: built-in defaults < JSON config file < CLI flags."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .core import HoneywordGenParams, TweakDigits, TweakTail
from .errors import InvalidArgument

CONFIG_ENV_VAR = "TWOFHA_CONFIG"

_STRATEGIES = ("tweak-digits", "tweak-tail")
_ALGORITHMS = ("sha256", "pbkdf2-sha256", "scrypt")


@dataclass
class Config:
    ls_host: str = "127.0.0.1"
    ls_port: int = 7000
    hc_host: str = "127.0.0.1"
    hc_port: int = 7001
    n: int = 3
    otp_length: int = 6
    otp_alphabet: str = "0123456789"
    min_distance: int = 3
    ttl_seconds: int = 120
    max_failures: int = 3
    session_ttl_seconds: int = 3600
    k: int = 4
    honeyword_strategy: str = "tweak-digits"
    honeyword_tweak: int = 4
    hash_algorithm: str = "pbkdf2-sha256"
    hash_cost: dict = field(default_factory=dict)
    ls_data_dir: str = "data/ls"
    hc_data_dir: str = "data/hc"
    inbox_dir: str = "data/inbox"
    qr_image_dir: str | None = None
    webhook_url: str | None = None
    seed: int | None = None  # test only: makes every generated value reproducible
    rotate_token_index: bool = False
    dev_inbox: bool = False
    static_dir: str | None = None

    def validate(self) -> None:
        problems = []
        if self.n < 1:
            problems.append("n must be >= 1")
        if self.otp_length < 1:
            problems.append("otp_length must be >= 1")
        if len(set(self.otp_alphabet)) < 2:
            problems.append("otp_alphabet needs at least 2 distinct characters")
        if not 0 <= self.min_distance <= self.otp_length:
            problems.append("min_distance must be between 0 and otp_length")
        if self.k < 1:
            problems.append("k must be >= 1")
        if self.ttl_seconds < 1:
            problems.append("ttl_seconds must be >= 1")
        if self.max_failures < 1:
            problems.append("max_failures must be >= 1")
        if self.honeyword_strategy not in _STRATEGIES:
            problems.append(f"honeyword_strategy must be one of {_STRATEGIES}")
        if self.honeyword_tweak < 1:
            problems.append("honeyword_tweak must be >= 1")
        if self.hash_algorithm not in _ALGORITHMS:
            problems.append(f"hash_algorithm must be one of {_ALGORITHMS}")
        if problems:
            raise InvalidArgument("invalid config: " + "; ".join(problems))

    def honeyword_params(self) -> HoneywordGenParams:
        if self.honeyword_strategy == "tweak-digits":
            strategy = TweakDigits(t=self.honeyword_tweak)
        else:
            strategy = TweakTail(t=self.honeyword_tweak)
        return HoneywordGenParams(k=self.k, strategy=strategy)


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> Config:
    """Build a config: defaults, then the JSON file, then explicit overrides.

    When no path is given, the file named by $TWOFHA_CONFIG is used if set.
    Unknown keys in the file are rejected to catch typos early.
    """
    config = Config()
    known = {f.name for f in fields(Config)}
    if path is None:
        env_path = os.environ.get(CONFIG_ENV_VAR)
        path = env_path if env_path else None
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidArgument(f"cannot read config file {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise InvalidArgument(f"config file {path} must hold a JSON object")
        unknown = set(raw) - known
        if unknown:
            raise InvalidArgument(f"unknown config keys in {path}: {sorted(unknown)}")
        for key, value in raw.items():
            setattr(config, key, value)
    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(config, key, value)
    config.validate()
    return config
