"""Settings resolution: command-line flags > environment variables > config file.

The config file is trajvault.toml in the working directory, read as plain
key = value lines (comments start with #, values may be quoted). Environment
variables use the TRAJVAULT_ prefix: TRAJVAULT_CACHE_DIR caches fetched
archives, TRAJVAULT_THREADS caps worker threads.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

CONFIG_FILE = "trajvault.toml"
ENV_PREFIX = "TRAJVAULT_"


@dataclass(frozen=True)
class Settings:
    cache_dir: Optional[str] = None
    threads: Optional[int] = None


def read_config_file(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value, got {line!r}")
            key, value = line.split("=", 1)
            value = value.strip()
            if "#" in value and not (value.startswith('"') or value.startswith("'")):
                value = value.split("#", 1)[0].strip()
            if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
                value = value[1:-1]
            values[key.strip()] = value
    return values


def resolve_settings(flag_cache_dir: Optional[str] = None,
                     flag_threads: Optional[int] = None,
                     cwd: Optional[str] = None,
                     env: Optional[dict] = None) -> Settings:
    env = os.environ if env is None else env
    cfg_path = os.path.join(cwd or ".", CONFIG_FILE)
    cfg = read_config_file(cfg_path) if os.path.exists(cfg_path) else {}

    cache_dir = flag_cache_dir
    if cache_dir is None:
        cache_dir = env.get(ENV_PREFIX + "CACHE_DIR") or cfg.get("cache_dir")

    threads: Optional[int] = flag_threads
    if threads is None:
        raw = env.get(ENV_PREFIX + "THREADS") or cfg.get("threads")
        if raw is not None:
            try:
                threads = int(raw)
            except ValueError:
                raise ValueError(f"threads must be an integer, got {raw!r}") from None
    if threads is not None and threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")

    return Settings(cache_dir=cache_dir, threads=threads)
