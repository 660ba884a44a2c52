"""Run configuration: one TOML file with a section per pipeline stage.

Stage code never reads the file directly; it receives values through this
wrapper so a missing key always fails with its full dotted name, and the
whole config hashes canonically into the model manifest.
"""

from __future__ import annotations

import hashlib
import json
from datetime import date

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib


class ConfigError(Exception):
    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class RunConfig:
    def __init__(self, data: dict, source: str = "<memory>"):
        self.data = data
        self.source = source

    @staticmethod
    def load(path) -> "RunConfig":
        with open(path, "rb") as f:
            try:
                data = tomllib.load(f)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
        return RunConfig(data, source=str(path))

    def config_hash(self) -> str:
        canonical = json.dumps(self.data, sort_keys=True, default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def _walk(self, dotted: str):
        node = self.data
        for part in dotted.split("."):
            if not isinstance(node, dict) or part not in node:
                return None, False
            node = node[part]
        return node, True

    def require(self, dotted: str):
        value, found = self._walk(dotted)
        if not found:
            raise ConfigError(f"missing config key: {dotted}", key=dotted)
        return value

    def get(self, dotted: str, default=None):
        value, found = self._walk(dotted)
        return value if found else default

    def window(self) -> tuple[date, date]:
        raw = self.require("filter.window")
        if not isinstance(raw, list) or len(raw) != 2:
            raise ConfigError("filter.window must be [start, end]", key="filter.window")
        try:
            start, end = (v if isinstance(v, date) else date.fromisoformat(str(v)) for v in raw)
        except ValueError as exc:
            raise ConfigError(f"filter.window: {exc}", key="filter.window") from exc
        if start > end:
            raise ConfigError("filter.window start after end", key="filter.window")
        return start, end

    def schema(self) -> dict[str, str]:
        raw = self.require("corpus.schema")
        if not isinstance(raw, dict):
            raise ConfigError("corpus.schema must be a table", key="corpus.schema")
        return {str(k): str(v) for k, v in raw.items()}
