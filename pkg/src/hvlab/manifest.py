"""Run manifests: the resolved configuration of one CLI invocation."""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from hvlab import __version__
from hvlab.errors import ConfigError


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    seed: int | None
    partitions: int = 1
    version: str = __version__
    duration_s: float = 0.0
    extra: dict = field(default_factory=dict)

    def content_hash(self) -> str:
        """Hash of everything that determines the output.

        Partition count and wall-clock time are excluded: results do not
        depend on them (exactly so for Bernoulli detection).
        """
        payload = {"subcommand": self.subcommand, "config": self.config, "seed": self.seed, "version": self.version}
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def to_toml(self) -> str:
        doc = {k: v for k, v in asdict(self).items() if v is not None and k != "extra"}
        if self.extra:
            doc["extra"] = self.extra
        return tomli_w.dumps(doc)

    @classmethod
    def from_toml(cls, text: str) -> RunManifest:
        try:
            doc = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"bad manifest: {exc}") from exc
        if "subcommand" not in doc:
            raise ConfigError("manifest has no subcommand")
        return cls(
            subcommand=doc["subcommand"],
            config=dict(doc.get("config", {})),
            seed=doc.get("seed"),
            partitions=doc.get("partitions", 1),
            version=doc.get("version", __version__),
            duration_s=doc.get("duration_s", 0.0),
            extra=dict(doc.get("extra", {})),
        )


def load_config_file(path: str | Path) -> dict:
    """Flat key/value config, or a manifest (whose ``[config]`` table and seed are used)."""
    try:
        doc = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad config file {path}: {exc}") from exc
    if isinstance(doc.get("config"), dict):
        out = dict(doc["config"])
        if "seed" in doc:
            out["seed"] = doc["seed"]
        if "subcommand" in doc:
            out["_subcommand"] = doc["subcommand"]
        return out
    return {k.replace("-", "_"): v for k, v in doc.items()}
