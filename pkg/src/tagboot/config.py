"""Project configuration: a flat key=value file at the project root.

Paths are relative to the project directory. Unknown keys are rejected so a
typo cannot silently fall back to a default.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

CONFIG_NAME = "project.cfg"


@dataclass
class ProjectConfig:
    source_text: str = "source.txt"
    target_text: str = "target.txt"
    source_tags: str = "source-tags.cols"
    source_tagset: str = ""
    target_tagset: str = "target.tagset"
    alignments: str = "work/alignments.txt"
    gold: str = ""
    substitutions: str = ""
    templates: str = ""
    increment: float = 0.05
    iterations: int = 10
    seed: int = 0
    theta: int = 2
    max_verse_len: int = 100
    align_iterations: int = 5
    align_order: str = "target-source"

    def path(self, root, key: str) -> Path:
        value = getattr(self, key)
        if not value:
            raise ConfigError(f"config key {key!r} is not set")
        return Path(root) / value


_FIELD_TYPES = {f.name: f.type for f in fields(ProjectConfig)}


def parse_config(content: str) -> ProjectConfig:
    cfg = ProjectConfig()
    for lineno, line in enumerate(content.split("\n"), 1):
        if not line.strip() or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep:
            raise ConfigError(f"config line {lineno}: expected 'key=value'")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        kind = _FIELD_TYPES[key]
        try:
            if kind in ("int", int):
                setattr(cfg, key, int(value))
            elif kind in ("float", float):
                setattr(cfg, key, float(value))
            else:
                setattr(cfg, key, value)
        except ValueError:
            raise ConfigError(f"config line {lineno}: bad value for {key}: {value!r}")
    return cfg


def serialize_config(cfg: ProjectConfig) -> str:
    lines = []
    for f in fields(ProjectConfig):
        lines.append(f"{f.name}={getattr(cfg, f.name)}")
    return "".join(line + "\n" for line in lines)


def load_config(root) -> ProjectConfig:
    path = Path(root) / CONFIG_NAME
    if not path.is_file():
        raise ConfigError(f"missing project config: {path}")
    return parse_config(path.read_text(encoding="utf-8"))


def save_config(cfg: ProjectConfig, root):
    Path(root).mkdir(parents=True, exist_ok=True)
    (Path(root) / CONFIG_NAME).write_text(serialize_config(cfg), encoding="utf-8")
