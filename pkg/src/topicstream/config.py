"""Plain ``key = value`` run files.

One setting per line; ``#`` starts a comment; blank lines are ignored.
Keys may be dotted (``param.k``, ``range.k_min``). Later lines override
earlier ones. Relative paths are resolved against the file's directory
by the consumer, using :attr:`KeyValueFile.base`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError


@dataclass
class KeyValueFile:
    values: dict[str, str] = field(default_factory=dict)
    base: Path = Path(".")

    def section(self, prefix: str) -> dict[str, str]:
        """Entries ``prefix.name`` as ``{name: value}``, in file order."""
        p = prefix + "."
        return {k[len(p):]: v for k, v in self.values.items() if k.startswith(p)}

    def get(self, key: str, default: str | None = None) -> str | None:
        return self.values.get(key, default)


def parse_key_values(text: str, source: str = "<string>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        if any(c.isspace() for c in key):
            raise ConfigError(f"{source}:{lineno}: key {key!r} contains whitespace")
        out[key] = value.strip()
    return out


def load_config(path: str | Path) -> KeyValueFile:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return KeyValueFile(parse_key_values(text, str(p)), p.resolve().parent)
