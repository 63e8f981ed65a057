"""INI run configuration with typed, path-named lookups.

Every value read through :class:`RunConfig` is recorded, so outputs can
embed the fully resolved configuration including defaults.
"""
from __future__ import annotations

import configparser
import contextlib
from pathlib import Path

from .errors import ConfigError, DomainError

REQUIRED = object()


class RunConfig:
    def __init__(self, parser=None, source="<defaults>"):
        self._cp = parser or configparser.ConfigParser(interpolation=None)
        self.source = source
        self.resolved = {}

    @classmethod
    def from_file(cls, path):
        cp = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, encoding="utf-8") as fh:
                cp.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc.message}") from None
        return cls(cp, str(path))

    @classmethod
    def from_string(cls, text, source="<string>"):
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc.message}") from None
        return cls(cp, source)

    def has(self, section, key=None):
        if key is None:
            return self._cp.has_section(section)
        return self._cp.has_option(section, key)

    def _raw(self, section, key, default):
        path = f"{section}.{key}"
        if self._cp.has_option(section, key):
            return path, self._cp.get(section, key).strip(), True
        if default is REQUIRED:
            raise ConfigError(f"{path}: required field is missing")
        return path, default, False

    def get_str(self, section, key, default=REQUIRED, choices=None):
        path, v, given = self._raw(section, key, default)
        if v is None:
            return None
        v = str(v)
        if choices and v not in choices:
            raise ConfigError(f"{path}: {v!r} is not one of {', '.join(choices)}")
        self.resolved[path] = v
        return v

    def get_float(self, section, key, default=REQUIRED, positive=False, lo=None, hi=None):
        path, v, given = self._raw(section, key, default)
        if v is None:
            return None
        try:
            x = float(v)
        except ValueError:
            raise ConfigError(f"{path}: expected a number, got {v!r}") from None
        if positive and not x > 0:
            raise ConfigError(f"{path}: must be positive, got {x!r}")
        if lo is not None and x < lo or hi is not None and x > hi:
            raise ConfigError(f"{path}: {x!r} outside [{lo}, {hi}]")
        self.resolved[path] = repr(x)
        return x

    def get_int(self, section, key, default=REQUIRED, minimum=None):
        path, v, given = self._raw(section, key, default)
        try:
            x = int(v)
        except (TypeError, ValueError):
            raise ConfigError(f"{path}: expected an integer, got {v!r}") from None
        if minimum is not None and x < minimum:
            raise ConfigError(f"{path}: must be >= {minimum}, got {x}")
        self.resolved[path] = str(x)
        return x

    def get_bool(self, section, key, default=REQUIRED):
        path, v, given = self._raw(section, key, default)
        if isinstance(v, bool):
            x = v
        else:
            s = str(v).lower()
            if s in ("1", "true", "yes", "on"):
                x = True
            elif s in ("0", "false", "no", "off"):
                x = False
            else:
                raise ConfigError(f"{path}: expected a boolean, got {v!r}")
        self.resolved[path] = str(x).lower()
        return x

    def get_floats(self, section, key, default=REQUIRED, length=None):
        path, v, given = self._raw(section, key, default)
        if isinstance(v, (tuple, list)):
            xs = tuple(float(x) for x in v)
        else:
            try:
                xs = tuple(float(x) for x in str(v).replace(";", ",").split(",") if x.strip())
            except ValueError:
                raise ConfigError(f"{path}: expected a comma-separated list of numbers") from None
        if length is not None and len(xs) != length:
            raise ConfigError(f"{path}: expected {length} values, got {len(xs)}")
        self.resolved[path] = ",".join(repr(x) for x in xs)
        return xs

    def get_path(self, section, key, default=REQUIRED, base=None):
        v = self.get_str(section, key, default)
        if v is None or v.startswith("bundled:"):
            return v
        p = Path(v)
        if not p.is_absolute() and self.source not in ("<defaults>", "<string>"):
            p = Path(self.source).parent / p
        return str(p)

    def header_lines(self):
        return [f"{k} = {self.resolved[k]}" for k in sorted(self.resolved)]


@contextlib.contextmanager
def field(path):
    """Re-raise domain errors from object construction as config errors."""
    try:
        yield
    except DomainError as exc:
        raise ConfigError(f"{path}: {exc}") from None
