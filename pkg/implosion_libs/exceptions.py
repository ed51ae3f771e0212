from __future__ import annotations


class ImplosionError(Exception):
    """Parent exception for the package."""


class ConfigError(ImplosionError):
    """The configuration file or a flag holds a value of the wrong kind."""
