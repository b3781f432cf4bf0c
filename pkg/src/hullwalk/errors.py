"""Errors that callers (notably the CLI) map to distinct exit codes."""


class EnumerationOverflowError(ValueError):
    """Exact enumeration would exceed the state-space cap."""


class ResourceLimitError(RuntimeError):
    """An experiment would exceed its configured resource budget."""


class ConfigError(Exception):
    """A malformed experiment config; message names the section and field."""
