"""Exception hierarchy. Each class carries the CLI exit code for its error class."""
from __future__ import annotations


class SpurionError(Exception):
    exit_code = 1

    def __init__(self, kind: str, message: str = ""):
        super().__init__(f"{kind}: {message}" if message else kind)
        self.kind = kind


class ConfigError(SpurionError):
    exit_code = 2


class PSVNSyntaxError(ConfigError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__("syntax-error", f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class DomainError(ConfigError):
    """Malformed domain content (unknown symbols, bad lengths, unbound variables)."""


class CapacityError(SpurionError):
    exit_code = 3


class FingerprintMismatch(SpurionError):
    exit_code = 4

    def __init__(self, message: str):
        super().__init__("fingerprint-mismatch", message)


class MissingAbstractState(SpurionError):
    exit_code = 5

    def __init__(self, message: str = ""):
        super().__init__("missing-abstract-state", message)


class SearchError(SpurionError):
    exit_code = 6


class MetricsError(SpurionError):
    exit_code = 7
