"""Quasi-static brittle fracture on triangulations."""

import json as _json

from ._qsfrac import (
    Config,
    ConfigError,
    Error,
    LimitError,
    Run,
    SolverError,
    ValidationError,
    corpus,
    load_record,
    run,
)

DEFAULT_CHECKS = ("irreversibility", "balance", "stability", "structure")


def audit(record, checks=DEFAULT_CHECKS, level="ORACLE", tol=None, threads=0):
    """Audit a run and return the report as a dict with 'passed' and 'checks'."""
    if isinstance(checks, str):
        checks = [c.strip() for c in checks.split(",") if c.strip()]
    return _json.loads(record.audit_json(list(checks), level, dict(tol or {}), threads))


__all__ = [
    "Config",
    "ConfigError",
    "Error",
    "LimitError",
    "Run",
    "SolverError",
    "ValidationError",
    "audit",
    "corpus",
    "load_record",
    "run",
]
