"""Job configuration shared by the command line and the library.

A config file is one JSON object whose keys mirror :class:`JobConfig`;
command-line flags override file values. ``STOKESPEC_THREADS`` sets the
worker count for parallel mode construction.
"""
from dataclasses import asdict, dataclass, fields
import json
import os

from .errors import ConfigurationError, ParseError

THREADS_ENV = "STOKESPEC_THREADS"


def worker_count():
    raw = os.environ.get(THREADS_ENV, "")
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigurationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


@dataclass
class JobConfig:
    sigma: float = 0.0
    lmax: int = 4
    per_l: int = 3
    nr: int = 24
    ntheta: int = 16
    nphi: int = 32
    tol: float = 1e-8
    out: str = None
    seed: int = 0
    trials: int = 20
    count: int = 20

    def validate(self):
        if not 0 <= self.sigma < 1:
            raise ConfigurationError(f"sigma out of range [0, 1): {self.sigma}")
        for name in ("lmax", "per_l", "nr", "ntheta", "nphi", "trials", "count"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.tol > 0:
            raise ConfigurationError(f"tol must be positive, got {self.tol}")
        return self

    def echo(self):
        return asdict(self)

    @classmethod
    def from_mapping(cls, data):
        known = {f.name: f for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)


def load_json(path):
    """Read a JSON document, mapping syntax errors to ParseError."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg} at line {exc.lineno}, column {exc.colno}",
                         line=exc.lineno, offset=exc.pos) from None


def load_config(path):
    data = load_json(path)
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: config must be a JSON object")
    return JobConfig.from_mapping(data)
