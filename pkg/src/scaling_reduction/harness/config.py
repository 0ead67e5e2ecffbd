"""Validated run configuration shared by the CLI commands."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from ..examples import SUITE_NAMES


class Command(Enum):
    SIMULATE = "simulate"
    REDUCE = "reduce"
    RECONSTRUCT = "reconstruct"
    VERIFY = "verify"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation.

    ``t1 == t0`` is accepted and yields a single sample at ``t0``. ``x0`` and
    ``route`` fall back to suite defaults when omitted.
    """

    suite: str
    command: Command
    dt: float = 1e-3
    t0: float = 0.0
    t1: float = 1.0
    seed: int = 0
    out: Optional[str] = None
    tolerances: dict = field(default_factory=dict)
    reduced: bool = False
    pipeline: str = "A"
    x0: Optional[tuple] = None
    route: Optional[str] = None
    points: int = 20

    def __post_init__(self):
        if self.suite not in SUITE_NAMES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITE_NAMES)}")
        object.__setattr__(self, "command", Command(self.command))
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not (np.isfinite(self.t0) and np.isfinite(self.t1)) or self.t1 < self.t0:
            raise ConfigError(f"need t0 <= t1, got t0={self.t0}, t1={self.t1}")
        if self.pipeline not in ("A", "B"):
            raise ConfigError(f"pipeline must be A or B, got {self.pipeline!r}")
        if self.points < 1:
            raise ConfigError(f"points must be positive, got {self.points}")
        for name, value in self.tolerances.items():
            if not value > 0:
                raise ConfigError(f"tolerance for {name!r} must be positive, got {value}")

    @property
    def t_span(self) -> tuple:
        return (self.t0, self.t1)


def parse_tolerance(text: str) -> tuple[str, float]:
    """``name=value`` where ``name`` may be a glob over check keys."""
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise ConfigError(f"tolerance override must look like name=value, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise ConfigError(f"tolerance value {value!r} is not a number") from None


def parse_point(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"point must be comma-separated numbers, got {text!r}") from None
