"""Ready-made example suites: planar oscillator, fiberwise-linear functions, so(3)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..reduction import CompatiblePair


@dataclass
class ExampleSuite:
    """A compatible pair plus directly coded reference formulas and samplers.

    ``samplers`` map a chart role (``total``, ``orbit``, ``contact``, ``final_a``,
    ``final_b`` and suite-specific ones) to ``f(rng, n) -> (n, dim) array``.
    ``random_invariant`` draws an invariant degree-one homogeneous function on the
    total chart.
    """

    name: str
    pair: CompatiblePair
    closed_forms: dict = field(default_factory=dict)
    samplers: dict = field(default_factory=dict)
    random_invariant: Callable = None
    extras: dict = field(default_factory=dict)

    def sample(self, role: str, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.samplers[role](rng, n)


def build_suite(name: str) -> ExampleSuite:
    import importlib

    builders = {"ho": ("harmonic", "build_ho"), "linear": ("linear", "build_linear_ctq"),
                "so3": ("rotation", "build_so3")}
    if name not in builders:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(builders)}")
    module, func = builders[name]
    return getattr(importlib.import_module(f".{module}", __name__), func)()


SUITE_NAMES = ("ho", "linear", "so3")

__all__ = ["ExampleSuite", "SUITE_NAMES", "build_suite"]
