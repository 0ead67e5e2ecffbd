"""Fixed-step RK4 trajectories on a chart and cumulative Simpson quadrature."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .dual import real_array
from .linalg import SingularSystemError
from .numcore import Chart, DomainError, Point, ScalarField, VectorField, coords_of

GRID_TOL = 1e-9


class Method(Enum):
    RK4 = "rk4"


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    method: Method = Method.RK4

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States sampled on a uniform time grid.

    ``truncated`` is set when the integration left the chart domain before the
    requested final time; ``times`` then stops at the last valid state and
    ``exit_reason`` says why.
    """

    chart: Chart
    times: np.ndarray
    states: np.ndarray
    truncated: bool = False
    exit_reason: str = ""
    requested_t1: Optional[float] = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if states.ndim != 2 or states.shape != (times.size, self.chart.dim):
            raise ValueError(f"states of shape {states.shape} do not match {times.size} times on {self.chart.name!r}")
        if times.size > 1:
            steps = np.diff(times)
            if np.any(steps <= 0):
                raise ValueError("times must be strictly increasing")
            if np.max(np.abs(steps - steps[0])) > GRID_TOL * max(1.0, abs(steps[0])):
                raise ValueError("times must form a uniform grid")
        times.setflags(write=False)
        states.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    def __len__(self) -> int:
        return self.times.size

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self) > 1 else 0.0

    @property
    def points(self) -> list[Point]:
        return [Point(self.chart, s) for s in self.states]

    def map(self, fn: Callable, chart: Chart) -> "Trajectory":
        """Apply a coordinate map to every state, keeping grid and flags."""
        states = np.array([real_array(fn(s)) for s in self.states]).reshape(len(self), chart.dim)
        states = np.array([chart.wrap(s) for s in states])
        return Trajectory(chart, self.times, states, self.truncated, self.exit_reason, self.requested_t1)


def uniform_grid(t0: float, t1: float, dt: float) -> np.ndarray:
    """``t0, t0+dt, …, t1``; the span must be an integer multiple of ``dt``."""
    if t1 < t0:
        raise ValueError(f"t1 = {t1} precedes t0 = {t0}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    ratio = (t1 - t0) / dt
    n = int(round(ratio))
    if abs(ratio - n) > 1e-6 * max(1.0, ratio):
        raise ValueError(f"span {t1 - t0} is not a multiple of dt = {dt}")
    return t0 + dt * np.arange(n + 1)


def _rk4_step(f, x, dt):
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(field: VectorField, x0, t_span, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Classical RK4 from ``x0`` over ``t_span``; angles are wrapped after every step.

    Leaving the chart domain (or a singular evaluation) stops the integration
    and returns the valid prefix with ``truncated=True``.
    """
    chart = field.chart
    x = chart.wrap(coords_of(x0, chart))
    t0, t1 = (float(t) for t in t_span)
    times = uniform_grid(t0, t1, cfg.dt)

    def f(z):
        return np.asarray(real_array(field.fn(z)), dtype=float)

    states = [x]
    reason = ""
    for _ in range(times.size - 1):
        try:
            with np.errstate(all="raise"):
                nxt = _rk4_step(f, states[-1], cfg.dt)
        except (DomainError, SingularSystemError, FloatingPointError, ZeroDivisionError) as exc:
            reason = f"{type(exc).__name__}: {exc}"
            break
        if not chart.contains(nxt):
            reason = f"left the domain of {chart.name!r}"
            break
        states.append(chart.wrap(nxt))
    n = len(states)
    return Trajectory(chart, times[:n], np.array(states), n < times.size, reason, t1)


def cumulative_simpson(traj: Trajectory, f) -> np.ndarray:
    """Running integral of ``f`` along ``traj`` at every grid time (zero at the first).

    Even indices use composite Simpson over pairs of intervals.  An odd index
    adds the cubic-exact four-point rule for its last interval to the preceding
    even value, so every entry is fourth-order accurate and exact on cubics (on quadratics
    when only three samples exist).
    ``f`` is a :class:`ScalarField` on the trajectory chart or a callable on
    coordinates.
    """
    fn = f.fn if isinstance(f, ScalarField) else f
    values = np.array([float(real_array(fn(s))) for s in traj.states])
    return cumulative_simpson_values(values, traj.dt)


def cumulative_simpson_values(values, dt: float) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    n = v.size
    if n == 1:
        return np.zeros(1)
    if n < 3:
        raise ValueError(f"cumulative Simpson needs 1 or at least 3 samples, got {n}")
    out = np.zeros(n)
    even = np.arange(2, n, 2)
    panels = (v[even - 2] + 4.0 * v[even - 1] + v[even]) * dt / 3.0
    out[even] = np.cumsum(panels)
    for k in range(1, n, 2):
        out[k] = out[k - 1] + _last_interval(v, k) * dt
    return out


def _last_interval(v, k):
    """Integral over ``[t_{k-1}, t_k]`` in units of dt, from four nearby samples."""
    n = v.size
    if n == 3:
        return (5.0 * v[0] + 8.0 * v[1] - v[2]) / 12.0
    if k == 1:
        return (9.0 * v[0] + 19.0 * v[1] - 5.0 * v[2] + v[3]) / 24.0
    if k + 1 < n:
        return (-v[k - 2] + 13.0 * v[k - 1] + 13.0 * v[k] - v[k + 1]) / 24.0
    return (v[k - 3] - 5.0 * v[k - 2] + 19.0 * v[k - 1] + 9.0 * v[k]) / 24.0
