"""Recovering full trajectories from reduced ones through a scaling function.

A scaling function ``F`` gives a flat connection whose horizontal lift of a
base curve ``γ`` is the curve ``φ`` on the level set ``F = s0``.  The full
trajectory is ``Γ(t) = act(exp α(t), φ(t))`` where ``α`` comes from a scalar
quadrature.  Three integrands are supported:

* ``X_H(F)(φ)/s0`` on the total space (symplectic route),
* ``−ℛ(h)(γ)`` with ℛ the Reeb field of the contact quotient,
* ``E(h)(γ)`` with ``E`` the vector field of the Jacobi quotient of a Poisson system.

All three describe ``d/dt log F(Γ(t))`` in this package's sign conventions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dual import real_array
from .integrate import IntegratorConfig, Trajectory, cumulative_simpson, integrate
from .numcore import Point, ScalarField, VectorField, coords_of, gradient
from .symmetry import ScalingBundle, generator

LEVEL_TOL = 1e-8
PROJECTION_TOL = 1e-6


class ReconstructionError(ValueError):
    pass


class DegenerateConnectionError(ReconstructionError):
    pass


@dataclass(frozen=True, eq=False)
class ReconstructionProblem:
    bundle: ScalingBundle
    full_field: VectorField
    reduced_field: VectorField
    x0: np.ndarray
    t_span: tuple
    dt: float = 1e-3

    def __post_init__(self):
        x0 = coords_of(self.x0, self.bundle.total)
        object.__setattr__(self, "x0", x0)
        if self.full_field.chart is not self.bundle.total:
            raise ValueError("full field must live on the total chart of the bundle")
        if self.reduced_field.chart is not self.bundle.base:
            raise ValueError("reduced field must live on the base chart of the bundle")
        if float(self.bundle.F.fn(x0)) == 0.0:
            raise ReconstructionError(f"scaling function vanishes at x0 = {x0}")
        t0, t1 = self.t_span
        if t1 < t0:
            raise ValueError("t_span must be increasing")
        IntegratorConfig(self.dt)

    @property
    def s0(self) -> float:
        return float(self.bundle.F.fn(self.x0))

    @property
    def config(self) -> IntegratorConfig:
        return IntegratorConfig(self.dt)

    def base_trajectory(self) -> Trajectory:
        y0 = self.bundle.quotient.project_raw(self.x0)
        return integrate(self.reduced_field, real_array(y0), self.t_span, self.config)

    def direct_trajectory(self) -> Trajectory:
        return integrate(self.full_field, self.x0, self.t_span, self.config)


@dataclass(frozen=True, eq=False)
class ReconstructedTrajectory:
    times: np.ndarray
    gamma: Trajectory
    phi: Trajectory
    alpha: np.ndarray
    Gamma: Trajectory

    @property
    def truncated(self) -> bool:
        return self.gamma.truncated

    def errors_against(self, other: Trajectory) -> np.ndarray:
        """Per-sample distance to another total-space trajectory over the common prefix."""
        n = min(len(self.Gamma), len(other))
        chart = self.Gamma.chart
        return np.array([chart.distance(a, b) for a, b in zip(self.Gamma.states[:n], other.states[:n])])


def flat_connection(b: ScalingBundle, x, v) -> float:
    """Connection value ``c·Δ(F)(x)`` of ``v = c·Δ(x) + w`` with ``dF(w) = 0``."""
    x = coords_of(x, b.total)
    delta = real_array(generator(b.action, x))
    if not np.any(delta):
        raise DegenerateConnectionError(f"scaling generator vanishes at {x}")
    dF = real_array(gradient(b.F.fn, x))
    delta_F = float(dF @ delta)
    if delta_F == 0.0:
        raise DegenerateConnectionError(f"Δ(F) vanishes at {x}")
    c = float(dF @ np.asarray(v, dtype=float)) / delta_F
    return c * delta_F


def horizontal_lift(b: ScalingBundle, gamma: Trajectory, s0: float) -> Trajectory:
    """Curve on the level set ``F = s0`` over ``gamma``."""
    if s0 == 0:
        raise ReconstructionError("the level s0 must be nonzero")
    q = b.quotient
    states = []
    for y in gamma.states:
        x = q.section_raw(y)
        f = float(b.F.fn(x))
        if f == 0.0:
            raise ReconstructionError(f"scaling function vanishes on the section over {y}")
        s = s0 / f
        if not b.action.group.contains(s):
            raise ReconstructionError(f"level {s0} is not reachable over {y} within {b.action.group.value}")
        states.append(real_array(b.action.raw(s, x)))
    phi = Trajectory(b.total, gamma.times, np.array([b.total.wrap(s) for s in states]).reshape(len(gamma), b.total.dim),
                     gamma.truncated, gamma.exit_reason, gamma.requested_t1)
    _check_lift(b, gamma, phi, s0)
    return phi


def _check_lift(b: ScalingBundle, gamma: Trajectory, phi: Trajectory, s0: float):
    q = b.quotient
    for y, x in zip(gamma.states, phi.states):
        level = abs(float(b.F.fn(x)) - s0)
        if level > LEVEL_TOL * max(1.0, abs(s0)):
            raise ReconstructionError(f"lift leaves the level set: |F − s0| = {level:.3e} at {x}")
        off = q.base.distance(q.project_raw(x), y)
        if off > LEVEL_TOL:
            raise ReconstructionError(f"lift does not project onto the base curve: {off:.3e} at {x}")


def _assemble(b: ScalingBundle, gamma: Trajectory, phi: Trajectory, alpha: np.ndarray) -> ReconstructedTrajectory:
    if not np.all(np.isfinite(alpha)):
        raise ReconstructionError("quadrature produced non-finite values")
    states = [b.total.wrap(real_array(b.action.raw(float(np.exp(a)), x))) for a, x in zip(alpha, phi.states)]
    Gamma = Trajectory(b.total, phi.times, np.array(states).reshape(len(phi), b.total.dim),
                       phi.truncated, phi.exit_reason, phi.requested_t1)
    q = b.quotient
    for y, x in zip(gamma.states, Gamma.states):
        off = q.base.distance(q.project_raw(x), y)
        if off > PROJECTION_TOL:
            raise ReconstructionError(f"reconstructed curve does not project onto γ: {off:.3e}")
    return ReconstructedTrajectory(gamma.times, gamma, phi, alpha, Gamma)


def _base_and_lift(rp: ReconstructionProblem, gamma: Optional[Trajectory]):
    gamma = rp.base_trajectory() if gamma is None else gamma
    if len(gamma) == 2:
        raise ReconstructionError("a single time step is too short for the quadrature; use t1 == t0 or 2 steps")
    return gamma, horizontal_lift(rp.bundle, gamma, rp.s0)


def reconstruct_symplectic(rp: ReconstructionProblem, bracket_integrand: ScalarField,
                           gamma: Optional[Trajectory] = None) -> ReconstructedTrajectory:
    """Group factor ``α = (1/s0) ∫ X_H(F)(φ)``.

    ``bracket_integrand`` is ``X_H(F)`` as a scalar field on the total chart
    (the bracket of ``F`` with ``H``; see :mod:`scaling_reduction.structures` for
    the ordering).  A precomputed base curve may be passed as ``gamma``.
    """
    gamma, phi = _base_and_lift(rp, gamma)
    alpha = cumulative_simpson(phi, bracket_integrand) / rp.s0
    return _assemble(rp.bundle, gamma, phi, alpha)


def reconstruct_via_reeb(rp: ReconstructionProblem, reeb: VectorField, h: ScalarField,
                         gamma: Optional[Trajectory] = None) -> ReconstructedTrajectory:
    """``F(Γ) = s0 · exp(−∫ ℛ(h)(γ))`` with ℛ the Reeb field on the base."""
    gamma, phi = _base_and_lift(rp, gamma)
    integrand = reeb.apply(h)
    alpha = -cumulative_simpson(gamma, integrand)
    return _assemble(rp.bundle, gamma, phi, alpha)


def reconstruct_poisson(rp: ReconstructionProblem, e_field: VectorField, h: ScalarField,
                        gamma: Optional[Trajectory] = None) -> ReconstructedTrajectory:
    """``F(Γ) = s0 · exp(∫ E(h)(γ))`` with ``E(f) = {1, f}`` on the Jacobi quotient."""
    gamma, phi = _base_and_lift(rp, gamma)
    alpha = cumulative_simpson(gamma, e_field.apply(h))
    return _assemble(rp.bundle, gamma, phi, alpha)


def lift_point(b: ScalingBundle, value: float, y) -> Point:
    """The point over ``y`` with ``F = value``."""
    return Point(b.total, b.lift(value, y))
