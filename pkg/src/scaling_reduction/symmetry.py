"""One-parameter group actions, quotient charts and scaling-function trivializations."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from .dual import Dual, new_tag, pack, real_array, tangent
from .numcore import (
    BivectorField,
    Chart,
    ScalarField,
    TwoFormField,
    VectorField,
    coords_of,
    jacobian,
    matmul,
)

HOMOGENEITY_TOL = 1e-9
TENSOR_TOL = 1e-8


class Group(Enum):
    R_TIMES = "R_times"
    R_PLUS = "R_plus"
    CIRCLE = "Circle"

    @property
    def identity(self) -> float:
        return 0.0 if self is Group.CIRCLE else 1.0

    def compose(self, s, t):
        return s + t if self is Group.CIRCLE else s * t

    def contains(self, s) -> bool:
        if self is Group.R_PLUS:
            return s > 0
        if self is Group.R_TIMES:
            return s != 0
        return True


class HomogeneityError(ValueError):
    pass


@dataclass
class Report:
    """Worst deviation of a sampled identity against its tolerance."""

    name: str
    max_deviation: float
    tolerance: float
    samples: int
    worst: object = None

    @property
    def passed(self) -> bool:
        return bool(self.max_deviation < self.tolerance)


def _report(name: str, deviations: Iterable[tuple[float, object]], tol: float) -> Report:
    worst_dev, worst_at, n = -1.0, None, 0
    for dev, at in deviations:
        n += 1
        dev = float(dev) if np.isfinite(dev) else np.inf
        if dev > worst_dev:
            worst_dev, worst_at = dev, at
    return Report(name, max(worst_dev, 0.0), tol, n, worst_at)


@dataclass(frozen=True, eq=False)
class OneParamAction:
    group: Group
    act: Callable
    chart: Chart
    name: str = ""

    def __call__(self, s, x):
        return pack(list(self.act(s, coords_of(x, self.chart))))

    def raw(self, s, x):
        return pack(list(self.act(s, x)))


def identity_action(chart: Chart, group: Group = Group.CIRCLE) -> OneParamAction:
    return OneParamAction(group, lambda s, x: x, chart, "identity")


def generator(a: OneParamAction, x) -> np.ndarray:
    """Infinitesimal generator ``d/ds act(s, x)`` at the group identity."""
    c = coords_of(x, a.chart)
    tag = new_tag()
    return tangent(a.raw(Dual(tag, a.group.identity, 1.0), c), tag)


def generator_field(a: OneParamAction) -> VectorField:
    return VectorField(a.chart, lambda x: generator(a, x), f"generator of {a.name}")


def action_jacobian(a: OneParamAction, s, x) -> np.ndarray:
    return jacobian(lambda z: a.raw(s, z), x)


def check_group_law(a: OneParamAction, samples: Sequence[tuple], tol: float = HOMOGENEITY_TOL) -> Report:
    """``act(e, x) = x`` and ``act(s, act(t, x)) = act(s·t, x)`` on ``(s, t, x)`` samples."""

    def devs():
        for s, t, x in samples:
            x = np.asarray(x, dtype=float)
            d1 = a.chart.distance(a.raw(a.group.identity, x), x)
            d2 = a.chart.distance(a.raw(s, a.raw(t, x)), a.raw(a.group.compose(s, t), x))
            yield max(d1, d2), (s, t, x)

    return _report("group law", devs(), tol)


# predicates ----------------------------------------------------------------------


def check_scalar_homogeneity(f: ScalarField, a: OneParamAction, samples, tol: float = HOMOGENEITY_TOL) -> Report:
    """``max |f(act(s, x)) − s f(x)|`` over ``(s, x)`` samples."""

    def devs():
        for s, x in samples:
            x = np.asarray(x, dtype=float)
            yield abs(float(f.fn(a.raw(s, x)) - s * f.fn(x))), (s, x)

    return _report("scalar homogeneity", devs(), tol)


def check_bivector_scaling(pi: BivectorField, a: OneParamAction, samples, tol: float = TENSOR_TOL) -> Report:
    """Compare ``J Π(x) Jᵀ`` with ``s Π(act(s, x))`` where ``J`` is the Jacobian of ``act(s, ·)``."""

    def devs():
        for s, x in samples:
            x = np.asarray(x, dtype=float)
            j = real_array(action_jacobian(a, s, x))
            moved = j @ real_array(pi.raw(x)) @ j.T
            yield float(np.max(np.abs(moved - s * real_array(pi.raw(a.raw(s, x)))))), (s, x)

    return _report("bivector scaling", devs(), tol)


def check_twoform_scaling(omega: TwoFormField, a: OneParamAction, samples, tol: float = TENSOR_TOL) -> Report:
    """Pullback ``Jᵀ ω(act(s, x)) J`` against ``s ω(x)``."""

    def devs():
        for s, x in samples:
            x = np.asarray(x, dtype=float)
            j = real_array(action_jacobian(a, s, x))
            pulled = j.T @ real_array(omega.raw(a.raw(s, x))) @ j
            yield float(np.max(np.abs(pulled - s * real_array(omega.raw(x))))), (s, x)

    return _report("two-form scaling", devs(), tol)


def check_invariance(obj, a: OneParamAction, samples, tol: float = TENSOR_TOL) -> Report:
    """Finite-form invariance of a scalar, bivector, two-form or vector field."""

    def devs():
        for g, x in samples:
            x = np.asarray(x, dtype=float)
            y = a.raw(g, x)
            if isinstance(obj, ScalarField):
                dev = abs(float(obj.fn(y) - obj.fn(x)))
            else:
                j = real_array(action_jacobian(a, g, x))
                if isinstance(obj, BivectorField):
                    dev = np.max(np.abs(j @ real_array(obj.raw(x)) @ j.T - real_array(obj.raw(y))))
                elif isinstance(obj, TwoFormField):
                    dev = np.max(np.abs(j.T @ real_array(obj.raw(y)) @ j - real_array(obj.raw(x))))
                elif isinstance(obj, VectorField):
                    dev = np.max(np.abs(j @ real_array(obj.raw(x)) - real_array(obj.raw(y))))
                else:
                    raise TypeError(f"cannot test invariance of {type(obj).__name__}")
            yield float(dev), (g, x)

    return _report("invariance", devs(), tol)


# quotients and trivializations ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuotientChart:
    total: Chart
    base: Chart
    project: Callable
    section: Callable
    name: str = ""

    def project_raw(self, x):
        return pack(list(self.project(x)))

    def section_raw(self, y):
        return pack(list(self.section(y)))

    def project_jacobian(self, x) -> np.ndarray:
        return jacobian(self.project_raw, x)

    def pushforward(self, x, v) -> np.ndarray:
        return matmul(self.project_jacobian(x), v)

    def check_section(self, base_samples, tol: float = HOMOGENEITY_TOL) -> Report:
        def devs():
            for y in base_samples:
                y = np.asarray(y, dtype=float)
                yield self.base.distance(self.project_raw(self.section_raw(y)), y), y

        return _report("projection after section", devs(), tol)

    def check_fibers(self, a: OneParamAction, samples, tol: float = HOMOGENEITY_TOL) -> Report:
        def devs():
            for s, x in samples:
                x = np.asarray(x, dtype=float)
                yield self.base.distance(self.project_raw(a.raw(s, x)), self.project_raw(x)), (s, x)

        return _report("projection constant on orbits", devs(), tol)


def identity_quotient(chart: Chart) -> QuotientChart:
    return QuotientChart(chart, chart, lambda x: x, lambda y: y, "identity")


@dataclass(frozen=True, eq=False)
class ScalingBundle:
    quotient: QuotientChart
    action: OneParamAction
    F: ScalarField

    def __post_init__(self):
        if self.action.group is Group.CIRCLE:
            raise ValueError("a scaling bundle needs a multiplicative group")

    @property
    def total(self) -> Chart:
        return self.quotient.total

    @property
    def base(self) -> Chart:
        return self.quotient.base

    def check_homogeneity(self, samples, tol: float = HOMOGENEITY_TOL) -> Report:
        return check_scalar_homogeneity(self.F, self.action, samples, tol)

    def check_nonvanishing(self, points, floor: float = 1e-12) -> Report:
        def devs():
            for x in points:
                v = abs(float(self.F.fn(np.asarray(x, dtype=float))))
                yield (0.0 if v > floor else np.inf), x

        return _report("scaling function nonvanishing", devs(), 1.0)

    def normalize(self, x):
        """Move ``x`` along its orbit onto the image of the section."""
        s = self.F.fn(self.quotient.section_raw(self.quotient.project_raw(x))) / self.F.fn(x)
        return self.action.raw(s, x)

    def check_trivialization(self, points, tol: float = HOMOGENEITY_TOL) -> Report:
        """``(F, project)`` determines the point: normalization lands on the section."""

        def devs():
            for x in points:
                x = np.asarray(x, dtype=float)
                target = self.quotient.section_raw(self.quotient.project_raw(x))
                yield self.total.distance(self.normalize(x), target), x

        return _report("scaling trivialization", devs(), tol)

    def lift(self, value, y):
        """Inverse of ``(F, project)``: the point over ``y`` with ``F = value``."""
        x = self.quotient.section_raw(y)
        return self.action.raw(value / self.F.fn(x), x)


def hom_to_section(b: ScalingBundle, H: ScalarField, samples=None, tol: float = HOMOGENEITY_TOL) -> ScalarField:
    """Trivialized section ``h`` with ``h ∘ project = H / F``.

    When ``samples`` of ``(s, x)`` are given, homogeneity of ``H`` and constancy of
    ``H/F`` along fibers are asserted first.
    """
    if samples is not None:
        rep = check_scalar_homogeneity(H, b.action, samples, tol)
        if not rep.passed:
            raise HomogeneityError(f"function is not homogeneous of degree one: {rep.max_deviation:.3e}")
    q = b.quotient

    def h(y):
        x = q.section_raw(y)
        return H.fn(x) / b.F.fn(x)

    return ScalarField(b.base, h, f"h[{H.name}]")


def section_to_hom(b: ScalingBundle, h: ScalarField) -> ScalarField:
    """Degree-one homogeneous ``H = F · (h ∘ project)``."""
    q = b.quotient
    return ScalarField(b.total, lambda x: b.F.fn(x) * h.fn(q.project_raw(x)), f"H[{h.name}]")


def induced_action(a: OneParamAction, q: QuotientChart, name: str = "") -> OneParamAction:
    """Action on the base of ``q`` induced by an action commuting with the quotiented one."""
    return OneParamAction(
        a.group,
        lambda s, y: q.project_raw(a.raw(s, q.section_raw(y))),
        q.base,
        name or f"induced {a.name}",
    )


def action_samples(rng: np.random.Generator, group: Group, points, low: float = 0.5, high: float = 2.0):
    """Pair each point with a random group element (negative reals allowed for ℝ^×)."""
    out = []
    for x in points:
        if group is Group.CIRCLE:
            s = float(rng.uniform(-np.pi, np.pi))
        else:
            s = float(rng.uniform(low, high))
            if group is Group.R_TIMES and rng.random() < 0.5:
                s = -s
        out.append((s, np.asarray(x, dtype=float)))
    return out
