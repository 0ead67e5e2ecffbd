"""Charts, points, coordinate field objects and exact differential primitives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .dual import Dual, new_tag, pack, real_array, sin, tangent

TWO_PI = 2.0 * np.pi

AD_TOL = 1e-9
FD_TOL = 1e-6


class DomainError(ValueError):
    """Raised when a field is evaluated outside its chart domain."""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class ChartMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Chart:
    name: str
    coord_names: tuple[str, ...]
    angle_mask: tuple[bool, ...] = ()
    domain_check: Optional[Callable[[np.ndarray], bool]] = None

    def __post_init__(self):
        if len(self.coord_names) < 1:
            raise ValueError("a chart needs at least one coordinate")
        mask = tuple(bool(m) for m in self.angle_mask) or (False,) * len(self.coord_names)
        if len(mask) != len(self.coord_names):
            raise ValueError("angle_mask length must equal the chart dimension")
        object.__setattr__(self, "angle_mask", mask)

    @property
    def dim(self) -> int:
        return len(self.coord_names)

    @property
    def angles(self) -> np.ndarray:
        return np.array(self.angle_mask, dtype=bool)

    def contains(self, coords) -> bool:
        x = real_array(coords)
        if x.shape != (self.dim,) or not np.all(np.isfinite(x)):
            return False
        return True if self.domain_check is None else bool(self.domain_check(x))

    def check(self, coords) -> None:
        if not self.contains(coords):
            raise DomainError(f"point {real_array(coords)} is outside chart {self.name!r}", coords)

    def wrap(self, coords) -> np.ndarray:
        x = np.array(coords, dtype=float)
        x[self.angles] = np.mod(x[self.angles], TWO_PI)
        return x

    def embed(self, coords) -> np.ndarray:
        """Angle coordinates become (sin, cos) pairs so comparisons ignore 2π jumps."""
        x = real_array(coords)
        a = self.angles
        return np.concatenate([x[~a], np.sin(x[a]), np.cos(x[a])])

    def distance(self, a, b) -> float:
        return float(np.max(np.abs(self.embed(a) - self.embed(b)), initial=0.0))

    def point(self, *coords) -> "Point":
        if len(coords) == 1 and np.ndim(coords[0]) == 1:
            coords = coords[0]
        return Point(self, coords)


@dataclass(frozen=True, eq=False)
class Point:
    chart: Chart
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.shape != (self.chart.dim,):
            raise ValueError(f"expected {self.chart.dim} coordinates, got shape {c.shape}")
        c = self.chart.wrap(c)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def close_to(self, other: "Point", tol: float = AD_TOL) -> bool:
        if other.chart is not self.chart:
            raise ChartMismatchError("points live in different charts")
        return self.chart.distance(self.coords, other.coords) < tol

    def __eq__(self, other):
        return isinstance(other, Point) and other.chart is self.chart and self.close_to(other)

    __hash__ = None


def coords_of(x, chart: Optional[Chart] = None) -> np.ndarray:
    """Coordinates of a Point or array; validates the domain for float input."""
    if isinstance(x, Point):
        if chart is not None and x.chart is not chart:
            raise ChartMismatchError(f"point in chart {x.chart.name!r}, expected {chart.name!r}")
        x.chart.check(x.coords)
        return x.coords
    arr = np.asarray(x)
    if arr.dtype != object:
        arr = arr.astype(float)
        if chart is not None:
            chart.check(arr)
    return arr


# fields ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _Field:
    chart: Chart
    fn: Callable
    name: str = ""

    def raw(self, x):
        return self.fn(x)


@dataclass(frozen=True, eq=False)
class ScalarField(_Field):
    def __call__(self, x):
        return self.fn(coords_of(x, self.chart))

    def _binary(self, other, op, label):
        if isinstance(other, ScalarField):
            if other.chart is not self.chart:
                raise ChartMismatchError("scalar fields on different charts")
            return ScalarField(self.chart, lambda x: op(self.fn(x), other.fn(x)), label)
        return ScalarField(self.chart, lambda x: op(self.fn(x), other), label)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b, "sum")

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b, "difference")

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b, "product")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, lambda a, b: a / b, "quotient")

    def __neg__(self):
        return ScalarField(self.chart, lambda x: -self.fn(x), self.name)

    def compose(self, mapping: Callable, chart: Chart) -> "ScalarField":
        """Pull back along a coordinate map ``chart -> self.chart``."""
        return ScalarField(chart, lambda x: self.fn(mapping(x)), self.name)


@dataclass(frozen=True, eq=False)
class VectorField(_Field):
    def __call__(self, x):
        return pack(self.fn(coords_of(x, self.chart)))

    def raw(self, x):
        return pack(self.fn(x))

    def apply(self, f: ScalarField) -> ScalarField:
        """The derivative X(f) as a scalar field."""
        return ScalarField(self.chart, lambda x: _dot(self.raw(x), gradient(f.fn, x)), "X(f)")


@dataclass(frozen=True, eq=False)
class OneFormField(_Field):
    def __call__(self, x):
        return pack(self.fn(coords_of(x, self.chart)))

    def raw(self, x):
        return pack(self.fn(x))


def _antisymmetrize(m):
    m = np.asarray(m)
    return (m - m.T) / 2.0


@dataclass(frozen=True, eq=False)
class BivectorField(_Field):
    """Antisymmetric contravariant 2-tensor; the matrix is antisymmetrized on evaluation."""

    def __call__(self, x):
        return _antisymmetrize(_as_matrix(self.fn(coords_of(x, self.chart))))

    def raw(self, x):
        return _antisymmetrize(_as_matrix(self.fn(x)))


@dataclass(frozen=True, eq=False)
class TwoFormField(_Field):
    def __call__(self, x):
        return _antisymmetrize(_as_matrix(self.fn(coords_of(x, self.chart))))

    def raw(self, x):
        return _antisymmetrize(_as_matrix(self.fn(x)))


def _as_matrix(rows) -> np.ndarray:
    if isinstance(rows, np.ndarray):
        return rows
    flat = [v for row in rows for v in row]
    n = len(rows)
    return pack(flat).reshape(n, len(flat) // n)


def constant_scalar(chart: Chart, value: float) -> ScalarField:
    return ScalarField(chart, lambda x: value, f"{value}")


def coordinate_function(chart: Chart, index: int) -> ScalarField:
    return ScalarField(chart, lambda x: x[index], chart.coord_names[index])


# differentiation ----------------------------------------------------------------


def _seed(x, direction, tag):
    x = np.asarray(x)
    out = np.empty(x.shape, dtype=object)
    for i, (xi, vi) in enumerate(zip(x.flat, np.asarray(direction).flat)):
        out[i] = Dual(tag, xi, vi) if vi != 0 else xi
    return out


def directional_derivative(fn: Callable, x, v):
    """Exact derivative of ``fn`` at ``x`` along ``v`` (works for nested duals)."""
    tag = new_tag()
    return tangent(_pack_output(fn(_seed(x, v, tag))), tag)


def jacobian(fn: Callable, x) -> np.ndarray:
    """Array whose last axis indexes the input coordinate: ``J[..., i] = d fn / d x_i``."""
    x = np.asarray(x)
    n = x.shape[0]
    cols = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        cols.append(directional_derivative(fn, x, e))
    return _stack_last(cols)


def gradient(fn: Callable, x) -> np.ndarray:
    return jacobian(fn, x)


def _pack_output(y):
    if isinstance(y, np.ndarray):
        return y
    if isinstance(y, (list, tuple)):
        if y and isinstance(y[0], (list, tuple, np.ndarray)):
            return _as_matrix(y)
        return pack(y)
    return y


def _stack_last(cols):
    arrs = [np.asarray(c) for c in cols]
    if any(a.dtype == object for a in arrs):
        arrs = [a.astype(object) for a in arrs]
    return np.stack(arrs, axis=-1)


def _dot(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.dtype == object or b.dtype == object:
        return np.dot(a.astype(object), b.astype(object))
    return float(np.dot(a, b))


def matmul(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.dtype == object or b.dtype == object:
        return np.dot(a.astype(object), b.astype(object))
    return a @ b


def differential(f: ScalarField, x) -> np.ndarray:
    """Covector of partial derivatives of ``f`` at ``x``."""
    return gradient(f.fn, coords_of(x, f.chart))


def vector_jacobian(field: VectorField, x) -> np.ndarray:
    return jacobian(field.raw, x)


def lie_bracket_vf(X: VectorField, Y: VectorField, x) -> np.ndarray:
    """Components of ``[X, Y] = DY·X − DX·Y`` at ``x``."""
    if X.chart is not Y.chart:
        raise ChartMismatchError("vector fields on different charts")
    c = coords_of(x, X.chart)
    return matmul(jacobian(Y.raw, c), X.raw(c)) - matmul(jacobian(X.raw, c), Y.raw(c))


def exterior_derivative_oneform(eta: OneFormField, x) -> np.ndarray:
    """Matrix with entry (i, j) equal to ∂_i η_j − ∂_j η_i."""
    c = coords_of(x, eta.chart)
    d = jacobian(eta.raw, c)  # d[j, i] = ∂_i η_j
    return d.T - d


def exterior_derivative_field(eta: OneFormField) -> TwoFormField:
    return TwoFormField(eta.chart, lambda x: (lambda d: d.T - d)(jacobian(eta.raw, x)), "d" + eta.name)


def pushforward(mapping: Callable, x, v) -> np.ndarray:
    """Tangent map of a coordinate map applied to ``v`` at ``x``."""
    return directional_derivative(mapping, np.asarray(x), v)


def central_difference(fn: Callable, x, step: float = 1e-6) -> np.ndarray:
    """Finite-difference Jacobian used only as an independent cross-check."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = step
        cols.append((np.asarray(fn(x + e), dtype=float) - np.asarray(fn(x - e), dtype=float)) / (2 * step))
    return np.stack(cols, axis=-1)


def wrapped_difference(chart: Chart, a, b) -> np.ndarray:
    """Coordinate difference with angle entries reduced to (−π, π]."""
    d = real_array(a) - real_array(b)
    m = chart.angles
    d[m] = np.mod(d[m] + np.pi, TWO_PI) - np.pi
    return d


def sample_box(rng: np.random.Generator, lows: Sequence[float], highs: Sequence[float], n: int) -> np.ndarray:
    lows = np.asarray(lows, dtype=float)
    highs = np.asarray(highs, dtype=float)
    return lows + (highs - lows) * rng.random((n, lows.shape[0]))


def random_smooth_function(chart: Chart, rng: np.random.Generator, name: str = "random") -> ScalarField:
    """Trigonometric-plus-quadratic test function, periodic in the angle coordinates."""
    n = chart.dim
    angles = chart.angles
    waves = []
    for _ in range(3):
        w = rng.uniform(-1.0, 1.0, n)
        w[angles] = rng.integers(-2, 3, int(angles.sum()))
        waves.append((float(rng.normal()), w, float(rng.uniform(0, TWO_PI))))
    lin = rng.normal(size=n) * ~angles
    quad = rng.normal(size=(n, n)) * 0.3 * np.outer(~angles, ~angles)
    c0 = float(rng.normal())

    def f(x):
        out = c0 + sum(lin[i] * x[i] for i in range(n) if lin[i] != 0.0)
        out = out + sum(quad[i, j] * x[i] * x[j] for i in range(n) for j in range(n) if quad[i, j] != 0.0)
        for amp, w, phase in waves:
            out = out + amp * sin(sum(w[i] * x[i] for i in range(n) if w[i] != 0.0) + phase)
        return out + 0.0 * x[0]

    return ScalarField(chart, f, name)


__all__ = [
    "AD_TOL",
    "FD_TOL",
    "BivectorField",
    "Chart",
    "ChartMismatchError",
    "DomainError",
    "OneFormField",
    "Point",
    "ScalarField",
    "TwoFormField",
    "VectorField",
    "central_difference",
    "constant_scalar",
    "coordinate_function",
    "coords_of",
    "differential",
    "directional_derivative",
    "exterior_derivative_field",
    "exterior_derivative_oneform",
    "gradient",
    "jacobian",
    "lie_bracket_vf",
    "matmul",
    "pushforward",
    "random_smooth_function",
    "sample_box",
    "vector_jacobian",
    "wrapped_difference",
]
