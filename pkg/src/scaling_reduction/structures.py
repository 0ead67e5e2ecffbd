"""Symplectic, Poisson, Jacobi and contact Hamiltonian systems on a single chart.

Sign conventions, fixed by executable anchors:

* symplectic fields solve ``ω(X, ·) = dH`` with ``ω_ij = ω(∂_i, ∂_j)``, so on the
  canonical ``(q, p)`` chart with ``ω = dq∧dp`` the Hamiltonian ``p`` gives ``∂_q``;
* the Poisson tensor of ``ω`` is ``−ω⁻¹`` and ``{f, g} = Σ Π^{ij} ∂_i f ∂_j g``;
* Hamiltonian fields of a Poisson or Jacobi structure are ``X_f = Π(·, df) − f E``,
  hence ``X_f(g) = {g, f} + g E(f)``;
* contact Hamiltonian fields solve ``dη(·, X) = dh − ℛ(h) η`` and ``η(X) = h``
  (equivalently ``i_X dη = ℛ(h) η − dh`` contracting the first slot), which is the
  pair making ``X`` an infinitesimal contact transformation;
* with ``♭(X) = dη(·, X) + η(X) η`` the contact Jacobi structure is
  ``Π(α, β) = −dη(♭⁻¹α, ♭⁻¹β)`` and ``E = −ℛ``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import linalg
from .dual import pack, real_array, scale
from .numcore import (
    BivectorField,
    Chart,
    ChartMismatchError,
    OneFormField,
    ScalarField,
    TwoFormField,
    VectorField,
    coords_of,
    gradient,
    jacobian,
    matmul,
    pushforward,
)


class ContactDegeneracyError(linalg.SingularSystemError):
    pass


def _same_chart(*objs) -> Chart:
    chart = objs[0].chart
    for o in objs[1:]:
        if o.chart is not chart:
            raise ChartMismatchError(f"chart {o.chart.name!r} differs from {chart.name!r}")
    return chart


def antisymmetric_pairing(pi, a, b):
    """``Σ_{i<j} Π_ij (a_i b_j − a_j b_i)``; vanishes exactly when ``a is b``."""
    pi = np.asarray(pi)
    a = np.asarray(a)
    b = np.asarray(b)
    i, j = np.triu_indices(pi.shape[0], 1)
    terms = pi[i, j] * (a[i] * b[j] - a[j] * b[i])
    return terms.sum() if terms.size else 0.0


# systems -------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SymplecticSystem:
    chart: Chart
    omega: TwoFormField
    hamiltonian: Optional[ScalarField] = None

    def __post_init__(self):
        if self.chart.dim % 2:
            raise ValueError("a symplectic chart must have even dimension")

    def poisson_tensor(self) -> BivectorField:
        def pi(x):
            w = self.omega.raw(x)
            return -linalg.inverse(w)

        return BivectorField(self.chart, pi, "inverse of omega")


@dataclass(frozen=True, eq=False)
class PoissonSystem:
    chart: Chart
    pi: BivectorField
    hamiltonian: Optional[ScalarField] = None


@dataclass(frozen=True, eq=False)
class JacobiSystem:
    chart: Chart
    pi: BivectorField
    e: VectorField
    hamiltonian: Optional[ScalarField] = None


@dataclass(frozen=True, eq=False)
class ContactFormSystem:
    chart: Chart
    eta: OneFormField
    hamiltonian: Optional[ScalarField] = None

    def __post_init__(self):
        if self.chart.dim % 2 == 0:
            raise ValueError("a contact chart must have odd dimension")


def as_jacobi(sys: PoissonSystem) -> JacobiSystem:
    zero = VectorField(sys.chart, lambda x: np.zeros(len(x)), "0")
    return JacobiSystem(sys.chart, sys.pi, zero, sys.hamiltonian)


def symplectic_as_poisson(sys: SymplecticSystem) -> PoissonSystem:
    return PoissonSystem(sys.chart, sys.poisson_tensor(), sys.hamiltonian)


# Poisson and symplectic ----------------------------------------------------------


def poisson_bracket(sys, f: ScalarField, g: ScalarField) -> ScalarField:
    """``x ↦ Π(df, dg)(x)`` for a Poisson system (or the Poisson part of a Jacobi one)."""
    _same_chart(sys, f, g)

    def bracket(x):
        return antisymmetric_pairing(sys.pi.raw(x), gradient(f.fn, x), gradient(g.fn, x))

    return ScalarField(sys.chart, bracket, f"{{{f.name},{g.name}}}")


def poisson_hvf(sys: PoissonSystem, f: ScalarField) -> VectorField:
    _same_chart(sys, f)
    return VectorField(sys.chart, lambda x: matmul(sys.pi.raw(x), gradient(f.fn, x)), f"X_{f.name}")


def symplectic_hvf(sys: SymplecticSystem, f: Optional[ScalarField] = None) -> VectorField:
    """Solve ``ω(X, ·) = df`` pointwise; ``f`` defaults to the system's Hamiltonian."""
    f = sys.hamiltonian if f is None else f
    _same_chart(sys, f)

    def field_(x):
        w = sys.omega.raw(x)
        linalg.ensure_well_conditioned(w, "symplectic form", x)
        return linalg.solve(w, -gradient(f.fn, x))

    return VectorField(sys.chart, field_, f"X_{f.name}")


def symplectic_bracket(sys: SymplecticSystem, f: ScalarField, g: ScalarField) -> ScalarField:
    return poisson_bracket(symplectic_as_poisson(sys), f, g)


def closedness_residual(omega: TwoFormField, x) -> float:
    """Largest cyclic sum ``∂_i ω_jk + ∂_j ω_ki + ∂_k ω_ij`` at ``x``."""
    d = jacobian(omega.raw, coords_of(x, omega.chart))  # d[j, k, i] = ∂_i ω_jk
    d = real_array(d)
    cyc = np.einsum("jki->ijk", d) + np.einsum("kij->ijk", d) + np.einsum("ijk->ijk", d)
    return float(np.max(np.abs(cyc), initial=0.0))


# Jacobi ---------------------------------------------------------------------------


def jacobi_bracket(sys: JacobiSystem, f: ScalarField, g: ScalarField) -> ScalarField:
    """``{f, g} = Π(df, dg) + f E(g) − g E(f)``."""
    _same_chart(sys, f, g)

    def bracket(x):
        df = gradient(f.fn, x)
        dg = gradient(g.fn, x)
        e = sys.e.raw(x)
        return (
            antisymmetric_pairing(sys.pi.raw(x), df, dg)
            + f.fn(x) * matmul(e, dg)
            - g.fn(x) * matmul(e, df)
        )

    return ScalarField(sys.chart, bracket, f"{{{f.name},{g.name}}}")


def jacobi_hvf(sys: JacobiSystem, f: ScalarField) -> VectorField:
    """``X_f = Π(·, df) − f E``."""
    _same_chart(sys, f)

    def field_(x):
        return matmul(sys.pi.raw(x), gradient(f.fn, x)) - scale(sys.e.raw(x), f.fn(x))

    return VectorField(sys.chart, field_, f"X_{f.name}")


def frozen_at(sys, x):
    """Replace the structure tensors by their first-order Taylor polynomial at ``x``.

    Brackets nested to depth two and Lie brackets of Hamiltonian fields only see
    the tensors' values and first derivatives at ``x``, so evaluating them on the
    frozen system at ``x`` is exact while avoiding repeated differentiation of
    expensive reduced structures.
    """
    x = real_array(coords_of(x, sys.chart))
    pi0 = real_array(sys.pi.raw(x))
    dpi = real_array(jacobian(sys.pi.raw, x))
    pi = BivectorField(sys.chart, lambda z: pi0 + matmul(dpi, np.asarray(z) - x), "frozen pi")
    if isinstance(sys, PoissonSystem):
        return PoissonSystem(sys.chart, pi, sys.hamiltonian)
    e0 = real_array(sys.e.raw(x))
    de = real_array(jacobian(sys.e.raw, x))
    e = VectorField(sys.chart, lambda z: e0 + matmul(de, np.asarray(z) - x), "frozen E")
    return JacobiSystem(sys.chart, pi, e, sys.hamiltonian)


def _bracket_for(sys) -> Callable:
    return poisson_bracket if isinstance(sys, PoissonSystem) else jacobi_bracket


def jacobi_identity_residual(sys, f: ScalarField, g: ScalarField, h: ScalarField, x, local=None) -> float:
    """``|{f,{g,h}} + {g,{h,f}} + {h,{f,g}}|`` at ``x``.

    ``local`` may carry ``frozen_at(sys, x)`` when many triples share a point.
    """
    local = frozen_at(sys, x) if local is None else local
    b = _bracket_for(local)
    cyclic = b(local, f, b(local, g, h)) + b(local, g, b(local, h, f)) + b(local, h, b(local, f, g))
    return abs(float(cyclic(x)))


def hamiltonian_field(sys, f: ScalarField) -> VectorField:
    if isinstance(sys, PoissonSystem):
        return poisson_hvf(sys, f)
    if isinstance(sys, JacobiSystem):
        return jacobi_hvf(sys, f)
    if isinstance(sys, SymplecticSystem):
        return symplectic_hvf(sys, f)
    if isinstance(sys, ContactFormSystem):
        return contact_hvf(sys, f)
    raise TypeError(f"no Hamiltonian field for {type(sys).__name__}")


def bracket(sys, f: ScalarField, g: ScalarField) -> ScalarField:
    if isinstance(sys, SymplecticSystem):
        return symplectic_bracket(sys, f, g)
    return _bracket_for(sys)(sys, f, g)


# contact --------------------------------------------------------------------------


def _contact_data(sys: ContactFormSystem, x):
    eta = sys.eta.raw(x)
    d = jacobian(sys.eta.raw, x)
    return eta, d.T - d


def _check_contact(matrix, x):
    try:
        linalg.ensure_well_conditioned(matrix, "contact system", x)
    except linalg.SingularSystemError as err:
        raise ContactDegeneracyError(str(err), x) from None


def _reeb_at(sys: ContactFormSystem, x):
    eta, m = _contact_data(sys, x)
    a = np.vstack([m, np.asarray(eta)[None, :]])
    _check_contact(a, x)
    rhs = np.zeros(len(eta) + 1)
    rhs[-1] = 1.0
    return linalg.lstsq(a, rhs)


def reeb_field(sys: ContactFormSystem) -> VectorField:
    """Least-squares solution of ``i_ℛ dη = 0``, ``η(ℛ) = 1``."""
    return VectorField(sys.chart, lambda x: _reeb_at(sys, x), "Reeb")


def reeb_residuals(sys: ContactFormSystem, x) -> tuple[float, float]:
    c = coords_of(x, sys.chart)
    eta, m = _contact_data(sys, c)
    r = real_array(_reeb_at(sys, c))
    eta, m = real_array(eta), real_array(m)
    return float(np.max(np.abs(m @ r), initial=0.0)), abs(float(eta @ r) - 1.0)


def _contact_hvf_at(sys: ContactFormSystem, h: ScalarField, x):
    eta, m = _contact_data(sys, x)
    reeb = _reeb_at(sys, x)
    dh = gradient(h.fn, x)
    reeb_h = matmul(reeb, dh)
    a = np.vstack([m, np.asarray(eta)[None, :]])
    _check_contact(a, x)
    rhs = pack([dh[i] - reeb_h * eta[i] for i in range(len(eta))] + [h.fn(x)])
    return linalg.lstsq(a, rhs)


def contact_hvf(sys: ContactFormSystem, h: Optional[ScalarField] = None) -> VectorField:
    """Solve ``dη(·, X) = dh − ℛ(h) η`` and ``η(X) = h`` pointwise."""
    h = sys.hamiltonian if h is None else h
    _same_chart(sys, h)
    return VectorField(sys.chart, lambda x: _contact_hvf_at(sys, h, x), f"X_{h.name}")


def contact_residuals(sys: ContactFormSystem, h: ScalarField, x) -> tuple[float, float]:
    """Residuals of both defining conditions of the contact Hamiltonian field at ``x``."""
    c = coords_of(x, sys.chart)
    eta, m = (real_array(v) for v in _contact_data(sys, c))
    reeb = real_array(_reeb_at(sys, c))
    dh = real_array(gradient(h.fn, c))
    hv = float(h.fn(c))
    xv = real_array(_contact_hvf_at(sys, h, c))
    first = m @ xv - (dh - (reeb @ dh) * eta)
    return float(np.max(np.abs(first), initial=0.0)), abs(float(eta @ xv) - hv)


def flat_map(eta, m):
    """Matrix of ``X ↦ dη(·, X) + η(X) η``."""
    eta = np.asarray(eta)
    return np.asarray(m) + np.outer(eta, eta)


def jacobi_from_contact(sys: ContactFormSystem) -> JacobiSystem:
    """Jacobi structure ``Π(α, β) = −dη(♭⁻¹α, ♭⁻¹β)``, ``E = −ℛ``."""

    def pi(x):
        eta, m = _contact_data(sys, x)
        b = flat_map(eta, m)
        _check_contact(b, x)
        binv = linalg.inverse(b)
        return -matmul(matmul(binv.T, m), binv)

    reeb = reeb_field(sys)
    e = VectorField(sys.chart, lambda x: -reeb.raw(x), "-Reeb")
    return JacobiSystem(sys.chart, BivectorField(sys.chart, pi, "contact pi"), e, sys.hamiltonian)


# chart atlases --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChartTransition:
    """Scalar factor ``a_ij`` (on chart i) and coordinate change chart i → chart j."""

    factor: ScalarField
    change: Callable
    overlap: Callable = field(default=lambda x: True)


@dataclass(frozen=True, eq=False)
class KirillovAtlas:
    charts: tuple
    transitions: dict

    def transition(self, i: int, j: int) -> ChartTransition:
        try:
            return self.transitions[(i, j)]
        except KeyError:
            raise KeyError(f"no transition from chart {i} to chart {j}") from None

    def represent(self, h_j: ScalarField, i: int, j: int) -> ScalarField:
        """Chart-i representative ``a_ij · (h_j ∘ change)`` of a section given on chart j."""
        t = self.transition(i, j)
        chart = self.charts[i].chart
        return ScalarField(chart, lambda x: t.factor.fn(x) * h_j.fn(t.change(x)), h_j.name)

    def cocycle_residual(self, i: int, j: int, k: int, x) -> float:
        x = np.asarray(x, dtype=float)
        tij, tjk = self.transition(i, j), self.transition(j, k)
        y = tij.change(x)
        lhs = tij.factor.fn(x) * tjk.factor.fn(y)
        rhs = 1.0 if i == k else self.transition(i, k).factor.fn(x)
        return abs(float(lhs - rhs))

    def bracket_compatibility_residual(self, h1: ScalarField, h2: ScalarField, i: int, j: int, x) -> float:
        x = np.asarray(x, dtype=float)
        t = self.transition(i, j)
        si, sj = self.charts[i], self.charts[j]
        lhs = jacobi_bracket(si, self.represent(h1, i, j), self.represent(h2, i, j)).fn(x)
        rhs = t.factor.fn(x) * jacobi_bracket(sj, h1, h2).fn(t.change(x))
        return abs(float(lhs - rhs))

    def symbol_compatibility_residual(self, h: ScalarField, i: int, j: int, x) -> float:
        x = np.asarray(x, dtype=float)
        t = self.transition(i, j)
        xi = kirillov_symbol(self, self.represent(h, i, j), i).fn(x)
        xj = kirillov_symbol(self, h, j).fn(t.change(x))
        moved = pushforward(t.change, x, real_array(xi))
        return float(np.max(np.abs(real_array(moved) - real_array(xj))))


def kirillov_symbol(atlas: KirillovAtlas, h_local: ScalarField, chart_index: int) -> VectorField:
    """Symbol of the section whose chart-local representative is ``h_local``."""
    if not 0 <= chart_index < len(atlas.charts):
        raise IndexError(f"atlas has no chart {chart_index}")
    return jacobi_hvf(atlas.charts[chart_index], h_local)
