"""Reduction by standard and scaling symmetries, the two composite pipelines and ψ.

Reduced tensors are evaluated by lifting a base point through the supplied
section, computing brackets of lifted coordinate functions upstairs and
reading off components.  Optional ``samples`` (points of the total chart)
trigger the postcondition checks; failures raise :class:`ReductionError`.

The trivialized bracket on the base of a scaling bundle is

    {h₁, h₂} ∘ p = (1/F) {F·(h₁∘p), F·(h₂∘p)},

with a plus sign: it is the sign for which the pushforward of a Hamiltonian
field equals the symbol ``X_h = Π(·, dh) − h E`` of the reduced section.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .dual import pack, real_array, scale
from .numcore import (
    BivectorField,
    Chart,
    OneFormField,
    ScalarField,
    VectorField,
    gradient,
    jacobian,
    lie_bracket_vf,
    matmul,
)
from .structures import (
    ContactFormSystem,
    JacobiSystem,
    PoissonSystem,
    SymplecticSystem,
    antisymmetric_pairing,
    contact_hvf,
    frozen_at,
    jacobi_bracket,
    jacobi_from_contact,
    jacobi_hvf,
    poisson_hvf,
    reeb_field,
    symplectic_hvf,
)
from .symmetry import (
    Group,
    OneParamAction,
    QuotientChart,
    Report,
    ScalingBundle,
    _report,
    check_bivector_scaling,
    check_invariance,
    check_scalar_homogeneity,
    check_twoform_scaling,
    generator,
    hom_to_section,
    induced_action,
)

PROJECTION_TOL = 1e-8
FIBER_TOL = 1e-8

# fixed group elements used to probe fiber independence
SCALING_PROBES = (0.7, 1.6)
CIRCLE_PROBES = (0.4, -1.1)


class ReductionError(ValueError):
    pass


class EquivalenceError(ReductionError):
    pass


def _raise_if_failed(reports: Sequence[Report], what: str):
    bad = [r for r in reports if not r.passed]
    if bad:
        details = "; ".join(f"{r.name}: {r.max_deviation:.3e} ≥ {r.tolerance:.0e}" for r in bad)
        raise ReductionError(f"{what}: {details}")


def _probes(group: Group):
    return CIRCLE_PROBES if group is Group.CIRCLE else SCALING_PROBES


def _extract(m, values):
    """Split bracket values of ``(1, y_1, …, y_k)`` into ``(Π, E)``.

    ``m[a, b]`` is the bracket of the a-th and b-th function, index 0 being the
    constant function; ``values`` are the coordinate values ``y_i``.
    """
    e = m[0, 1:]
    pi = m[1:, 1:] - np.outer(values, e) + np.outer(e, values)
    return pi, e


# standard symmetry -------------------------------------------------------------


def _standard_poisson_at(pi_total, q: QuotientChart, x):
    j = q.project_jacobian(x)
    return matmul(matmul(j, pi_total.raw(x)), j.T)


def reduce_symplectic_by_standard(
    sys: SymplecticSystem,
    q: QuotientChart,
    actions: Sequence[OneParamAction] = (),
    samples=None,
) -> PoissonSystem:
    """Poisson structure on the orbit space with ``Π^{ij} = {y_i∘p, y_j∘p}`` at a lift."""
    pi_total = sys.poisson_tensor()

    def pi(y):
        return _standard_poisson_at(pi_total, q, q.section_raw(y))

    H = sys.hamiltonian
    reduced_h = None
    if H is not None:
        reduced_h = ScalarField(q.base, lambda y: H.fn(q.section_raw(y)), f"{H.name} on orbit space")
    out = PoissonSystem(q.base, BivectorField(q.base, pi, "orbit-space Poisson"), reduced_h)

    if samples is not None:
        reports = []
        for a in actions:
            pairs = [(g, x) for x in samples for g in CIRCLE_PROBES]
            reports.append(check_invariance(sys.omega, a, pairs))
            if H is not None:
                reports.append(check_invariance(H, a, pairs))
        reports.append(standard_projection_report(sys, q, out, samples))
        _raise_if_failed(reports, "standard reduction of symplectic system")
    return out


def standard_projection_report(sys, q: QuotientChart, reduced, samples, tol: float = PROJECTION_TOL) -> Report:
    """Pushforward of the upstairs tensors equals the reduced tensors at the image point."""
    upstairs = sys.poisson_tensor() if isinstance(sys, SymplecticSystem) else sys.pi

    def devs():
        for x in samples:
            x = np.asarray(x, dtype=float)
            y = q.project_raw(x)
            dev = np.max(np.abs(real_array(_standard_poisson_at(upstairs, q, x)) - real_array(reduced.pi.raw(y))))
            if isinstance(sys, JacobiSystem):
                moved = real_array(matmul(q.project_jacobian(x), sys.e.raw(x)))
                dev = max(dev, np.max(np.abs(moved - real_array(reduced.e.raw(y)))))
            yield float(dev), x

    return _report("pushforward of structure", devs(), tol)


def _standard_jacobi_at(sys: JacobiSystem, q: QuotientChart, x):
    j = q.project_jacobian(x)
    values = q.project_raw(x)
    rows = np.vstack([np.zeros((1, j.shape[1])), j])
    funcs = pack([1.0] + list(values))
    ge = matmul(rows, sys.e.raw(x))
    m = matmul(matmul(rows, sys.pi.raw(x)), rows.T) + np.outer(funcs, ge) - np.outer(ge, funcs)
    return _extract(m, values)


def reduce_jacobi_by_standard(
    sys: JacobiSystem,
    q: QuotientChart,
    actions: Sequence[OneParamAction] = (),
    samples=None,
) -> JacobiSystem:
    """Jacobi structure on the orbit space from brackets of invariant lifts."""
    pi = BivectorField(q.base, lambda y: _standard_jacobi_at(sys, q, q.section_raw(y))[0], "orbit-space Π")
    e = VectorField(q.base, lambda y: _standard_jacobi_at(sys, q, q.section_raw(y))[1], "orbit-space E")
    H = sys.hamiltonian
    reduced_h = None
    if H is not None:
        reduced_h = ScalarField(q.base, lambda y: H.fn(q.section_raw(y)), f"{H.name} on orbit space")
    out = JacobiSystem(q.base, pi, e, reduced_h)

    if samples is not None:
        reports = []
        for a in actions:
            pairs = [(g, x) for x in samples for g in CIRCLE_PROBES]
            reports.append(check_invariance(sys.pi, a, pairs))
            reports.append(check_invariance(sys.e, a, pairs))
            if H is not None:
                reports.append(check_invariance(H, a, pairs))
        reports.append(standard_projection_report(sys, q, out, samples))
        if H is not None:
            reports.append(symbol_projection_report(jacobi_hvf(sys, H), q, jacobi_hvf(out, reduced_h), samples))
        _raise_if_failed(reports, "standard reduction of Jacobi system")
    return out


def symbol_projection_report(upstairs: VectorField, q: QuotientChart, downstairs: VectorField, samples,
                             tol: float = PROJECTION_TOL, name: str = "projection of Hamiltonian field") -> Report:
    def devs():
        for x in samples:
            x = np.asarray(x, dtype=float)
            moved = real_array(q.pushforward(x, upstairs.raw(x)))
            yield float(np.max(np.abs(moved - real_array(downstairs.raw(q.project_raw(x)))))), x

    return _report(name, devs(), tol)


# scaling symmetry ---------------------------------------------------------------


def _scaling_jacobi_at(sys: PoissonSystem, b: ScalingBundle, x):
    q = b.quotient
    f = b.F.fn(x)
    df = gradient(b.F.fn, x)
    j = q.project_jacobian(x)
    values = q.project_raw(x)
    rows = np.vstack([np.asarray(df)[None, :], np.outer(values, df) + scale(j, f)])
    m = scale(matmul(matmul(rows, sys.pi.raw(x)), rows.T), 1.0 / f)
    return _extract(m, values)


def trivialized_bracket(sys: PoissonSystem, b: ScalingBundle, h1: ScalarField, h2: ScalarField) -> ScalarField:
    """Base bracket defined directly by ``(1/F){F h₁∘p, F h₂∘p}`` at the section."""
    q = b.quotient
    F = b.F

    def lifted(h):
        return lambda x: F.fn(x) * h.fn(q.project_raw(x))

    def value(y):
        x = q.section_raw(y)
        return antisymmetric_pairing(sys.pi.raw(x), gradient(lifted(h1), x), gradient(lifted(h2), x)) / F.fn(x)

    return ScalarField(b.base, value, f"{{{h1.name},{h2.name}}}")


def reduce_poisson_by_scaling(sys: PoissonSystem, b: ScalingBundle, samples=None) -> JacobiSystem:
    """Jacobi structure on the base of a scaling bundle of a homogeneous Poisson system."""
    q = b.quotient
    pi = BivectorField(b.base, lambda y: _scaling_jacobi_at(sys, b, q.section_raw(y))[0], "scaled Π")
    e = VectorField(b.base, lambda y: _scaling_jacobi_at(sys, b, q.section_raw(y))[1], "scaled E")
    h = hom_to_section(b, sys.hamiltonian) if sys.hamiltonian is not None else None
    out = JacobiSystem(b.base, pi, e, h)

    if samples is not None:
        pairs = [(s, x) for x in samples for s in _probes(b.action.group)]
        reports = [check_bivector_scaling(sys.pi, b.action, pairs), b.check_homogeneity(pairs)]
        if sys.hamiltonian is not None:
            reports.append(check_scalar_homogeneity(sys.hamiltonian, b.action, pairs))
        reports.append(scaling_fiber_report(sys, b, samples))
        if h is not None:
            reports.append(
                symbol_projection_report(poisson_hvf(sys, sys.hamiltonian), q, jacobi_hvf(out, h), samples)
            )
        _raise_if_failed(reports, "scaling reduction of Poisson system")
    return out


def scaling_fiber_report(sys: PoissonSystem, b: ScalingBundle, samples, tol: float = FIBER_TOL) -> Report:
    """Extracted components must not depend on the point chosen in the fiber."""

    def devs():
        for x in samples:
            x = np.asarray(x, dtype=float)
            ref_pi, ref_e = (real_array(v) for v in _scaling_jacobi_at(sys, b, x))
            for s in _probes(b.action.group):
                other = b.action.raw(s, x)
                pi, e = (real_array(v) for v in _scaling_jacobi_at(sys, b, other))
                yield float(max(np.max(np.abs(pi - ref_pi)), np.max(np.abs(e - ref_e)))), other

    return _report("fiber independence", devs(), tol)


def liouville_form(sys: SymplecticSystem, action: OneParamAction) -> Callable:
    """``λ = −ω(Δ, ·)`` with Δ the generator of the scaling action."""

    def lam(x):
        return -matmul(generator(action, x), sys.omega.raw(x))

    return lam


def reduce_symplectic_by_scaling(sys: SymplecticSystem, b: ScalingBundle, samples=None) -> ContactFormSystem:
    """Contact form ``η = σ*(λ/F)`` on the base of the scaling bundle."""
    q = b.quotient
    lam = liouville_form(sys, b.action)

    def eta(y):
        x = q.section_raw(y)
        js = jacobian(q.section_raw, y)
        return matmul(scale(lam(x), 1.0 / b.F.fn(x)), js)

    h = hom_to_section(b, sys.hamiltonian) if sys.hamiltonian is not None else None
    out = ContactFormSystem(b.base, OneFormField(b.base, eta, "η"), h)

    if samples is not None:
        pairs = [(s, x) for x in samples for s in _probes(b.action.group)]
        reports = [
            check_twoform_scaling(sys.omega, b.action, pairs),
            b.check_homogeneity(pairs),
            contact_pullback_report(sys, b, out, samples),
            symbol_projection_report(symplectic_hvf(sys, b.F), q, reeb_field(out), samples,
                                     name="Reeb field is the projected field of F"),
        ]
        if sys.hamiltonian is not None:
            reports.append(check_scalar_homogeneity(sys.hamiltonian, b.action, pairs))
            reports.append(symbol_projection_report(symplectic_hvf(sys), q, contact_hvf(out, h), samples))
        _raise_if_failed(reports, "scaling reduction of symplectic system")
    return out


def contact_pullback_report(sys: SymplecticSystem, b: ScalingBundle, contact: ContactFormSystem, samples,
                            tol: float = PROJECTION_TOL) -> Report:
    """``p*η = λ/F`` at sampled total-space points."""
    lam = liouville_form(sys, b.action)
    q = b.quotient

    def devs():
        for x in samples:
            x = np.asarray(x, dtype=float)
            pulled = real_array(matmul(contact.eta.raw(q.project_raw(x)), q.project_jacobian(x)))
            yield float(np.max(np.abs(pulled - real_array(lam(x)) / b.F.fn(x)))), x

    return _report("pullback of contact form", devs(), tol)


# compatible symmetries and pipelines ----------------------------------------------


@dataclass(frozen=True, eq=False)
class CompatiblePair:
    """Symplectic system with commuting scaling and standard symmetries plus chart data.

    ``standard`` lists circle actions generating the standard symmetry group;
    ``standard_quotient`` maps the total chart to the orbit space, ``poisson_quotient``
    is the scaling quotient of that orbit space and ``contact_quotient`` the
    standard quotient of the scaling base.
    """

    system: SymplecticSystem
    scaling: ScalingBundle
    standard: tuple
    standard_quotient: QuotientChart
    poisson_quotient: QuotientChart
    contact_quotient: QuotientChart
    name: str = ""

    @property
    def poisson_scaling(self) -> OneParamAction:
        return induced_action(self.scaling.action, self.standard_quotient, "induced scaling")

    @property
    def poisson_bundle(self) -> ScalingBundle:
        q = self.standard_quotient
        F = self.scaling.F
        f_reduced = ScalarField(q.base, lambda y: F.fn(q.section_raw(y)), f"{F.name} on orbit space")
        return ScalingBundle(self.poisson_quotient, self.poisson_scaling, f_reduced)

    @property
    def contact_actions(self) -> tuple:
        return tuple(induced_action(a, self.scaling.quotient) for a in self.standard)

    def checks(self, samples) -> list[Report]:
        """Commutation of the two actions and the invariance/homogeneity conditions."""
        sa = self.scaling.action
        reports = []
        for a in self.standard:
            triples = [(g, s, np.asarray(x, float)) for x in samples for g in CIRCLE_PROBES for s in _probes(sa.group)]
            chart = self.system.chart

            def devs(a=a):
                for g, s, x in triples:
                    yield chart.distance(a.raw(g, sa.raw(s, x)), sa.raw(s, a.raw(g, x))), (g, s, x)

            reports.append(_report(f"actions commute ({a.name})", devs(), 1e-9))
            pairs = [(g, x) for x in samples for g in CIRCLE_PROBES]
            reports.append(check_invariance(self.system.omega, a, pairs))
            reports.append(check_invariance(self.system.hamiltonian, a, pairs))
            reports.append(check_invariance(self.scaling.F, a, pairs))
        pairs = [(s, x) for x in samples for s in _probes(sa.group)]
        reports.append(check_twoform_scaling(self.system.omega, sa, pairs))
        reports.append(check_scalar_homogeneity(self.system.hamiltonian, sa, pairs))
        reports.append(self.scaling.check_homogeneity(pairs))
        return reports


@dataclass
class PipelineResult:
    system: JacobiSystem
    hamiltonian: ScalarField
    field: VectorField
    stages: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)


def pipeline_A(cp: CompatiblePair, samples=None) -> PipelineResult:
    """Standard reduction first, then scaling reduction of the orbit-space Poisson system."""
    poisson = reduce_symplectic_by_standard(cp.system, cp.standard_quotient, cp.standard, samples)
    bundle = cp.poisson_bundle
    lower = None if samples is None else [cp.standard_quotient.project_raw(np.asarray(x, float)) for x in samples]
    jac = reduce_poisson_by_scaling(poisson, bundle, lower)
    return PipelineResult(
        jac,
        jac.hamiltonian,
        jacobi_hvf(jac, jac.hamiltonian),
        {"poisson": poisson, "poisson_bundle": bundle},
        {"order": "standard then scaling", "charts": (cp.system.chart.name, poisson.chart.name, jac.chart.name),
         "scaling_function": cp.scaling.F.name},
    )


def pipeline_B(cp: CompatiblePair, samples=None) -> PipelineResult:
    """Scaling reduction to a contact manifold, then standard reduction of its Jacobi structure."""
    contact = reduce_symplectic_by_scaling(cp.system, cp.scaling, samples)
    contact_jacobi = jacobi_from_contact(contact)
    lower = None if samples is None else [cp.scaling.quotient.project_raw(np.asarray(x, float)) for x in samples]
    jac = reduce_jacobi_by_standard(contact_jacobi, cp.contact_quotient, cp.contact_actions, lower)
    return PipelineResult(
        jac,
        jac.hamiltonian,
        jacobi_hvf(jac, jac.hamiltonian),
        {"contact": contact, "contact_jacobi": contact_jacobi},
        {"order": "scaling then standard", "charts": (cp.system.chart.name, contact.chart.name, jac.chart.name),
         "scaling_function": cp.scaling.F.name},
    )


def reduce_function_A(cp: CompatiblePair, H: ScalarField) -> ScalarField:
    """Section on the final base of pipeline A induced by an invariant homogeneous ``H``."""
    q = cp.standard_quotient
    on_orbits = ScalarField(q.base, lambda y: H.fn(q.section_raw(y)), H.name)
    return hom_to_section(cp.poisson_bundle, on_orbits)


def reduce_function_B(cp: CompatiblePair, H: ScalarField) -> ScalarField:
    q = cp.contact_quotient
    on_contact = hom_to_section(cp.scaling, H)
    return ScalarField(q.base, lambda y: on_contact.fn(q.section_raw(y)), H.name)


# equivalence ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EquivalencePair:
    psi: Callable
    psi_inv: Callable
    base_a: Chart
    base_b: Chart


def equivalence_psi(cp: CompatiblePair, result_a: Optional[PipelineResult] = None,
                    result_b: Optional[PipelineResult] = None, samples=None,
                    invariant_functions: Sequence[ScalarField] = ()) -> EquivalencePair:
    """Diffeomorphism between the two final bases assembled from the quotient data.

    ``ψ(z) = p_C(p_S(σ_S(σ_P(z))))``: lift a pipeline-A point to the symplectic
    manifold and push it down along pipeline B.  With ``samples`` (final-base
    points of pipeline A) every postcondition is checked and a failure raises
    :class:`EquivalenceError`.
    """
    sq, pq = cp.standard_quotient, cp.poisson_quotient
    cq, kq = cp.scaling.quotient, cp.contact_quotient

    def psi(z):
        return kq.project_raw(cq.project_raw(sq.section_raw(pq.section_raw(z))))

    def psi_inv(w):
        return pq.project_raw(sq.project_raw(cq.section_raw(kq.section_raw(w))))

    pair = EquivalencePair(psi, psi_inv, pq.base, kq.base)
    if samples is not None:
        result_a = result_a or pipeline_A(cp)
        result_b = result_b or pipeline_B(cp)
        reports = equivalence_reports(cp, pair, result_a, result_b, samples, invariant_functions)
        bad = [r for r in reports if not r.passed]
        if bad:
            raise EquivalenceError("; ".join(f"{r.name}: {r.max_deviation:.3e}" for r in bad))
    return pair


def equivalence_reports(cp: CompatiblePair, pair: EquivalencePair, ra: PipelineResult, rb: PipelineResult,
                        samples, invariant_functions: Sequence[ScalarField] = (),
                        field_tol: float = 1e-8, section_tol: float = 1e-8, bracket_tol: float = 1e-6) -> list[Report]:
    pts = [np.asarray(z, dtype=float) for z in samples]

    def roundtrip():
        for z in pts:
            w = pair.psi(z)
            yield max(pair.base_a.distance(pair.psi_inv(w), z), pair.base_b.distance(pair.psi(pair.psi_inv(w)), w)), z

    def related():
        for z in pts:
            moved = real_array(matmul(jacobian(pair.psi, z), ra.field.raw(z)))
            yield float(np.max(np.abs(moved - real_array(rb.field.raw(pair.psi(z)))))), z

    def sections():
        for z in pts:
            yield abs(float(rb.hamiltonian.fn(pair.psi(z)) - ra.hamiltonian.fn(z))), z

    reports = [
        _report("psi is invertible", roundtrip(), 1e-9),
        _report("final fields are psi-related", related(), field_tol),
        _report("reduced Hamiltonians correspond", sections(), section_tol),
    ]
    if len(invariant_functions) >= 2:
        funcs = list(invariant_functions)
        pairs_ = list(zip(funcs[::2], funcs[1::2]))

        def brackets():
            for H1, H2 in pairs_:
                a1, a2 = reduce_function_A(cp, H1), reduce_function_A(cp, H2)
                b1, b2 = reduce_function_B(cp, H1), reduce_function_B(cp, H2)
                ba = jacobi_bracket(ra.system, a1, a2)
                bb = jacobi_bracket(rb.system, b1, b2)
                for z in pts:
                    yield abs(float(bb.fn(pair.psi(z)) - ba.fn(z))), z

        reports.append(_report("brackets correspond", brackets(), bracket_tol))
    return reports


# property helpers ------------------------------------------------------------------


def projection_commutation_residual(sys: PoissonSystem, b: ScalingBundle, reduced: JacobiSystem,
                                    H: ScalarField, x) -> float:
    """``‖Tp X_H(x) − X_h(p(x))‖_∞`` with ``h`` the section of ``H``."""
    x = np.asarray(x, dtype=float)
    h = hom_to_section(b, H)
    moved = real_array(b.quotient.pushforward(x, poisson_hvf(sys, H).raw(x)))
    return float(np.max(np.abs(moved - real_array(jacobi_hvf(reduced, h).raw(b.quotient.project_raw(x))))))


def anti_homomorphism_residual(sys: JacobiSystem, h1: ScalarField, h2: ScalarField, y) -> float:
    """``‖[X_{h₁}, X_{h₂}] + X_{{h₁,h₂}}‖_∞`` at ``y``."""
    y = np.asarray(y, dtype=float)
    local = frozen_at(sys, y)
    x1, x2 = jacobi_hvf(local, h1), jacobi_hvf(local, h2)
    x12 = jacobi_hvf(local, jacobi_bracket(local, h1, h2))
    return float(np.max(np.abs(real_array(lie_bracket_vf(x1, x2, y)) + real_array(x12.raw(y)))))

