"""The verification battery run by ``verify`` for each example suite."""

from __future__ import annotations

import fnmatch
import zlib
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterator, Optional

import numpy as np

from ..dual import real_array
from ..examples import ExampleSuite, build_suite
from ..integrate import IntegratorConfig
from ..numcore import random_smooth_function
from ..reconstruction import (
    ReconstructionProblem,
    reconstruct_poisson,
    reconstruct_symplectic,
    reconstruct_via_reeb,
)
from ..reduction import (
    anti_homomorphism_residual,
    contact_pullback_report,
    equivalence_psi,
    equivalence_reports,
    pipeline_A,
    pipeline_B,
    projection_commutation_residual,
    reduce_poisson_by_scaling,
    reduce_symplectic_by_scaling,
    reduce_symplectic_by_standard,
    scaling_fiber_report,
    standard_projection_report,
    symbol_projection_report,
)
from ..structures import (
    closedness_residual,
    contact_hvf,
    contact_residuals,
    frozen_at,
    jacobi_bracket,
    jacobi_hvf,
    jacobi_identity_residual,
    poisson_bracket,
    poisson_hvf,
    reeb_field,
    reeb_residuals,
    symplectic_bracket,
    symplectic_hvf,
)
from ..symmetry import (
    Group,
    Report,
    _report,
    action_samples,
    check_group_law,
    check_invariance,
    check_scalar_homogeneity,
    check_twoform_scaling,
)
from .reports import CheckReport

# default tolerances by check family (first matching pattern wins)
DEFAULT_TOLERANCES = (
    ("structure/jacobi_identity*", 1e-8),
    ("structure/reeb*", 1e-9),
    ("structure/contact_field*", 1e-9),
    ("structure/*", 1e-8),
    ("symmetry/commute*", 1e-9),
    ("symmetry/*", 1e-8),
    ("reduction/anti_homomorphism*", 1e-7),
    ("reduction/*", 1e-8),
    ("closed_form/*", 1e-8),
    ("atlas/*", 1e-6),
    ("equivalence/invertible", 1e-9),
    ("equivalence/brackets", 1e-6),
    ("equivalence/*", 1e-8),
    ("reconstruction/energy*", 1e-7),
    ("reconstruction/casimir*", 1e-7),
    ("reconstruction/level_set*", 1e-8),
    ("reconstruction/shortcut_alpha*", 1e-9),
    ("reconstruction/*", 1e-5),
)


def tolerance_for(key: str, overrides: Optional[dict] = None) -> float:
    for pattern, value in list((overrides or {}).items()) + list(DEFAULT_TOLERANCES):
        if fnmatch.fnmatchcase(key, pattern):
            return float(value)
    return 1e-8


def _dev(a, b) -> float:
    return float(np.max(np.abs(real_array(a) - real_array(b)), initial=0.0))


@dataclass
class VerifyContext:
    suite: ExampleSuite
    seed: int
    n_points: int
    dt: float
    t_span: tuple

    def rng(self, label: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, zlib.crc32(label.encode())])

    def sample(self, role: str, n: Optional[int] = None) -> np.ndarray:
        return self.suite.sample(role, self.rng(f"sample/{role}"), n or self.n_points)

    @property
    def cp(self):
        return self.suite.pair

    @cached_property
    def ra(self):
        return pipeline_A(self.cp)

    @cached_property
    def rb(self):
        return pipeline_B(self.cp)

    @property
    def contact(self):
        return self.rb.stages["contact"]

    @property
    def contact_jacobi(self):
        return self.rb.stages["contact_jacobi"]


@dataclass(frozen=True)
class Check:
    key: str
    anchor: str
    run: Callable[[VerifyContext], object]


def _pointwise(fn, points) -> Iterator:
    for x in points:
        yield fn(x), x


# structure ----------------------------------------------------------------------


def _jacobi_identity(system_of, role, triples=2):
    def run(ctx: VerifyContext):
        sys = system_of(ctx)
        rng = ctx.rng(f"jacobi/{role}")
        for x in ctx.sample(role):
            local = frozen_at(sys, x)
            for _ in range(triples):
                f, g, h = (random_smooth_function(sys.chart, rng) for _ in range(3))
                yield jacobi_identity_residual(sys, f, g, h, x, local), x

    return run


def structure_checks() -> list[Check]:
    return [
        Check("structure/symplectic_closed", "closedness of the symplectic form",
              lambda c: _pointwise(lambda x: closedness_residual(c.cp.system.omega, x), c.sample("total"))),
        Check("structure/jacobi_identity_final_a", "Jacobi identity of the reduced bracket (standard first)",
              _jacobi_identity(lambda c: c.ra.system, "final_a")),
        Check("structure/jacobi_identity_final_b", "Jacobi identity of the reduced bracket (scaling first)",
              _jacobi_identity(lambda c: c.rb.system, "final_b")),
        Check("structure/jacobi_identity_contact", "Jacobi identity of the contact Jacobi structure",
              _jacobi_identity(lambda c: c.contact_jacobi, "contact")),
        Check("structure/reeb_axioms", "Reeb field: i_R d(eta) = 0 and eta(R) = 1",
              lambda c: _pointwise(lambda y: max(reeb_residuals(c.contact, y)), c.sample("contact"))),
        Check("structure/contact_field_conditions", "contact Hamiltonian field defining conditions",
              lambda c: _pointwise(lambda y: max(contact_residuals(c.contact, c.contact.hamiltonian, y)),
                                   c.sample("contact"))),
        Check("structure/contact_jacobi_symbol", "Jacobi symbol of the contact structure equals the contact field",
              lambda c: _pointwise(lambda y: _dev(jacobi_hvf(c.contact_jacobi, c.contact.hamiltonian).raw(y),
                                                  contact_hvf(c.contact).raw(y)), c.sample("contact"))),
    ]


# symmetry -----------------------------------------------------------------------


def _circle_pairs(ctx, label):
    return action_samples(ctx.rng(label), Group.CIRCLE, ctx.sample("total"))


def symmetry_checks(ctx: VerifyContext) -> list[Check]:
    cp = ctx.cp
    sa = cp.scaling.action
    out = []
    for k, a in enumerate(cp.standard):
        def commute(c, a=a):
            rng = c.rng(f"commute/{a.name}")
            for (g, x), (s, _) in zip(_circle_pairs(c, a.name), action_samples(rng, sa.group, c.sample("total"))):
                yield c.cp.system.chart.distance(a.raw(g, sa.raw(s, x)), sa.raw(s, a.raw(g, x))), (g, s, x)

        tag = f"standard{k + 1}"
        out += [
            Check(f"symmetry/commute_{tag}", f"scaling and standard actions commute ({a.name})", commute),
            Check(f"symmetry/invariant_omega_{tag}", f"symplectic form invariant ({a.name})",
                  lambda c, a=a: check_invariance(c.cp.system.omega, a, _circle_pairs(c, a.name))),
            Check(f"symmetry/invariant_hamiltonian_{tag}", f"Hamiltonian invariant ({a.name})",
                  lambda c, a=a: check_invariance(c.cp.system.hamiltonian, a, _circle_pairs(c, a.name))),
            Check(f"symmetry/invariant_scaling_function_{tag}", f"scaling function invariant ({a.name})",
                  lambda c, a=a: check_invariance(c.cp.scaling.F, a, _circle_pairs(c, a.name))),
            Check(f"symmetry/group_law_{tag}", f"group law ({a.name})",
                  lambda c, a=a: check_group_law(a, [(g, -0.5 * g, x) for g, x in _circle_pairs(c, a.name)])),
            Check(f"symmetry/orbits_collapse_{tag}", f"orbit-space projection constant on orbits ({a.name})",
                  lambda c, a=a: c.cp.standard_quotient.check_fibers(a, _circle_pairs(c, a.name))),
        ]

    def scaling_pairs(c):
        return action_samples(c.rng("scaling"), c.cp.scaling.action.group, c.sample("total"))

    out += [
        Check("symmetry/homogeneous_omega", "symplectic form homogeneous of degree one",
              lambda c: check_twoform_scaling(c.cp.system.omega, c.cp.scaling.action, scaling_pairs(c))),
        Check("symmetry/homogeneous_hamiltonian", "Hamiltonian homogeneous of degree one",
              lambda c: check_scalar_homogeneity(c.cp.system.hamiltonian, c.cp.scaling.action, scaling_pairs(c))),
        Check("symmetry/homogeneous_scaling_function", "scaling function homogeneous of degree one",
              lambda c: c.cp.scaling.check_homogeneity(scaling_pairs(c))),
        Check("symmetry/group_law_scaling", "group law (scaling)",
              lambda c: check_group_law(c.cp.scaling.action, [(s, 1.0 / s + 0.5, x) for s, x in scaling_pairs(c)])),
        Check("symmetry/orbits_collapse_scaling", "scaling projection constant on orbits",
              lambda c: c.cp.scaling.quotient.check_fibers(c.cp.scaling.action, scaling_pairs(c))),
        Check("symmetry/trivialization", "scaling function trivializes the line bundle",
              lambda c: c.cp.scaling.check_trivialization(c.sample("total"))),
        Check("symmetry/section_standard", "section of the standard quotient",
              lambda c: c.cp.standard_quotient.check_section(c.sample("orbit"))),
        Check("symmetry/section_scaling", "section of the scaling quotient",
              lambda c: c.cp.scaling.quotient.check_section(c.sample("contact"))),
        Check("symmetry/section_poisson", "section of the orbit-space scaling quotient",
              lambda c: c.cp.poisson_quotient.check_section(c.sample("final_a"))),
        Check("symmetry/section_contact", "section of the contact-space orbit quotient",
              lambda c: c.cp.contact_quotient.check_section(c.sample("final_b"))),
        Check("symmetry/homogeneity_closure", "bracket of homogeneous functions is homogeneous",
              _homogeneity_closure),
    ]
    return out


def _homogeneity_closure(c: VerifyContext):
    rng = c.rng("closure")
    sys = c.cp.system
    pairs = action_samples(rng, c.cp.scaling.action.group, c.sample("total"))
    H1, H2 = c.suite.random_invariant(rng), c.suite.random_invariant(rng)
    return check_scalar_homogeneity(symplectic_bracket(sys, H1, H2), c.cp.scaling.action, pairs)


# reduction postconditions -------------------------------------------------------


def _projected(c: VerifyContext, role_to: str):
    X = c.sample("total")
    if role_to == "orbit":
        return [c.cp.standard_quotient.project_raw(x) for x in X]
    return [c.cp.scaling.quotient.project_raw(x) for x in X]


def poisson_bundles(c: VerifyContext):
    """``(name, Poisson system, bundle, random homogeneous generator, sampler role)`` for projection tests."""
    s = c.suite
    if s.name == "ho":
        P2 = reduce_symplectic_by_standard(c.cp.system, s.extras["scaled_standard_quotient"])
        return [("scaled_orbit", P2, s.extras["scaled_orbit_bundle"], s.extras["random_scaled_homogeneous"],
                 "orbit_scaled")]
    if s.name == "so3":
        lp = s.closed_forms["lie_poisson"]
        return [(f"dual_mu{k + 1}", lp, b, s.extras["random_dual_homogeneous"], "dual")
                for k, b in zip(s.extras["projective_nu"], s.extras["projective_bundles"])][:1]
    P = c.ra.stages["poisson"]
    return [("orbit", P, c.ra.stages["poisson_bundle"], c.suite.random_invariant, "orbit")]


def _projection_commutation(c: VerifyContext, n_functions: int = 3):
    for name, P, b, gen, role in poisson_bundles(c):
        J = reduce_poisson_by_scaling(P, b)
        rng = c.rng(f"commutation/{name}")
        points = c.sample(role)
        if role == "dual":
            points = np.array([x for x in points if abs(x[2]) > 0.2])
        for _ in range(n_functions):
            H = gen(rng)
            for x in points:
                yield projection_commutation_residual(P, b, J, H, x), x


def _anti_homomorphism(system_of, role):
    def run(c: VerifyContext):
        sys = system_of(c)
        rng = c.rng(f"antihom/{role}")
        for y in c.sample(role):
            f, g = random_smooth_function(sys.chart, rng), random_smooth_function(sys.chart, rng)
            yield anti_homomorphism_residual(sys, f, g, y), y

    return run


def reduction_checks() -> list[Check]:
    return [
        Check("reduction/orbit_space_pushforward", "orbit-space Poisson tensor is the pushforward",
              lambda c: standard_projection_report(c.cp.system, c.cp.standard_quotient, c.ra.stages["poisson"],
                                                   c.sample("total"))),
        Check("reduction/scaling_fiber_independence", "reduced Jacobi pair independent of the fiber point",
              lambda c: scaling_fiber_report(c.ra.stages["poisson"], c.ra.stages["poisson_bundle"],
                                             _projected(c, "orbit"))),
        Check("reduction/projection_standard_first", "projection of Hamiltonian field is the symbol (standard first)",
              lambda c: symbol_projection_report(
                  poisson_hvf(c.ra.stages["poisson"], c.ra.stages["poisson"].hamiltonian),
                  c.cp.poisson_quotient, c.ra.field, _projected(c, "orbit"))),
        Check("reduction/contact_pullback", "pullback of the contact form is the Liouville form over F",
              lambda c: contact_pullback_report(c.cp.system, c.cp.scaling, c.contact, c.sample("total"))),
        Check("reduction/reeb_is_projected_F_field", "Reeb field is the projected Hamiltonian field of F",
              lambda c: symbol_projection_report(symplectic_hvf(c.cp.system, c.cp.scaling.F), c.cp.scaling.quotient,
                                                 reeb_field(c.contact), c.sample("total"))),
        Check("reduction/projection_contact", "projection of Hamiltonian field is the contact field",
              lambda c: symbol_projection_report(symplectic_hvf(c.cp.system), c.cp.scaling.quotient,
                                                 contact_hvf(c.contact), c.sample("total"))),
        Check("reduction/contact_orbit_pushforward", "contact Jacobi pair pushes forward to the final pair",
              lambda c: standard_projection_report(c.contact_jacobi, c.cp.contact_quotient, c.rb.system,
                                                   _projected(c, "contact"))),
        Check("reduction/projection_scaling_first", "projection of contact field is the final symbol (scaling first)",
              lambda c: symbol_projection_report(jacobi_hvf(c.contact_jacobi, c.contact.hamiltonian),
                                                 c.cp.contact_quotient, c.rb.field, _projected(c, "contact"))),
        Check("reduction/projection_commutation_random", "projection commutes with Hamiltonian fields (random H)",
              _projection_commutation),
        Check("reduction/anti_homomorphism_final_a", "Lie bracket of symbols reverses the bracket (standard first)",
              _anti_homomorphism(lambda c: c.ra.system, "final_a")),
        Check("reduction/anti_homomorphism_final_b", "Lie bracket of symbols reverses the bracket (scaling first)",
              _anti_homomorphism(lambda c: c.rb.system, "final_b")),
    ]


# closed forms -------------------------------------------------------------------


def _compare(generic, closed, role, kind="vector"):
    def run(c: VerifyContext):
        g, r = generic(c), closed(c)
        for x in c.sample(role):
            if kind == "scalar":
                yield abs(float(g.fn(x)) - float(r.fn(x))), x
            elif kind == "jacobi":
                yield max(_dev(g.pi.raw(x), r.pi.raw(x)), _dev(g.e.raw(x), r.e.raw(x))), x
            elif kind == "poisson":
                yield _dev(g.pi.raw(x), r.pi.raw(x)), x
            else:
                yield _dev(g.raw(x), r.raw(x)), x

    return run


def closed_form_checks(ctx: VerifyContext) -> list[Check]:
    name = ctx.suite.name
    cf = ctx.suite.closed_forms
    if name == "ho":
        def orbit(c):
            return c.ra.stages["poisson"]

        def scaled(c):
            return reduce_symplectic_by_standard(c.cp.system, c.suite.extras["scaled_standard_quotient"])

        def scaled_jacobi(c):
            return reduce_poisson_by_scaling(scaled(c), c.suite.extras["scaled_orbit_bundle"])

        def energy_contact(c):
            return reduce_symplectic_by_scaling(c.cp.system, c.suite.extras["energy_bundle"])

        def displayed_negated(c):
            return _NegatedTwoForm(cf["displayed_symplectic_form"])

        return [
            Check("closed_form/symplectic_form", "symplectic form is minus the displayed form",
                  _compare(lambda c: c.cp.system.omega, displayed_negated, "total")),
            Check("closed_form/symplectic_bivector", "inverse Poisson bivector",
                  _compare(lambda c: c.cp.system.poisson_tensor(), lambda c: cf["symplectic_bivector"], "total")),
            Check("closed_form/hamiltonian_field", "oscillator Hamiltonian field",
                  _compare(lambda c: symplectic_hvf(c.cp.system), lambda c: cf["hamiltonian_field"], "total")),
            Check("closed_form/orbit_poisson", "orbit-space Poisson structure",
                  _compare(lambda c: orbit(c).pi, lambda c: cf["orbit_poisson"], "orbit")),
            Check("closed_form/orbit_hamiltonian", "orbit-space Hamiltonian",
                  _compare(lambda c: orbit(c).hamiltonian, lambda c: cf["orbit_hamiltonian"], "orbit", "scalar")),
            Check("closed_form/orbit_field", "orbit-space Hamiltonian field",
                  _compare(lambda c: poisson_hvf(orbit(c), orbit(c).hamiltonian), lambda c: cf["orbit_field"],
                           "orbit")),
            Check("closed_form/orbit_poisson_scaled", "orbit-space Poisson structure in radius-ratio coordinates",
                  _compare(lambda c: scaled(c).pi, lambda c: cf["orbit_poisson_scaled"], "orbit_scaled")),
            Check("closed_form/contact_form", "contact form on the scaling quotient",
                  _compare(lambda c: c.contact.eta, lambda c: cf["contact_form"], "contact")),
            Check("closed_form/reeb", "Reeb field", _compare(lambda c: reeb_field(c.contact), lambda c: cf["reeb"],
                                                             "contact")),
            Check("closed_form/contact_jacobi", "Jacobi pair of the contact form",
                  _compare(lambda c: c.contact_jacobi, lambda c: cf["contact_jacobi"], "contact", "jacobi")),
            Check("closed_form/contact_hamiltonian", "reduced contact Hamiltonian",
                  _compare(lambda c: c.contact.hamiltonian, lambda c: cf["contact_hamiltonian"], "contact",
                           "scalar")),
            Check("closed_form/contact_field", "reduced contact Hamiltonian field",
                  _compare(lambda c: contact_hvf(c.contact), lambda c: cf["contact_field"], "contact")),
            Check("closed_form/final_jacobi_a", "final Jacobi pair (standard first)",
                  _compare(lambda c: c.ra.system, lambda c: cf["final_jacobi_a"], "final_a", "jacobi")),
            Check("closed_form/final_jacobi_a_radius_ratio", "final Jacobi pair from radius-ratio orbit coordinates",
                  _compare(scaled_jacobi, lambda c: cf["final_jacobi_a"], "final_a", "jacobi")),
            Check("closed_form/final_jacobi_b", "final Jacobi pair (scaling first)",
                  _compare(lambda c: c.rb.system, lambda c: cf["final_jacobi_b"], "final_b", "jacobi")),
            Check("closed_form/final_field_a", "final reduced field (standard first)",
                  _compare(lambda c: c.ra.field, lambda c: cf["final_field_a"], "final_a")),
            Check("closed_form/final_field_b", "final reduced field (scaling first)",
                  _compare(lambda c: c.rb.field, lambda c: cf["final_field_b"], "final_b")),
            Check("closed_form/final_hamiltonian", "final reduced Hamiltonian",
                  _compare(lambda c: c.ra.hamiltonian, lambda c: cf["final_jacobi_a"].hamiltonian, "final_a",
                           "scalar")),
            Check("closed_form/energy_level_contact_field", "contact field with the energy as scaling function",
                  _compare(lambda c: contact_hvf(energy_contact(c)), lambda c: cf["contact_field"], "contact")),
        ]
    if name == "linear":
        return [
            Check("closed_form/projected_field", "projected fiberwise-linear Hamiltonian field",
                  _compare(lambda c: c.ra.field, lambda c: cf["projected_field"], "final_a")),
            Check("closed_form/projected_field_b", "projected field through the contact route",
                  _compare(lambda c: c.rb.field, lambda c: cf["projected_field"], "final_b")),
            Check("closed_form/reduced_section", "reduced section of the fiberwise-linear function",
                  _compare(lambda c: c.ra.hamiltonian, lambda c: cf["reduced_section"], "final_a", "scalar")),
        ]
    if name == "so3":
        return [
            Check("closed_form/lie_poisson", "Lie-Poisson structure from left trivialization",
                  _compare(lambda c: c.ra.stages["poisson"], lambda c: cf["lie_poisson"], "dual", "poisson")),
            Check("closed_form/symbol_field", "local expression of the Lie-Kirillov symbol",
                  _compare(lambda c: c.ra.field, lambda c: cf["symbol"], "final_a")),
            Check("closed_form/symbol_from_lie_poisson", "symbol from direct scaling reduction of so(3)*",
                  _compare(lambda c: jacobi_hvf(c.suite.extras["atlas"].charts[0], cf["section"]),
                           lambda c: cf["symbol"], "final_a")),
            Check("closed_form/casimir", "Casimir function of so(3)*", _casimir),
            Check("closed_form/lie_kirillov", "Lie-Kirillov bracket of linear sections", _lie_kirillov),
            Check("atlas/cocycle", "cocycle identity of transition factors", _atlas_cocycle),
            Check("atlas/bracket_compatibility", "brackets agree on chart overlaps", _atlas_brackets),
            Check("atlas/symbol_compatibility", "symbols agree on chart overlaps", _atlas_symbols),
        ]
    return []


class _NegatedTwoForm:
    def __init__(self, form):
        self.form = form

    def raw(self, x):
        return -real_array(self.form.raw(x))


def _casimir(c: VerifyContext):
    from ..examples.rotation import linear_function

    lp = c.suite.closed_forms["lie_poisson"]
    C = c.suite.closed_forms["casimir"]
    rng = c.rng("casimir")
    for mu in c.sample("dual"):
        f = random_smooth_function(lp.chart, rng)
        yield abs(float(poisson_bracket(lp, C, f).fn(mu))), mu
    e = np.eye(3)
    yield abs(float(poisson_bracket(lp, linear_function(e[0]), linear_function(e[1])).fn(np.array([0, 0, 1.0]))) + 1.0), \
        np.array([0, 0, 1.0])


def _lie_kirillov(c: VerifyContext):
    from ..examples.rotation import lie_bracket, section_of

    b = c.suite.extras["projective_bundles"][0]
    J = c.suite.extras["atlas"].charts[0]
    rng = c.rng("lie_kirillov")
    for r in c.sample("final_a"):
        xi1, xi2 = rng.normal(size=3), rng.normal(size=3)
        lhs = -jacobi_bracket(J, section_of(b, xi1), section_of(b, xi2)).fn(r)
        yield abs(float(lhs) - float(section_of(b, lie_bracket(xi1, xi2)).fn(r))), r


def _atlas_points(c: VerifyContext, i: int, j: int):
    """Points of chart ``i`` inside its overlap with chart ``j``, moved over from chart 0 samples."""
    atlas = c.suite.extras["atlas"]
    points = c.sample("final_a", 2 * c.n_points)
    if i != 0:
        points = [atlas.transition(0, i).change(r) for r in points if atlas.transition(0, i).overlap(r)]
    t = atlas.transition(i, j)
    return [real_array(r) for r in points if t.overlap(r)][: c.n_points]


def _atlas_pairs(atlas):
    n = len(atlas.charts)
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def _atlas_cocycle(c: VerifyContext):
    atlas = c.suite.extras["atlas"]
    n = len(atlas.charts)
    for i, j, k in [(i, j, k) for i in range(n) for j in range(n) for k in range(n) if i != j and j != k]:
        for r in _atlas_points(c, i, j):
            y = atlas.transition(i, j).change(r)
            if atlas.transition(j, k).overlap(y):
                yield atlas.cocycle_residual(i, j, k, r), r


def _atlas_sections(c: VerifyContext, j: int, rng):
    from ..examples.rotation import section_of

    return section_of(c.suite.extras["projective_bundles"][j], rng.normal(size=3))


def _atlas_brackets(c: VerifyContext):
    atlas = c.suite.extras["atlas"]
    rng = c.rng("atlas_brackets")
    for i, j in _atlas_pairs(atlas):
        h1 = _atlas_sections(c, j, rng)
        h2 = random_smooth_function(atlas.charts[j].chart, rng)
        for r in _atlas_points(c, i, j):
            yield atlas.bracket_compatibility_residual(h1, h2, i, j, r), r


def _atlas_symbols(c: VerifyContext):
    atlas = c.suite.extras["atlas"]
    rng = c.rng("atlas_symbols")
    for i, j in _atlas_pairs(atlas):
        h = _atlas_sections(c, j, rng)
        for r in _atlas_points(c, i, j):
            yield atlas.symbol_compatibility_residual(h, i, j, r), r


# equivalence --------------------------------------------------------------------

EQUIVALENCE_KEYS = {
    "psi is invertible": ("equivalence/invertible", "psi is a diffeomorphism between final bases"),
    "final fields are psi-related": ("equivalence/fields", "final fields of both orders are psi-related"),
    "reduced Hamiltonians correspond": ("equivalence/sections", "reduced Hamiltonian sections correspond"),
    "brackets correspond": ("equivalence/brackets", "reduced brackets correspond under psi"),
}


def equivalence_checks(ctx: VerifyContext) -> list[CheckReport]:
    suite = ctx.suite.name
    rng = ctx.rng("equivalence")
    functions = [ctx.suite.random_invariant(rng) for _ in range(10)]
    pair = equivalence_psi(ctx.cp)
    out = []
    for r in equivalence_reports(ctx.cp, pair, ctx.ra, ctx.rb, ctx.sample("final_a"), functions):
        key, anchor = EQUIVALENCE_KEYS[r.name]
        out.append(CheckReport.from_report(r, suite, key, anchor))
    return out


# reconstruction -----------------------------------------------------------------


@dataclass(frozen=True)
class ReconstructionCase:
    """One reconstruction route with its problem, the base trajectory and the result."""

    name: str
    problem: ReconstructionProblem
    result: object
    direct: object


RECONSTRUCTION_ROUTES = {
    "ho": ("symplectic", "reeb", "symplectic_energy", "reeb_energy", "poisson_orbit_space"),
    "linear": ("symplectic", "reeb", "poisson_orbit_space"),
    "so3": ("poisson_dual",),
}


def default_x0(suite: ExampleSuite, verify: bool = False) -> np.ndarray:
    """Initial point of the full system; ``verify`` picks the point used by the battery."""
    if suite.name == "so3":
        from ..examples.rotation import canonical_momentum

        return np.concatenate([np.zeros(3), real_array(canonical_momentum(np.zeros(3), suite.extras["mu0"]))])
    return suite.extras["verify_x0" if verify else "x0"]


def reconstruction_cases(suite: ExampleSuite, dt: float, t_span, x0=None, routes=None) -> list[ReconstructionCase]:
    """Reconstruction routes for ``suite`` (all of them unless ``routes`` names a subset).

    ``x0`` is a total-space point for ``ho`` and ``linear`` and a point of so(3)*
    for ``so3``; it defaults to the point used by the verification battery.
    """
    known = RECONSTRUCTION_ROUTES[suite.name]
    routes = known if routes is None else tuple(routes)
    unknown = sorted(set(routes) - set(known))
    if unknown:
        raise KeyError(f"unknown reconstruction route(s) {unknown} for {suite.name}; choose from {list(known)}")
    cp = suite.pair
    cases = []
    if suite.name in ("ho", "linear"):
        x0 = suite.extras["verify_x0"] if x0 is None else np.asarray(x0, dtype=float)
        XH = symplectic_hvf(cp.system)
        bundles = [("", cp.scaling)]
        if "energy_bundle" in suite.extras:
            bundles.append(("_energy", suite.extras["energy_bundle"]))
        for label, b in bundles:
            wanted = [r for r in (f"symplectic{label}", f"reeb{label}") if r in routes]
            if not wanted:
                continue
            contact = reduce_symplectic_by_scaling(cp.system, b)
            rp = ReconstructionProblem(b, XH, contact_hvf(contact), x0, t_span, dt)
            gamma = rp.base_trajectory()
            direct = rp.direct_trajectory()
            if f"symplectic{label}" in routes:
                integrand = symplectic_bracket(cp.system, b.F, cp.system.hamiltonian)
                cases.append(ReconstructionCase(f"symplectic{label}", rp,
                                                reconstruct_symplectic(rp, integrand, gamma), direct))
            if f"reeb{label}" in routes:
                cases.append(ReconstructionCase(f"reeb{label}", rp,
                                                reconstruct_via_reeb(rp, reeb_field(contact), contact.hamiltonian,
                                                                     gamma), direct))
        if "poisson_orbit_space" in routes:
            ra = pipeline_A(cp)
            P = ra.stages["poisson"]
            y0 = cp.standard_quotient.project_raw(x0)
            rp = ReconstructionProblem(ra.stages["poisson_bundle"], poisson_hvf(P, P.hamiltonian), ra.field, y0,
                                       t_span, dt)
            cases.append(ReconstructionCase("poisson_orbit_space", rp,
                                            reconstruct_poisson(rp, ra.system.e, ra.hamiltonian),
                                            rp.direct_trajectory()))
    elif suite.name == "so3":
        from ..examples.rotation import lie_poisson_system

        mu0 = suite.extras["mu0"] if x0 is None else np.asarray(x0, dtype=float)
        lp = lie_poisson_system(suite.extras["xi"])
        b = suite.extras["projective_bundles"][0]
        J = reduce_poisson_by_scaling(lp, b)
        rp = ReconstructionProblem(b, poisson_hvf(lp, lp.hamiltonian), jacobi_hvf(J, J.hamiltonian), mu0, t_span, dt)
        cases.append(ReconstructionCase("poisson_dual", rp, reconstruct_poisson(rp, J.e, J.hamiltonian),
                                        rp.direct_trajectory()))
    return cases


def reconstruction_checks(ctx: VerifyContext) -> list[CheckReport]:
    suite = ctx.suite
    out = []
    cases = reconstruction_cases(suite, ctx.dt, ctx.t_span)
    for case in cases:
        rec, direct = case.result, case.direct
        err = rec.errors_against(direct)
        incomplete = rec.truncated or direct.truncated
        key = f"reconstruction/{case.name}"
        k = int(np.argmax(err))
        out.append(CheckReport(key, suite.name, err.size, float("inf") if incomplete else float(err[k]), 0.0,
                               fmt_point(rec.times[k]), f"reconstructed trajectory matches direct flow ({case.name})",
                               "trajectory left the chart" if incomplete else ""))
        b = case.problem.bundle
        s0 = case.problem.s0
        levels = [abs(float(b.F.fn(x)) - s0) for x in rec.phi.states]
        out.append(CheckReport(f"reconstruction/level_set_{case.name}", suite.name, len(levels),
                               max(levels), 0.0, "", f"horizontal lift stays on the level set ({case.name})"))
        if case.name == "symplectic_energy":
            out.append(CheckReport("reconstruction/shortcut_alpha_zero", suite.name, rec.alpha.size,
                                   float(np.max(np.abs(rec.alpha))), 0.0, "",
                                   "group factor vanishes when the energy is the scaling function"))
    if cases and suite.name in ("ho", "linear"):
        direct = cases[0].direct
        H = suite.pair.system.hamiltonian
        h0 = float(H.fn(direct.states[0]))
        drift = [abs(float(H.fn(x)) - h0) for x in direct.states]
        name = "energy" if suite.name == "ho" else "energy_linear"
        out.append(CheckReport(f"reconstruction/{name}_conservation", suite.name, len(drift), max(drift), 0.0, "",
                               "energy conserved along the direct flow"))
    if suite.name == "so3":
        direct = cases[0].direct
        C = suite.closed_forms["casimir"]
        c0 = float(C.fn(direct.states[0]))
        drift = [abs(float(C.fn(x)) - c0) for x in direct.states]
        out.append(CheckReport("reconstruction/casimir_drift", suite.name, len(drift), max(drift), 0.0, "",
                               "Casimir conserved along the direct Lie-Poisson flow"))
    return out


def fmt_point(t) -> str:
    return format(float(t), ".17g")


# driver -------------------------------------------------------------------------


def _as_report(result, key: str, suite: str, anchor: str, tol: float) -> CheckReport:
    if isinstance(result, Report):
        return CheckReport.from_report(result, suite, key, anchor, tol)
    return CheckReport.from_report(_report(key, result, tol), suite, key, anchor, tol)


def verify_suite(suite, seed: int = 0, tolerances: Optional[dict] = None, n_points: int = 20,
                 dt: float = 1e-3, t_span=(0.0, 1.0), reconstruction: bool = True) -> list[CheckReport]:
    """Run the whole battery; failures and exceptions become failed reports.

    Order: structure invariants, symmetry, reduction postconditions, closed
    forms, equivalence, reconstruction.
    """
    if isinstance(suite, str):
        suite = build_suite(suite)
    IntegratorConfig(dt)
    ctx = VerifyContext(suite, int(seed), int(n_points), float(dt), tuple(float(t) for t in t_span))
    out: list[CheckReport] = []

    checks = structure_checks() + symmetry_checks(ctx) + reduction_checks() + closed_form_checks(ctx)
    for check in checks:
        tol = tolerance_for(check.key, tolerances)
        try:
            out.append(_as_report(check.run(ctx), check.key, suite.name, check.anchor, tol))
        except Exception as exc:  # a crash is a failed check, not a failed run
            out.append(CheckReport.crashed(suite.name, check.key, check.anchor, tol, exc))

    for stage in ([equivalence_checks] + ([reconstruction_checks] if reconstruction else [])):
        try:
            reports = stage(ctx)
        except Exception as exc:
            key = "equivalence/construction" if stage is equivalence_checks else "reconstruction/construction"
            reports = [CheckReport.crashed(suite.name, key, "stage could not be assembled", tolerance_for(key), exc)]
        for r in reports:
            tol = tolerance_for(r.check, tolerances)
            out.append(CheckReport(r.check, r.suite, r.samples, r.max_deviation, tol, r.worst, r.anchor, r.error))
    return out
