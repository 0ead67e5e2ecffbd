import numpy as np
import pytest

from scaling_reduction.dual import real_array
from scaling_reduction.examples.harmonic import (
    CONTACT_QUOTIENT,
    FINAL_A,
    STANDARD_QUOTIENT,
    orbit_hamiltonian,
    orbit_poisson,
    reduced_hamiltonian,
)
from scaling_reduction.examples.linear import canonical_form
from scaling_reduction.numcore import Chart, ScalarField, TwoFormField, jacobian, matmul, random_smooth_function
from scaling_reduction.reduction import (
    CompatiblePair,
    ReductionError,
    anti_homomorphism_residual,
    contact_pullback_report,
    equivalence_psi,
    equivalence_reports,
    pipeline_A,
    pipeline_B,
    projection_commutation_residual,
    reduce_function_A,
    reduce_function_B,
    reduce_jacobi_by_standard,
    reduce_poisson_by_scaling,
    reduce_symplectic_by_scaling,
    reduce_symplectic_by_standard,
    scaling_fiber_report,
    trivialized_bracket,
)
from scaling_reduction.structures import (
    SymplecticSystem,
    contact_hvf,
    jacobi_bracket,
    jacobi_from_contact,
    symplectic_bracket,
)
from scaling_reduction.symmetry import (
    Group,
    OneParamAction,
    QuotientChart,
    ScalingBundle,
    action_samples,
    check_scalar_homogeneity,
    identity_quotient,
)


def max_dev(a, b):
    return float(np.max(np.abs(real_array(a) - real_array(b))))


# standard reduction -------------------------------------------------------------------


def test_orbit_space_structure_of_oscillator(ho, rng):
    P = reduce_symplectic_by_standard(ho.pair.system, STANDARD_QUOTIENT, ho.pair.standard,
                                      samples=ho.sample("total", rng, 10))
    for y in ho.sample("orbit", rng, 50):
        assert max_dev(P.pi.raw(y), orbit_poisson(y)) < 1e-12
        assert float(P.hamiltonian.fn(y)) == pytest.approx(float(orbit_hamiltonian(y)), abs=1e-14)


def abelian_cotangent_pair():
    """T*R^2 with both translations as standard symmetry and momentum scaling (F = p2)."""
    total = Chart("T*R^2", ("q1", "q2", "p1", "p2"), domain_check=lambda x: x[3] != 0)
    momenta = Chart("R^2*", ("p1", "p2"), domain_check=lambda x: x[1] != 0)
    contact = Chart("P(T*R^2)", ("q1", "q2", "pt"))
    final = Chart("P(R^2*)", ("pt",))
    H = ScalarField(total, lambda x: x[2] + 0.5 * x[3], "H")
    system = SymplecticSystem(total, TwoFormField(total, lambda x: canonical_form(2)), H)
    shifts = tuple(OneParamAction(Group.CIRCLE, (lambda k: lambda g, x: [x[i] + (g if i == k else 0.0)
                                                                        for i in range(4)])(k), total, f"shift q{k + 1}")
                   for k in range(2))
    scaling = OneParamAction(Group.R_TIMES, lambda s, x: [x[0], x[1], s * x[2], s * x[3]], total, "momentum scaling")
    bundle = ScalingBundle(
        QuotientChart(total, contact, lambda x: [x[0], x[1], x[2] / x[3]], lambda y: [y[0], y[1], y[2], 1.0 + 0 * y[0]]),
        scaling, ScalarField(total, lambda x: x[3], "p2"))
    standard_q = QuotientChart(total, momenta, lambda x: [x[2], x[3]], lambda y: [0.0 * y[0], 0.0 * y[0], y[0], y[1]])
    poisson_q = QuotientChart(momenta, final, lambda y: [y[0] / y[1]], lambda z: [z[0], 1.0 + 0 * z[0]])
    contact_q = QuotientChart(contact, final, lambda y: [y[2]], lambda z: [0.0 * z[0], 0.0 * z[0], z[0]])
    return CompatiblePair(system, bundle, shifts, standard_q, poisson_q, contact_q, "abelian")


def test_abelian_reduction_gives_zero_structures():
    cp = abelian_cotangent_pair()
    points = [np.array([0.3, -1.0, 0.7, 1.4]), np.array([2.0, 0.5, -1.1, -0.6])]
    P = reduce_symplectic_by_standard(cp.system, cp.standard_quotient, cp.standard, samples=points)
    assert not np.any(real_array(P.pi.raw(np.array([0.5, 2.0]))))
    for result in (pipeline_A(cp, points), pipeline_B(cp, points)):
        z = np.array([0.8])
        assert not np.any(real_array(result.system.pi.raw(z)))
        assert max_dev(result.system.e.raw(z), [0.0]) < 1e-15
        assert max_dev(result.field.raw(z), [0.0]) < 1e-15


def test_invariance_failure_is_raised(ho, rng):
    # rotating the position alone does not preserve the symplectic form
    position_only = OneParamAction(Group.CIRCLE, lambda g, x: [x[0], x[1] + g, x[2], x[3]], ho.pair.system.chart)
    with pytest.raises(ReductionError):
        reduce_symplectic_by_standard(ho.pair.system, STANDARD_QUOTIENT, (position_only,),
                                      samples=ho.sample("total", rng, 3))


def test_trivial_standard_reduction_leaves_jacobi_structure(ho, rng):
    contact = reduce_symplectic_by_scaling(ho.pair.system, ho.pair.scaling)
    jac = jacobi_from_contact(contact)
    same = reduce_jacobi_by_standard(jac, identity_quotient(jac.chart))
    for y in ho.sample("contact", rng, 10):
        assert max_dev(same.pi.raw(y), jac.pi.raw(y)) < 1e-14
        assert max_dev(same.e.raw(y), jac.e.raw(y)) < 1e-14


def test_contact_jacobi_reduces_to_final_pair(ho, rng):
    contact = reduce_symplectic_by_scaling(ho.pair.system, ho.pair.scaling)
    jac = reduce_jacobi_by_standard(jacobi_from_contact(contact), CONTACT_QUOTIENT, ho.pair.contact_actions,
                                    samples=ho.sample("contact", rng, 5))
    ref = ho.closed_forms["final_jacobi_b"]
    for y in ho.sample("final_b", rng, 30):
        assert max_dev(jac.pi.raw(y), ref.pi.raw(y)) < 1e-12
        assert max_dev(jac.e.raw(y), ref.e.raw(y)) < 1e-12
        assert float(jac.hamiltonian.fn(y)) == pytest.approx(float(reduced_hamiltonian(y)), abs=1e-13)


# scaling reduction ----------------------------------------------------------------------


def test_scaling_reduction_of_radius_ratio_orbit_space(ho, rng):
    P2 = reduce_symplectic_by_standard(ho.pair.system, ho.extras["scaled_standard_quotient"])
    J = reduce_poisson_by_scaling(P2, ho.extras["scaled_orbit_bundle"], samples=ho.sample("orbit_scaled", rng, 5))
    ref = ho.closed_forms["final_jacobi_a"]
    for y in ho.sample("final_a", rng, 30):
        assert max_dev(J.pi.raw(y), ref.pi.raw(y)) < 1e-12
        assert max_dev(J.e.raw(y), ref.e.raw(y)) < 1e-12
        assert float(J.hamiltonian.fn(y)) == pytest.approx(float(reduced_hamiltonian(y)), abs=1e-13)


def test_trivialized_bracket_matches_extracted_jacobi_bracket(ho, rng):
    P = pipeline_A(ho.pair).stages["poisson"]
    b = pipeline_A(ho.pair).stages["poisson_bundle"]
    J = reduce_poisson_by_scaling(P, b)
    for y in ho.sample("final_a", rng, 10):
        h1, h2 = random_smooth_function(FINAL_A, rng), random_smooth_function(FINAL_A, rng)
        h1, h2 = (ScalarField(J.chart, h.fn) for h in (h1, h2))
        assert float(trivialized_bracket(P, b, h1, h2).fn(y)) == pytest.approx(
            float(jacobi_bracket(J, h1, h2).fn(y)), abs=1e-11)


def test_scaling_fiber_independence(ho, rng):
    P = pipeline_A(ho.pair).stages["poisson"]
    assert scaling_fiber_report(P, pipeline_A(ho.pair).stages["poisson_bundle"], ho.sample("orbit", rng, 20)).passed


def test_oscillator_contact_reduction(ho, rng):
    contact = reduce_symplectic_by_scaling(ho.pair.system, ho.pair.scaling, samples=ho.sample("total", rng, 5))
    for y in ho.sample("contact", rng, 30):
        assert max_dev(contact.eta.raw(y), ho.closed_forms["contact_form"].raw(y)) < 1e-13
        assert max_dev(contact_hvf(contact).raw(y), ho.closed_forms["contact_field"].raw(y)) < 1e-12
    assert contact_pullback_report(ho.pair.system, ho.pair.scaling, contact, ho.sample("total", rng, 20)).passed


def test_one_dimensional_cotangent_reduction():
    from scaling_reduction.examples.linear import build_linear_ctq

    suite = build_linear_ctq(n=1, i0=1, Y=lambda q: [1.0 + 0.0 * q[0]])
    contact = reduce_symplectic_by_scaling(suite.pair.system, suite.pair.scaling)
    y = np.array([0.7])
    assert float(contact.hamiltonian.fn(y)) == 1.0
    assert max_dev(contact_hvf(contact).raw(y), [1.0]) < 1e-15
    assert max_dev(contact.eta.raw(y), [-1.0]) < 1e-15 or max_dev(contact.eta.raw(y), [1.0]) < 1e-15


# pipelines and equivalence --------------------------------------------------------------


def test_pipelines_on_oscillator(ho, rng):
    ra, rb = pipeline_A(ho.pair), pipeline_B(ho.pair)
    assert ra.provenance["order"] == "standard then scaling"
    assert rb.provenance["scaling_function"] == ho.pair.scaling.F.name
    for y in ho.sample("final_a", rng, 30):
        assert max_dev(ra.field.raw(y), ho.closed_forms["final_field_a"].raw(y)) < 1e-12
        assert max_dev(rb.field.raw(y), ho.closed_forms["final_field_b"].raw(y)) < 1e-12


def test_psi_is_identity_on_oscillator(ho, rng):
    pair = equivalence_psi(ho.pair)
    for z in ho.sample("final_a", rng, 30):
        assert FINAL_A.distance(pair.psi(z), z) < 1e-12


def test_psi_is_identity_without_standard_symmetry(linear, rng):
    pair = equivalence_psi(linear.pair)
    for z in linear.sample("final_a", rng, 10):
        assert max_dev(pair.psi(z), z) == 0.0


@pytest.mark.parametrize("name", ["ho", "so3", "linear"])
def test_equivalence_reports_pass(name, request, rng):
    suite = request.getfixturevalue(name)
    ra, rb = pipeline_A(suite.pair), pipeline_B(suite.pair)
    functions = [suite.random_invariant(rng) for _ in range(4)]
    pair = equivalence_psi(suite.pair, ra, rb, samples=suite.sample("final_a", rng, 10),
                           invariant_functions=functions)
    reports = equivalence_reports(suite.pair, pair, ra, rb, suite.sample("final_a", rng, 20), functions)
    assert len(reports) == 4 and all(r.passed for r in reports)


def test_pipeline_b_without_standard_symmetry_is_scaling_reduction(linear, rng):
    contact = reduce_symplectic_by_scaling(linear.pair.system, linear.pair.scaling)
    rb = pipeline_B(linear.pair)
    for y in linear.sample("final_b", rng, 10):
        assert max_dev(rb.field.raw(y), contact_hvf(contact).raw(y)) < 1e-12


def test_so3_pipelines_agree_with_symbol(so3, rng):
    ra, rb = pipeline_A(so3.pair), pipeline_B(so3.pair)
    pair = equivalence_psi(so3.pair)
    for z in so3.sample("final_a", rng, 20):
        assert max_dev(ra.field.raw(z), so3.closed_forms["symbol"].raw(z)) < 1e-12
        moved = real_array(matmul(jacobian(pair.psi, z), ra.field.raw(z)))
        assert max_dev(moved, rb.field.raw(pair.psi(z))) < 1e-8


def test_reduced_functions_correspond(ho, rng):
    pair = equivalence_psi(ho.pair)
    H = ho.random_invariant(rng)
    a, b = reduce_function_A(ho.pair, H), reduce_function_B(ho.pair, H)
    for z in ho.sample("final_a", rng, 10):
        assert float(b.fn(pair.psi(z))) == pytest.approx(float(a.fn(z)), abs=1e-12)


# properties ------------------------------------------------------------------------------


def test_projection_commutation_on_radius_ratio_bundle(ho, rng):
    P2 = reduce_symplectic_by_standard(ho.pair.system, ho.extras["scaled_standard_quotient"])
    b = ho.extras["scaled_orbit_bundle"]
    J = reduce_poisson_by_scaling(P2, b)
    for _ in range(3):
        H = ho.extras["random_scaled_homogeneous"](rng)
        for x in ho.sample("orbit_scaled", rng, 10):
            assert projection_commutation_residual(P2, b, J, H, x) < 1e-8


def test_anti_homomorphism_on_final_pairs(ho, rng):
    ra = pipeline_A(ho.pair)
    for y in ho.sample("final_a", rng, 10):
        f, g = random_smooth_function(FINAL_A, rng), random_smooth_function(FINAL_A, rng)
        f, g = (ScalarField(ra.system.chart, h.fn) for h in (f, g))
        assert anti_homomorphism_residual(ra.system, f, g, y) < 1e-7


def test_homogeneity_closure(ho, rng):
    sys = ho.pair.system
    pairs = action_samples(rng, Group.R_PLUS, ho.sample("total", rng, 20))
    for _ in range(5):
        H1, H2 = ho.random_invariant(rng), ho.random_invariant(rng)
        assert check_scalar_homogeneity(symplectic_bracket(sys, H1, H2), ho.pair.scaling.action, pairs).passed


def test_compatible_pair_checks(ho, so3, linear, rng):
    for suite in (ho, so3, linear):
        assert all(r.passed for r in suite.pair.checks(suite.sample("total", rng, 5)))
