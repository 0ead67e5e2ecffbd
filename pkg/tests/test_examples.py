import numpy as np
import pytest

from scaling_reduction.dual import real_array
from scaling_reduction.examples import SUITE_NAMES, build_suite
from scaling_reduction.examples.harmonic import FINAL_A, contact_form, contact_field, reeb
from scaling_reduction.examples.linear import build_linear_ctq, linear_coefficients
from scaling_reduction.examples.rotation import casimir, lie_poisson_system, linear_function, projective_bundle
from scaling_reduction.harness.verify import VerifyContext, closed_form_checks
from scaling_reduction.numcore import ScalarField, jacobian
from scaling_reduction.reduction import pipeline_A
from scaling_reduction.structures import poisson_bracket, poisson_hvf, symplectic_bracket


def test_oscillator_reference_values():
    y = np.array([1.0, np.pi / 2, 0.0])
    assert np.allclose(real_array(reeb(y)), [0.0, 0.0, 2.0], atol=1e-15)
    assert np.allclose(real_array(contact_field([2.0, 0.0, 0.0])), [5.0, 0.0, 0.0], atol=1e-15)


def test_reeb_field_is_normalized_by_the_contact_form(ho, rng):
    for y in ho.sample("contact", rng, 20):
        assert float(np.dot(real_array(contact_form(y)), real_array(reeb(y)))) == pytest.approx(1.0, abs=1e-14)


def test_oscillator_final_field_agrees_with_pipeline(ho):
    field = ho.closed_forms["final_field_a"]
    assert field.chart is FINAL_A
    assert np.allclose(real_array(field.raw([2.0, 0.0])), [5.0, 0.0], atol=1e-15)


def test_one_dimensional_translation_reduces_to_unit_field():
    suite = build_linear_ctq(1, 1, Y=lambda q: [1.0 + 0.0 * q[0]])
    ra = pipeline_A(suite.pair)
    for q in (-1.0, 0.0, 2.5):
        assert np.allclose(real_array(ra.field.raw([q])), [1.0], atol=1e-14)
        assert float(ra.hamiltonian.fn([q])) == pytest.approx(1.0)


def test_projected_field_for_linear_coefficients():
    suite = build_linear_ctq(2, 2, Y=linear_coefficients(2))
    y = [1.0, 1.0, 1.0]
    assert np.allclose(real_array(suite.closed_forms["projected_field"].raw(y)), [1.0, 0.0, -1.0], atol=1e-14)
    assert np.allclose(real_array(pipeline_A(suite.pair).field.raw(y)), [1.0, 0.0, -1.0], atol=1e-12)


def test_canonical_bracket_sign():
    suite = build_linear_ctq(1, 1, Y=lambda q: [q[0]])
    chart = suite.pair.system.chart
    p = ScalarField(chart, lambda x: x[1])
    qp = ScalarField(chart, lambda x: x[0] * x[1])
    assert float(symplectic_bracket(suite.pair.system, p, qp).fn([2.0, 3.0])) == pytest.approx(-3.0)


def test_linear_builder_validation():
    with pytest.raises(ValueError):
        build_linear_ctq(0)
    with pytest.raises(ValueError):
        build_linear_ctq(2, 3)


def test_lie_poisson_bracket_of_coordinates():
    lp = lie_poisson_system()
    e = np.eye(3)
    value = poisson_bracket(lp, linear_function(e[0]), linear_function(e[1])).fn(np.array([0.0, 0.0, 1.0]))
    assert float(value) == pytest.approx(-1.0)


def test_casimir_commutes_with_linear_functions(rng):
    lp = lie_poisson_system()
    for mu in rng.normal(size=(20, 3)):
        for xi in np.eye(3):
            assert abs(float(poisson_bracket(lp, casimir(), linear_function(xi)).fn(mu))) < 1e-13


def test_symbol_is_the_pushforward_of_the_rotation_field(so3):
    b = projective_bundle(2)
    lp = lie_poisson_system(so3.extras["xi"])
    field = poisson_hvf(lp, lp.hamiltonian)
    for r in ([1.0, 0.0], [0.3, -0.7], [-1.2, 2.0]):
        mu = np.array(real_array(b.quotient.section_raw(r)), dtype=float)
        pushed = real_array(jacobian(b.quotient.project, mu)) @ real_array(field.raw(mu))
        assert np.allclose(real_array(so3.closed_forms["symbol"].raw(r)), pushed, atol=1e-13)
    assert np.allclose(real_array(so3.closed_forms["symbol"].raw([1.0, 0.0])), [0.0, -1.0], atol=1e-15)


@pytest.mark.parametrize("suite_name", SUITE_NAMES)
def test_closed_forms_match_generic_reduction(suite_name):
    ctx = VerifyContext(build_suite(suite_name), seed=3, n_points=100, dt=1e-3, t_span=(0.0, 1.0))
    for check in closed_form_checks(ctx):
        worst = max((dev for dev, _ in check.run(ctx)), default=0.0)
        assert worst < 1e-8, check.key
