import numpy as np
import pytest

from scaling_reduction.dual import real_array
from scaling_reduction.examples.harmonic import CONTACT, TOTAL
from scaling_reduction.harness.verify import reconstruction_cases
from scaling_reduction.integrate import Trajectory, uniform_grid
from scaling_reduction.numcore import VectorField
from scaling_reduction.reconstruction import (
    ReconstructionError,
    ReconstructionProblem,
    flat_connection,
    horizontal_lift,
    lift_point,
    reconstruct_symplectic,
)
from scaling_reduction.reduction import reduce_symplectic_by_scaling
from scaling_reduction.structures import contact_hvf, symplectic_bracket, symplectic_hvf
from scaling_reduction.symmetry import generator

X_REF = np.array([1.0, 0.0, 1.0, 0.0])


def constant_curve(chart, y, n=5, dt=0.1):
    times = uniform_grid(0.0, (n - 1) * dt, dt)
    return Trajectory(chart, times, np.tile(y, (n, 1)))


def test_connection_on_the_generator_is_its_derivative_of_f(ho):
    energy = ho.extras["energy_bundle"]
    delta = real_array(generator(energy.action, X_REF))
    assert flat_connection(energy, X_REF, delta) == pytest.approx(1.0, abs=1e-15)


def test_connection_vanishes_on_level_directions(ho):
    b = ho.pair.scaling
    # F = r^2 does not see the angles or the momentum radius
    for v in ([0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 3.0, -2.0]):
        assert flat_connection(b, X_REF, v) == 0.0


def test_connection_is_linear(ho, rng):
    b = ho.pair.scaling
    x = ho.sample("total", rng, 1)[0]
    u, w = rng.normal(size=4), rng.normal(size=4)
    lhs = flat_connection(b, x, 2.0 * u - 3.0 * w)
    assert lhs == pytest.approx(2.0 * flat_connection(b, x, u) - 3.0 * flat_connection(b, x, w), abs=1e-12)


def test_horizontal_lift_of_a_constant_curve(ho):
    b = ho.extras["energy_bundle"]
    phi = horizontal_lift(b, constant_curve(CONTACT, [1.0, 0.0, 0.0]), 1.0)
    assert np.allclose(phi.states, np.tile(X_REF, (5, 1)), atol=1e-15)
    doubled = horizontal_lift(b, constant_curve(CONTACT, [1.0, 0.0, 0.0]), 2.0)
    assert np.allclose(doubled.states[0], [np.sqrt(2.0), 0.0, np.sqrt(2.0), 0.0], atol=1e-15)


def test_lift_starts_at_the_initial_point(ho):
    x0 = ho.extras["verify_x0"]
    rp = ReconstructionProblem(ho.pair.scaling, symplectic_hvf(ho.pair.system),
                               contact_hvf(reduce_symplectic_by_scaling(ho.pair.system, ho.pair.scaling)),
                               x0, (0.0, 0.1))
    phi = horizontal_lift(rp.bundle, rp.base_trajectory(), rp.s0)
    assert TOTAL.distance(phi.states[0], x0) < 1e-14


def test_lift_point_hits_the_level(ho):
    b = ho.pair.scaling
    p = lift_point(b, 4.0, [0.5, 1.0, 2.0])
    assert float(b.F.fn(p.coords)) == pytest.approx(4.0) and p.coords[2] == pytest.approx(1.0)


def test_conserved_scaling_function_gives_zero_group_factor(ho):
    (case,) = reconstruction_cases(ho, 1e-2, (0.0, 1.0), routes=["symplectic_energy"])
    assert np.max(np.abs(case.result.alpha)) < 1e-12
    assert TOTAL.distance(case.result.Gamma.states[0], ho.extras["verify_x0"]) < 1e-14


@pytest.mark.parametrize("suite_name", ["ho", "linear", "so3"])
def test_all_routes_match_direct_integration(suite_name, request):
    suite = request.getfixturevalue(suite_name)
    for case in reconstruction_cases(suite, 1e-3, (0.0, 1.0)):
        err = case.result.errors_against(case.direct)
        assert not case.result.truncated and len(err) == 1001
        assert np.max(err) < 1e-6, case.name


def test_reeb_and_symplectic_routes_agree(ho):
    cases = {c.name: c.result for c in reconstruction_cases(ho, 1e-3, (0.0, 1.0), routes=["symplectic", "reeb"])}
    diff = np.max(np.abs(cases["symplectic"].alpha - cases["reeb"].alpha))
    assert diff < 1e-6


@pytest.mark.parametrize("suite_name", ["ho", "linear"])
def test_lift_stays_on_the_level_set(suite_name, request):
    suite = request.getfixturevalue(suite_name)
    for case in reconstruction_cases(suite, 1e-2, (0.0, 1.0)):
        b, s0 = case.problem.bundle, case.problem.s0
        levels = np.array([float(b.F.fn(x)) for x in case.result.phi.states])
        assert np.max(np.abs(levels - s0)) < 1e-10 * max(1.0, abs(s0))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_degenerate_start_is_truncated_honestly(ho):
    # r vanishes at t = pi/4 along the literal default start point
    (case,) = reconstruction_cases(ho, 1e-3, (0.0, 1.0), x0=ho.extras["x0"], routes=["reeb"])
    assert case.result.truncated
    assert abs(case.result.times[-1] - np.pi / 4) < 5e-3


def test_invalid_problems_are_rejected(ho):
    b = ho.pair.scaling
    with pytest.raises(ReconstructionError):
        horizontal_lift(b, constant_curve(CONTACT, [1.0, 0.0, 0.0]), 0.0)
    with pytest.raises(ReconstructionError):
        horizontal_lift(b, constant_curve(CONTACT, [1.0, 0.0, 0.0]), -1.0)
    contact = reduce_symplectic_by_scaling(ho.pair.system, b)
    with pytest.raises(ValueError):
        ReconstructionProblem(b, contact_hvf(contact), contact_hvf(contact), X_REF, (0.0, 1.0))
    with pytest.raises(ValueError):
        ReconstructionProblem(b, symplectic_hvf(ho.pair.system), contact_hvf(contact), X_REF, (1.0, 0.0))
    rp = ReconstructionProblem(b, symplectic_hvf(ho.pair.system), contact_hvf(contact), X_REF, (0.0, 0.1), 0.1)
    with pytest.raises(ReconstructionError):
        reconstruct_symplectic(rp, symplectic_bracket(ho.pair.system, b.F, ho.pair.system.hamiltonian))


def test_zero_length_span_reconstructs_the_start(ho):
    b = ho.pair.scaling
    contact = reduce_symplectic_by_scaling(ho.pair.system, b)
    rp = ReconstructionProblem(b, symplectic_hvf(ho.pair.system), contact_hvf(contact), X_REF, (0.5, 0.5))
    result = reconstruct_symplectic(rp, symplectic_bracket(ho.pair.system, b.F, ho.pair.system.hamiltonian))
    assert len(result.Gamma) == 1 and TOTAL.distance(result.Gamma.states[0], X_REF) < 1e-14


def test_field_on_the_wrong_chart_is_rejected(ho):
    with pytest.raises(ValueError):
        ReconstructionProblem(ho.pair.scaling, VectorField(CONTACT, lambda y: y), VectorField(CONTACT, lambda y: y),
                              X_REF, (0.0, 1.0))
