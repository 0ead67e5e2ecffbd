"""Planar isotropic oscillator in polar coordinates on position and momentum.

Total chart ``(r, θ, r′, θ′)``: ``(r, θ)`` polar coordinates of the position and
``(r′, θ′)`` of the momentum.  Scaling acts by ``√s`` on both radii, the circle
rotates both angles together.
"""

from __future__ import annotations

import numpy as np

from .. import linalg
from ..dual import cos, sin, sqrt
from ..numcore import BivectorField, Chart, OneFormField, ScalarField, TwoFormField, VectorField
from ..reduction import CompatiblePair
from ..structures import JacobiSystem, PoissonSystem, SymplecticSystem
from ..symmetry import Group, OneParamAction, QuotientChart, ScalingBundle
from . import ExampleSuite

TWO_PI = 2.0 * np.pi


def _bivector(n, entries):
    """Antisymmetric matrix from ``{(i, j): value}`` upper entries."""
    m = np.zeros((n, n), dtype=object)
    m[:] = 0.0
    for (i, j), v in entries.items():
        m[i, j] = v
        m[j, i] = -v
    return m


def _positive(*idx):
    return lambda x: all(x[i] > 0 for i in idx)


# charts
TOTAL = Chart("oscillator", ("r", "theta", "r'", "theta'"), (False, True, False, True), _positive(0, 2))
ORBIT = Chart("oscillator/S1", ("r", "r'", "alpha"), (False, False, True), _positive(0, 1))
ORBIT_SCALED = Chart("oscillator/S1 scaled", ("rho", "rho'", "sigma"), (False, False, True), _positive(0, 1))
CONTACT = Chart("oscillator/scaling", ("rho'", "theta", "theta'"), (False, True, True), _positive(0))
FINAL_A = Chart("oscillator final (standard first)", ("rho'", "sigma"), (False, True), _positive(0))
FINAL_B = Chart("oscillator final (scaling first)", ("rho'", "sigma"), (False, True), _positive(0))


# directly coded reference formulas --------------------------------------------------


def symplectic_bivector(x):
    r, th, rp, thp = x
    a = th - thp
    c, s = cos(a), sin(a)
    return _bivector(4, {(0, 2): -c, (0, 3): -s / rp, (1, 2): s / r, (1, 3): -c / (r * rp)})


def displayed_symplectic_form(x):
    """Two-form as written with the opposite contraction convention (equals −ω here)."""
    r, th, rp, thp = x
    a = th - thp
    c, s = cos(a), sin(a)
    return _bivector(4, {(0, 2): c, (0, 3): rp * s, (1, 2): -r * s, (1, 3): r * rp * c})


def hamiltonian(x):
    return (x[0] ** 2 + x[2] ** 2) / 2.0


def hamiltonian_field(x):
    r, th, rp, thp = x
    a = th - thp
    c, s = cos(a), sin(a)
    return [-rp * c, rp * s / r, r * c, r * s / rp]


def orbit_poisson(x):
    r, rp, a = x
    c, s = cos(a), sin(a)
    return _bivector(3, {(0, 1): -c, (0, 2): s / rp, (1, 2): -s / r})


def orbit_hamiltonian(x):
    return (x[0] ** 2 + x[1] ** 2) / 2.0


def orbit_field(x):
    r, rp, a = x
    c, s = cos(a), sin(a)
    return [-rp * c, r * c, -s * (r / rp - rp / r)]


def orbit_poisson_scaled(x):
    rho, rhop, sg = x
    c, s = cos(sg), sin(sg)
    return _bivector(3, {(0, 1): -c / rho, (0, 2): s / (rho * rhop), (1, 2): -2.0 * s / rho**2})


def orbit_to_scaled(x):
    r, rp, a = x
    return [r, rp / r, a]


def scaled_to_orbit(x):
    rho, rhop, sg = x
    return [rho, rho * rhop, sg]


def contact_form(x):
    rhop, th, thp = x
    a = th - thp
    return [0.5 * cos(a), 0.5 * rhop * sin(a), 0.5 * rhop * sin(a)]


def reeb(x):
    rhop, th, thp = x
    a = th - thp
    return [2.0 * cos(a), 0.0 * rhop, 2.0 * sin(a) / rhop]


def contact_jacobi_pi(x):
    rhop, th, thp = x
    a = th - thp
    c, s = cos(a), sin(a)
    return _bivector(3, {(0, 2): s, (0, 1): -s, (1, 2): -c / rhop})


def contact_jacobi_e(x):
    rhop, th, thp = x
    a = th - thp
    return [-2.0 * cos(a), 0.0 * rhop, -2.0 * sin(a) / rhop]


def reduced_hamiltonian(x):
    return (1.0 + x[0] ** 2) / 2.0


def contact_field(x):
    rhop, th, thp = x
    a = th - thp
    c, s = cos(a), sin(a)
    return [(1.0 + rhop**2) * c, s * rhop, s / rhop]


def final_pi(x):
    rhop, sg = x
    return _bivector(2, {(0, 1): -2.0 * sin(sg)})


def final_e(x):
    rhop, sg = x
    return [-2.0 * cos(sg), 2.0 * sin(sg) / rhop]


def final_field(x):
    rhop, sg = x
    return [(1.0 + rhop**2) * cos(sg), (rhop**2 - 1.0) / rhop * sin(sg)]


# actions and quotients ------------------------------------------------------------


def _scale(s, x):
    r, th, rp, thp = x
    q = sqrt(s)
    return [q * r, th, q * rp, thp]


def _rotate(g, x):
    r, th, rp, thp = x
    return [r, th + g, rp, thp + g]


def _scale_scaled_orbit(s, x):
    rho, rhop, sg = x
    return [sqrt(s) * rho, rhop, sg]


SCALING = OneParamAction(Group.R_PLUS, _scale, TOTAL, "radial scaling")
ROTATION = OneParamAction(Group.CIRCLE, _rotate, TOTAL, "joint rotation")

STANDARD_QUOTIENT = QuotientChart(
    TOTAL, ORBIT,
    lambda x: [x[0], x[2], x[1] - x[3]],
    lambda y: [y[0], y[2], y[1], 0.0 * y[0]],
    "forget common angle",
)
SCALING_QUOTIENT = QuotientChart(
    TOTAL, CONTACT,
    lambda x: [x[2] / x[0], x[1], x[3]],
    lambda y: [1.0 + 0.0 * y[0], y[1], y[0], y[2]],
    "radius ratio",
)
POISSON_QUOTIENT = QuotientChart(
    ORBIT, FINAL_A,
    lambda x: [x[1] / x[0], x[2]],
    lambda y: [1.0 + 0.0 * y[0], y[0], y[1]],
    "radius ratio on orbit space",
)
CONTACT_QUOTIENT = QuotientChart(
    CONTACT, FINAL_B,
    lambda x: [x[0], x[1] - x[2]],
    lambda y: [y[0], y[1], 0.0 * y[0]],
    "angle difference",
)
SCALED_STANDARD_QUOTIENT = QuotientChart(
    TOTAL, ORBIT_SCALED,
    lambda x: [x[0], x[2] / x[0], x[1] - x[3]],
    lambda y: [y[0], y[2], y[0] * y[1], 0.0 * y[0]],
    "forget common angle, radius ratio",
)
SCALED_ORBIT_QUOTIENT = QuotientChart(
    ORBIT_SCALED, FINAL_A,
    lambda x: [x[1], x[2]],
    lambda y: [1.0 + 0.0 * y[0], y[0], y[1]],
    "drop rho",
)


def _sample_total(rng, n):
    r = rng.uniform(0.5, 2.0, size=(n, 2))
    ang = rng.uniform(0.0, TWO_PI, size=(n, 2))
    return np.column_stack([r[:, 0], ang[:, 0], r[:, 1], ang[:, 1]])


def _sample_orbit(rng, n):
    return np.column_stack([rng.uniform(0.5, 2.0, n), rng.uniform(0.5, 2.0, n), rng.uniform(0, TWO_PI, n)])


def _sample_scaled(rng, n):
    return np.column_stack([rng.uniform(0.5, 2.0, n), rng.uniform(0.3, 3.0, n), rng.uniform(0, TWO_PI, n)])


def _sample_contact(rng, n):
    return np.column_stack([rng.uniform(0.3, 3.0, n), rng.uniform(0, TWO_PI, n), rng.uniform(0, TWO_PI, n)])


def _sample_final(rng, n):
    return np.column_stack([rng.uniform(0.3, 3.0, n), rng.uniform(0, TWO_PI, n)])


def random_invariant(rng) -> ScalarField:
    """Rotation-invariant, scaling-homogeneous function on the total chart.

    Quadratic forms in ``(r, r′)`` times ``{1, cos α, sin α}``, α = θ − θ′.
    """
    c = rng.normal(size=(3, 3))

    def H(x):
        r, th, rp, thp = x
        a = th - thp
        trig = (1.0, cos(a), sin(a))
        quad = (r * r, r * rp, rp * rp)
        return sum(c[i, k] * quad[i] * trig[k] for i in range(3) for k in range(3))

    return ScalarField(TOTAL, H, "random invariant")


def random_scaled_homogeneous(rng) -> ScalarField:
    """Homogeneous function ``ρ² g(ρ′, σ)`` on the scaled orbit chart."""
    c = rng.normal(size=(3, 3))

    def H(x):
        rho, rhop, sg = x
        trig = (1.0, cos(sg), sin(sg))
        return rho**2 * sum(c[i, k] * rhop**i * trig[k] for i in range(3) for k in range(3))

    return ScalarField(ORBIT_SCALED, H, "random homogeneous")


def build_ho() -> ExampleSuite:
    H = ScalarField(TOTAL, hamiltonian, "H")
    omega = TwoFormField(TOTAL, lambda x: -linalg.inverse(symplectic_bivector(x)), "omega")
    system = SymplecticSystem(TOTAL, omega, H)
    F = ScalarField(TOTAL, lambda x: x[0] ** 2, "r^2")
    scaling = ScalingBundle(SCALING_QUOTIENT, SCALING, F)
    pair = CompatiblePair(system, scaling, (ROTATION,), STANDARD_QUOTIENT, POISSON_QUOTIENT, CONTACT_QUOTIENT, "ho")

    scaled_system = PoissonSystem(
        ORBIT_SCALED, BivectorField(ORBIT_SCALED, orbit_poisson_scaled, "scaled orbit Poisson"),
        ScalarField(ORBIT_SCALED, lambda x: x[0] ** 2 * (1.0 + x[1] ** 2) / 2.0, "H"),
    )
    scaled_bundle = ScalingBundle(
        SCALED_ORBIT_QUOTIENT,
        OneParamAction(Group.R_PLUS, _scale_scaled_orbit, ORBIT_SCALED, "rho scaling"),
        ScalarField(ORBIT_SCALED, lambda x: x[0] ** 2, "rho^2"),
    )
    energy_bundle = ScalingBundle(SCALING_QUOTIENT, SCALING, ScalarField(TOTAL, hamiltonian, "H"))

    closed = {
        "symplectic_bivector": BivectorField(TOTAL, symplectic_bivector, "oscillator bivector"),
        "displayed_symplectic_form": TwoFormField(TOTAL, displayed_symplectic_form, "displayed form"),
        "hamiltonian_field": VectorField(TOTAL, hamiltonian_field, "oscillator field"),
        "orbit_poisson": BivectorField(ORBIT, orbit_poisson, "orbit Poisson"),
        "orbit_hamiltonian": ScalarField(ORBIT, orbit_hamiltonian, "orbit H"),
        "orbit_field": VectorField(ORBIT, orbit_field, "orbit field"),
        "orbit_poisson_scaled": BivectorField(ORBIT_SCALED, orbit_poisson_scaled, "scaled orbit Poisson"),
        "contact_form": OneFormField(CONTACT, contact_form, "eta"),
        "reeb": VectorField(CONTACT, reeb, "Reeb"),
        "contact_jacobi": JacobiSystem(
            CONTACT, BivectorField(CONTACT, contact_jacobi_pi), VectorField(CONTACT, contact_jacobi_e),
            ScalarField(CONTACT, reduced_hamiltonian, "h"),
        ),
        "contact_hamiltonian": ScalarField(CONTACT, reduced_hamiltonian, "h"),
        "contact_field": VectorField(CONTACT, contact_field, "contact field"),
        "final_jacobi_a": JacobiSystem(
            FINAL_A, BivectorField(FINAL_A, final_pi), VectorField(FINAL_A, final_e),
            ScalarField(FINAL_A, reduced_hamiltonian, "h"),
        ),
        "final_jacobi_b": JacobiSystem(
            FINAL_B, BivectorField(FINAL_B, final_pi), VectorField(FINAL_B, final_e),
            ScalarField(FINAL_B, reduced_hamiltonian, "h"),
        ),
        "final_field_a": VectorField(FINAL_A, final_field, "final field"),
        "final_field_b": VectorField(FINAL_B, final_field, "final field"),
    }
    samplers = {
        "total": _sample_total,
        "orbit": _sample_orbit,
        "orbit_scaled": _sample_scaled,
        "contact": _sample_contact,
        "final_a": _sample_final,
        "final_b": _sample_final,
    }
    extras = {
        "x0": np.array([1.0, 0.0, 1.0, 0.0]),
        # r stays positive on [0, 1] from here, unlike the x0 above
        "verify_x0": np.array([1.0, 0.0, 1.0, 1.0]),
        "scaled_orbit_system": scaled_system,
        "scaled_orbit_bundle": scaled_bundle,
        "scaled_standard_quotient": SCALED_STANDARD_QUOTIENT,
        "energy_bundle": energy_bundle,
        "orbit_to_scaled": orbit_to_scaled,
        "scaled_to_orbit": scaled_to_orbit,
        "random_scaled_homogeneous": random_scaled_homogeneous,
        "charts": {"total": TOTAL, "orbit": ORBIT, "orbit_scaled": ORBIT_SCALED, "contact": CONTACT,
                   "final_a": FINAL_A, "final_b": FINAL_B},
    }
    return ExampleSuite("ho", pair, closed, samplers, random_invariant, extras)
