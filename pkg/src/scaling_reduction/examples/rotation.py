"""Rotation group: Lie-Poisson structure on so(3)*, its projectivization, and T*SO(3).

``so(3)*`` carries ``{μ_i, μ_j} = −ε_ijk μ_k`` (so ``{ξ₁^ℓ, ξ₂^ℓ}(μ) = −μ([ξ₁, ξ₂])``
with the cross product as Lie bracket).  Scaling ``μ ↦ sμ`` with ``F = ν^ℓ``
gives the projective chart ``r(ζ, ν) = ζ^ℓ / ν^ℓ``; three such charts, one per
basis vector ``ν``, form a Kirillov atlas.

The compatible pair lives on ``T*SO(3)`` in ZYX Euler angles ``q = (a, b, c)``
with canonical momenta ``p``.  Body momentum is ``μ = B(q)^{-T} p`` where
``B`` maps Euler rates to body angular velocity.  Left multiplication by
rotations about the three coordinate axes gives the standard symmetry.
"""

from __future__ import annotations

from itertools import product

import numpy as np

from ..dual import arcsin, arctan2, cos, sin
from ..numcore import BivectorField, Chart, ScalarField, TwoFormField, VectorField
from ..reduction import CompatiblePair, reduce_poisson_by_scaling
from ..structures import ChartTransition, KirillovAtlas, PoissonSystem, SymplecticSystem
from ..symmetry import Group, OneParamAction, QuotientChart, ScalingBundle
from . import ExampleSuite
from .linear import canonical_form

BASIS = np.eye(3)
GIMBAL_MARGIN = 1e-3
TWO_PI = 2.0 * np.pi


def lie_bracket(xi1, xi2) -> np.ndarray:
    """``[e₁, e₂] = e₃`` and cyclic."""
    return np.cross(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float))


def pairing(mu, xi):
    """``ξ^ℓ(μ) = μ(ξ)``; works for Dual-valued ``μ``."""
    return sum(mu[i] * float(xi[i]) for i in range(3) if xi[i] != 0.0) + 0.0 * mu[0]


def lie_poisson(mu):
    m1, m2, m3 = mu
    out = np.empty((3, 3), dtype=object)
    out[:] = 0.0 * m1
    out[0, 1], out[1, 0] = -m3, m3
    out[1, 2], out[2, 1] = -m1, m1
    out[2, 0], out[0, 2] = -m2, m2
    return out


def _nonzero(mu) -> bool:
    return bool(np.any(np.asarray(mu) != 0))


DUAL_SPACE = Chart("so(3)*", ("mu1", "mu2", "mu3"), domain_check=_nonzero)


def linear_function(xi, name: str = "") -> ScalarField:
    xi = np.asarray(xi, dtype=float)
    return ScalarField(DUAL_SPACE, lambda mu: pairing(mu, xi), name or f"<mu,{xi.tolist()}>")


def casimir() -> ScalarField:
    return ScalarField(DUAL_SPACE, lambda mu: mu[0] ** 2 + mu[1] ** 2 + mu[2] ** 2, "|mu|^2")


def lie_poisson_system(xi=(0.0, 0.0, 1.0)) -> PoissonSystem:
    return PoissonSystem(DUAL_SPACE, BivectorField(DUAL_SPACE, lie_poisson, "Lie-Poisson"), linear_function(xi, "H"))


# projective charts -----------------------------------------------------------------


def _scale_dual(s, mu):
    return [s * m for m in mu]


DUAL_SCALING = OneParamAction(Group.R_TIMES, _scale_dual, DUAL_SPACE, "dilation")


def projective_bundle(nu_index: int) -> ScalingBundle:
    """Chart ``ν^ℓ ≠ 0`` with coordinates ``ζ^ℓ/ν^ℓ`` for the other two basis vectors."""
    others = [i for i in range(3) if i != nu_index]
    names = tuple(f"r{i + 1}/{nu_index + 1}" for i in others)
    chart = Chart(f"P(so(3)*) mu{nu_index + 1} != 0", names)

    def project(mu):
        return [mu[i] / mu[nu_index] for i in others]

    def section(r):
        mu = [None, None, None]
        mu[nu_index] = 1.0 + 0.0 * r[0]
        mu[others[0]], mu[others[1]] = r[0], r[1]
        return mu

    q = QuotientChart(DUAL_SPACE, chart, project, section, f"projectivize along mu{nu_index + 1}")
    F = ScalarField(DUAL_SPACE, lambda mu: mu[nu_index], f"mu{nu_index + 1}")
    return ScalingBundle(q, DUAL_SCALING, F)


def symbol_closed_form(bundle: ScalingBundle, nu_index: int, xi) -> VectorField:
    """``X(r(ζ,ν)) = (ζ^ℓ [ν,ξ]^ℓ − ν^ℓ [ζ,ξ]^ℓ) / (ν^ℓ)²`` evaluated on the section."""
    xi = np.asarray(xi, dtype=float)
    nu = BASIS[nu_index]
    zetas = [BASIS[i] for i in range(3) if i != nu_index]
    q = bundle.quotient

    def field(r):
        mu = q.section_raw(r)
        nu_l = pairing(mu, nu)
        nu_xi = pairing(mu, lie_bracket(nu, xi))
        return [(pairing(mu, z) * nu_xi - nu_l * pairing(mu, lie_bracket(z, xi))) / nu_l**2 for z in zetas]

    return VectorField(q.base, field, f"symbol of h_{xi.tolist()}")


def section_of(bundle: ScalingBundle, xi) -> ScalarField:
    """Trivialized section ``h_ξ = ξ^ℓ / F`` on the projective chart."""
    xi = np.asarray(xi, dtype=float)
    q = bundle.quotient

    def h(r):
        mu = q.section_raw(r)
        return pairing(mu, xi) / bundle.F.fn(mu)

    return ScalarField(q.base, h, f"h_{xi.tolist()}")


def build_atlas(system: PoissonSystem, bundles) -> KirillovAtlas:
    """Jacobi reductions on each chart glued by ``a_ij = F_j / F_i``."""
    charts = tuple(reduce_poisson_by_scaling(system, b) for b in bundles)
    transitions = {}
    for i, j in product(range(len(bundles)), repeat=2):
        if i == j:
            continue
        bi, bj = bundles[i], bundles[j]

        def change(r, bi=bi, bj=bj):
            return bj.quotient.project_raw(bi.quotient.section_raw(r))

        def factor(r, bi=bi, bj=bj):
            mu = bi.quotient.section_raw(r)
            return bj.F.fn(mu) / bi.F.fn(mu)

        def overlap(r, bi=bi, bj=bj):
            return abs(float(bj.F.fn(bi.quotient.section_raw(np.asarray(r, dtype=float))))) > 1e-3

        transitions[(i, j)] = ChartTransition(ScalarField(bi.base, factor, f"a_{i}{j}"), change, overlap)
    return KirillovAtlas(charts, transitions)


# T*SO(3) ---------------------------------------------------------------------------


def rotation_matrix(q):
    """``Rz(a) Ry(b) Rx(c)`` as nested lists."""
    a, b, c = q
    ca, sa, cb, sb, cc, sc = cos(a), sin(a), cos(b), sin(b), cos(c), sin(c)
    return [
        [cb * ca, sc * sb * ca - cc * sa, cc * sb * ca + sc * sa],
        [cb * sa, sc * sb * sa + cc * ca, cc * sb * sa - sc * ca],
        [-sb, sc * cb, cc * cb],
    ]


def euler_angles(m):
    return [arctan2(m[1][0], m[0][0]), arcsin(-m[2][0]), arctan2(m[2][1], m[2][2])]


def axis_rotation(axis: int, t):
    c, s = cos(t), sin(t)
    i, j = [(1, 2), (2, 0), (0, 1)][axis]
    m = [[1.0 if r == k else 0.0 for k in range(3)] for r in range(3)]
    m[i][i], m[i][j], m[j][i], m[j][j] = c, -s, s, c
    return m


def _matmul3(x, y):
    return [[sum(x[r][k] * y[k][col] for k in range(3)) for col in range(3)] for r in range(3)]


def body_momentum(x):
    """``μ = B(q)^{-T} p`` in closed form."""
    a, b, c, pa, pb, pc = x
    cb, sb, cc, sc = cos(b), sin(b), cos(c), sin(c)
    u = (pa + sb * pc) / cb
    return [pc, sc * u + cc * pb, cc * u - sc * pb]


def canonical_momentum(q, mu):
    """``p = B(q)^T μ``."""
    a, b, c = q
    cb, sb, cc, sc = cos(b), sin(b), cos(c), sin(c)
    m1, m2, m3 = mu
    return [-sb * m1 + cb * sc * m2 + cb * cc * m3, cc * m2 - sc * m3, m1]


def body_rate_matrix(q) -> np.ndarray:
    a, b, c = (float(v) for v in q)
    return np.array([
        [-np.sin(b), 0.0, 1.0],
        [np.cos(b) * np.sin(c), np.cos(c), 0.0],
        [np.cos(b) * np.cos(c), -np.sin(c), 0.0],
    ])


def _euler_ok(x) -> bool:
    return abs(x[1]) < np.pi / 2 - GIMBAL_MARGIN


def _total_ok(x) -> bool:
    return _euler_ok(x) and float(body_momentum(x)[2]) != 0.0


TOTAL = Chart("T*SO(3)", ("a", "b", "c", "pa", "pb", "pc"), (True, False, True, False, False, False), _total_ok)
CONTACT = Chart("SO(3) x P(so(3)*)", ("a", "b", "c", "r1", "r2"), (True, False, True, False, False), _euler_ok)
FINAL_B = Chart("P(so(3)*) via contact", ("r1", "r2"))


def left_rotation(axis: int) -> OneParamAction:
    def act(t, x):
        q = list(x[:3])
        mu = body_momentum(x)
        q2 = euler_angles(_matmul3(axis_rotation(axis, t), rotation_matrix(q)))
        return q2 + canonical_momentum(q2, mu)

    return OneParamAction(Group.CIRCLE, act, TOTAL, f"left rotation about e{axis + 1}")


def _scale_momenta(s, x):
    return list(x[:3]) + [s * p for p in x[3:]]


def random_homogeneous_mu(rng):
    """``ξ^ℓ + μᵀAμ / μ₃``: degree one for every nonzero scale, needs ``μ₃ ≠ 0``."""
    xi = rng.normal(size=3)
    a = rng.normal(size=(3, 3)) * 0.5

    def f(mu):
        quad = sum(a[i, j] * mu[i] * mu[j] for i in range(3) for j in range(3))
        return pairing(mu, xi) + quad / mu[2]

    return f


def build_so3(xi=(0.0, 0.0, 1.0)) -> ExampleSuite:
    xi = np.asarray(xi, dtype=float)
    lp = lie_poisson_system(xi)
    bundles = tuple(projective_bundle(k) for k in (2, 0, 1))
    atlas = build_atlas(lp, bundles)
    main = bundles[0]

    omega_matrix = canonical_form(3)
    H = ScalarField(TOTAL, lambda x: pairing(body_momentum(x), xi), "xi^l")
    system = SymplecticSystem(TOTAL, TwoFormField(TOTAL, lambda x: omega_matrix, "canonical"), H)
    F = ScalarField(TOTAL, lambda x: body_momentum(x)[2], "mu3")
    scaling_q = QuotientChart(
        TOTAL, CONTACT,
        lambda x: list(x[:3]) + [body_momentum(x)[0] / body_momentum(x)[2], body_momentum(x)[1] / body_momentum(x)[2]],
        lambda y: list(y[:3]) + canonical_momentum(y[:3], [y[3], y[4], 1.0 + 0.0 * y[3]]),
        "body momentum direction",
    )
    scaling = ScalingBundle(scaling_q, OneParamAction(Group.R_TIMES, _scale_momenta, TOTAL, "momentum scaling"), F)
    standard_q = QuotientChart(
        TOTAL, DUAL_SPACE, body_momentum,
        lambda mu: [0.0 * mu[0]] * 3 + canonical_momentum([0.0, 0.0, 0.0], mu),
        "left trivialization",
    )
    contact_q = QuotientChart(
        CONTACT, FINAL_B, lambda y: [y[3], y[4]], lambda r: [0.0 * r[0]] * 3 + [r[0], r[1]], "forget attitude"
    )
    pair = CompatiblePair(system, scaling, tuple(left_rotation(k) for k in range(3)), standard_q,
                          main.quotient, contact_q, "so3")

    def sample_total(rng, n):
        q = np.column_stack([rng.uniform(0, TWO_PI, n), rng.uniform(-0.6, 0.6, n), rng.uniform(0, TWO_PI, n)])
        mu = sample_dual(rng, n)
        return np.array([list(qq) + list(body_rate_matrix(qq).T @ m) for qq, m in zip(q, mu)])

    def sample_dual(rng, n):
        mu = rng.uniform(-1.0, 1.0, size=(n, 3))
        mu[:, 2] = rng.uniform(0.5, 1.5, n) * rng.choice([-1.0, 1.0], n)
        return mu

    def sample_contact(rng, n):
        return np.column_stack([rng.uniform(0, TWO_PI, n), rng.uniform(-0.6, 0.6, n), rng.uniform(0, TWO_PI, n),
                                rng.uniform(-1.5, 1.5, (n, 2))])

    def sample_projective(rng, n):
        return rng.uniform(-1.5, 1.5, size=(n, 2))

    def random_invariant(rng) -> ScalarField:
        f = random_homogeneous_mu(rng)
        return ScalarField(TOTAL, lambda x: f(body_momentum(x)), "random invariant")

    def random_dual_homogeneous(rng) -> ScalarField:
        f = random_homogeneous_mu(rng)
        return ScalarField(DUAL_SPACE, f, "random homogeneous")

    closed = {
        "lie_poisson": lp,
        "symbol": symbol_closed_form(main, 2, xi),
        "section": section_of(main, xi),
        "casimir": casimir(),
    }
    samplers = {
        "total": sample_total,
        "orbit": sample_dual,
        "dual": sample_dual,
        "contact": sample_contact,
        "final_a": sample_projective,
        "final_b": sample_projective,
    }
    extras = {
        "xi": xi,
        "mu0": np.array([0.3, 0.4, 1.2]),
        "atlas": atlas,
        "projective_bundles": bundles,
        "projective_nu": (2, 0, 1),
        "random_dual_homogeneous": random_dual_homogeneous,
        "charts": {"total": TOTAL, "orbit": DUAL_SPACE, "contact": CONTACT,
                   "final_a": main.base, "final_b": FINAL_B},
    }
    return ExampleSuite("so3", pair, closed, samplers, random_invariant, extras)
