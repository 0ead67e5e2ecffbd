"""Fiberwise-linear Hamiltonians ``H = Y^i(q) p_i`` on a cotangent bundle chart.

Coordinates ``(q¹…qⁿ, p₁…pₙ)`` on the open set ``p_{i0} ≠ 0``.  The scaling
``p ↦ s p`` (ℝ^×) with scaling function ``F = p_{i0}`` projects onto
``(q, p̃)`` with ``p̃_j = p_j / p_{i0}`` for ``j ≠ i0``.  There is no standard
symmetry, so both pipelines consist of the scaling step alone.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from ..dual import sin
from ..numcore import Chart, ScalarField, TwoFormField, VectorField, jacobian
from ..reduction import CompatiblePair
from ..structures import SymplecticSystem
from ..symmetry import Group, OneParamAction, QuotientChart, ScalingBundle, identity_quotient
from . import ExampleSuite


def canonical_form(n: int) -> np.ndarray:
    """``ω(∂_{q^i}, ∂_{p_i}) = 1``, the sign for which ``H = p`` generates ``∂_q``."""
    w = np.zeros((2 * n, 2 * n))
    w[:n, n:] = np.eye(n)
    w[n:, :n] = -np.eye(n)
    return w


def default_coefficients(n: int) -> Callable:
    """``Y = q¹ ∂_{q¹}`` plus a nonlinear term in the remaining directions."""

    def Y(q):
        out = [q[0]]
        for k in range(1, n):
            out.append(1.0 + 0.5 * sin(q[0]) * q[k])
        return out

    return Y


def linear_coefficients(n: int) -> Callable:
    """``Y = q¹ ∂_{q¹}`` only."""
    return lambda q: [q[0]] + [0.0 * q[0]] * (n - 1)


def build_linear_ctq(n: int = 2, i0: int = 2, Y: Optional[Callable] = None) -> ExampleSuite:
    """Suite for ``H = Y^ℓ`` on ``T*ℝⁿ``; ``i0`` is 1-based, ``Y(q)`` returns ``n`` components."""
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    if not 1 <= i0 <= n:
        raise ValueError(f"chart index must lie in 1..{n}, got {i0}")
    Y = default_coefficients(n) if Y is None else Y
    k = i0 - 1
    others = [j for j in range(n) if j != k]

    q_names = tuple(f"q{i + 1}" for i in range(n))
    total = Chart(
        f"T*R^{n} (p{i0} != 0)",
        q_names + tuple(f"p{i + 1}" for i in range(n)),
        domain_check=lambda x: x[n + k] != 0,
    )
    base = Chart(f"P(T*R^{n}) chart {i0}", q_names + tuple(f"pt{j + 1}" for j in others))

    def hamiltonian(x):
        coeffs = Y(x[:n])
        return sum(coeffs[i] * x[n + i] for i in range(n))

    def scale(s, x):
        return list(x[:n]) + [s * p for p in x[n:]]

    def project(x):
        return list(x[:n]) + [x[n + j] / x[n + k] for j in others]

    def section(y):
        p = [None] * n
        p[k] = 1.0 + 0.0 * y[0]
        for idx, j in enumerate(others):
            p[j] = y[n + idx]
        return list(y[:n]) + p

    def reduced_section(y):
        coeffs = Y(y[:n])
        return coeffs[k] + sum(coeffs[j] * y[n + idx] for idx, j in enumerate(others))

    def projected_field(y):
        """Displayed local expression of the projected Hamiltonian field."""
        q = y[:n]
        coeffs = list(Y(q))
        dY = jacobian(lambda z: Y(z), q)
        pt = {j: y[n + idx] for idx, j in enumerate(others)}
        out = list(coeffs)
        for i in others:
            v = pt[i] * dY[k, k] - dY[k, i]
            for j in others:
                v = v + pt[j] * (pt[i] * dY[j, k] - dY[j, i])
            out.append(v)
        return out

    H = ScalarField(total, hamiltonian, "Y^l")
    omega_matrix = canonical_form(n)
    system = SymplecticSystem(total, TwoFormField(total, lambda x: omega_matrix, "canonical"), H)
    action = OneParamAction(Group.R_TIMES, scale, total, "fiber scaling")
    F = ScalarField(total, lambda x: x[n + k], f"p{i0}")
    quotient = QuotientChart(total, base, project, section, "projectivize fibers")
    bundle = ScalingBundle(quotient, action, F)
    pair = CompatiblePair(system, bundle, (), identity_quotient(total), quotient, identity_quotient(base),
                          f"linear n={n} i0={i0}")

    def sample_total(rng, m):
        q = rng.uniform(-1.5, 1.5, size=(m, n))
        p = rng.uniform(0.4, 2.0, size=(m, n)) * rng.choice([-1.0, 1.0], size=(m, n))
        return np.hstack([q, p])

    def sample_base(rng, m):
        return np.hstack([rng.uniform(-1.5, 1.5, size=(m, n)), rng.uniform(-2.0, 2.0, size=(m, n - 1))])

    def random_invariant(rng) -> ScalarField:
        """``Z^ℓ`` for a random vector field ``Z`` with quadratic coefficients."""
        c = rng.normal(size=(n, 1 + n + n * n))

        def Z(q):
            feats = [1.0] + list(q) + [q[a] * q[b] for a in range(n) for b in range(n)]
            return [sum(c[i, m] * feats[m] for m in range(len(feats))) for i in range(n)]

        return lifted_function(total, n, Z)

    closed = {
        "reduced_section": ScalarField(base, reduced_section, "h"),
        "projected_field": VectorField(base, projected_field, "projected field"),
    }
    samplers = {"total": sample_total, "orbit": sample_total, "contact": sample_base,
                "final_a": sample_base, "final_b": sample_base}
    x0 = np.concatenate([np.linspace(0.5, -0.3, n), np.linspace(0.8, 1.2, n)])
    extras = {"n": n, "i0": i0, "Y": Y, "x0": x0, "verify_x0": x0, "charts": {"total": total, "final_a": base, "final_b": base}}
    return ExampleSuite("linear", pair, closed, samplers, random_invariant, extras)


def lifted_function(chart: Chart, n: int, Z: Callable, name: str = "Z^l") -> ScalarField:
    """Fiberwise-linear function ``Z^ℓ(q, p) = Z^i(q) p_i``."""
    return ScalarField(chart, lambda x: sum(Z(x[:n])[i] * x[n + i] for i in range(n)), name)


__all__: Sequence[str] = ["build_linear_ctq", "canonical_form", "default_coefficients", "linear_coefficients",
                          "lifted_function"]
