from __future__ import annotations

import cmath
import math
from fractions import Fraction as Fr

import numpy as np
import pytest

from stagechain.dde import simulate
from stagechain.errors import EquilibriumAbsent, NoInteriorEquilibrium
from stagechain.linstab import (
    boundary_spectrum, char_coeff_derivatives, char_coeffs, characteristic_matrix, jacobians,
    routh_hurwitz_tau0, verdict_for,
)
from stagechain.model import BOUNDARY_PARAMS, REFERENCE_PARAMS, existence_thresholds, interior_coords

P = REFERENCE_PARAMS
TAU_BAR = existence_thresholds(P).tau_bar


def exact_coeffs_tau0():
    b1, c1, c2, d1, d3, a1 = Fr(1), Fr(1), Fr(3, 5), Fr(1, 20), Fr(3, 10), Fr(2)
    al1, al2 = Fr(6, 5), Fr(13, 10)
    y = d3 / al2
    x = (a1 * al2 - c1 * d3) / (b1 * al2)
    z = (al1 * x - d1) / c2
    return [b1 * x + d3, b1 * d3 * x + c1 * al1 * x * y, c1 * d3 * al1 * x * y, -al2 * y,
            al2 * y * (c2 * z - b1 * x), al2 * x * y * (b1 * c2 * z - c1 * al1 * y)]


def test_coefficients_exact_at_zero_delay():
    cc = char_coeffs(P, 0.0)
    got = [cc.A1, cc.A2, cc.A3, cc.B1, cc.B2, cc.B3]
    assert got == pytest.approx([float(v) for v in exact_coeffs_tau0()], rel=1e-14)
    assert got == pytest.approx([2.06923, 1.02071, 0.146982, -0.3, 0.091154, 0.953343], abs=1e-5)


@pytest.mark.parametrize("tau", [0.0, 0.4, 1.3, 2.7, 5.0])
def test_quasi_polynomial_equals_determinant(tau):
    cc = char_coeffs(P, tau)
    J0, J1 = jacobians(P, interior_coords(P, tau), tau)
    for lam in (0.3 + 0.2j, -0.7 + 1.5j, 2.0, 0.05j):
        det = np.linalg.det(characteristic_matrix(lam, J0, J1, tau))
        assert abs(det - cc(lam)) < 1e-12 * max(1.0, abs(det))


def test_b1_identity_over_tau():
    for tau in np.linspace(0, 0.99 * TAU_BAR, 10):
        assert char_coeffs(P, tau).B1 == pytest.approx(-P.d3, rel=1e-12)


def test_no_interior_past_threshold():
    with pytest.raises(NoInteriorEquilibrium):
        char_coeffs(P, TAU_BAR + 0.01)


def test_coefficient_derivatives_match_differences():
    tau, h = 1.2, 1e-6
    d = char_coeff_derivatives(P, tau)
    hi, lo = char_coeffs(P, tau + h), char_coeffs(P, tau - h)
    for name in ("A1", "A2", "A3", "B1", "B2", "B3"):
        fd = (getattr(hi, name) - getattr(lo, name)) / (2 * h)
        assert getattr(d, name) == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_coefficients_continuous():
    grid = np.linspace(0, 0.999 * TAU_BAR, 4000)
    vals = np.array([[*char_coeffs(P, t).A, *char_coeffs(P, t).B] for t in grid])
    assert np.max(np.abs(np.diff(vals, axis=0))) < 1e-2


def test_routh_hurwitz_reference():
    rh = routh_hurwitz_tau0(P)
    x, y, _ = interior_coords(P, 0.0)
    assert rh.discriminant == pytest.approx(P.b1 * P.c1 * P.alpha1 * x * x * y, rel=1e-12)
    assert rh.discriminant == pytest.approx(0.86686, abs=1e-4)
    assert rh.verdict == "stable"
    assert rh.coefficients[0] == pytest.approx(P.b1 * x, rel=1e-12)


def test_prey_only_origin_is_saddle():
    sp = boundary_spectrum(P, "E0")
    assert sp.eigenvalues == (P.a1, -P.d1, -P.d3) and sp.verdict == "unstable"


def test_prey_only_equilibrium_factors():
    sp = boundary_spectrum(BOUNDARY_PARAMS, "E1")
    assert sp.eigenvalues == pytest.approx((-1.0, -0.3, -0.4), abs=1e-15)
    assert sp.verdict == "stable"
    p = BOUNDARY_PARAMS
    J0, J1 = jacobians(p, (p.a1 / p.b1, 0.0, 0.0), 0.7)
    for lam in sp.eigenvalues:
        assert abs(np.linalg.det(characteristic_matrix(lam, J0, J1, 0.7))) < 1e-12
    assert sorted(np.linalg.eigvals(J0 + J1).real) == pytest.approx(sorted(sp.eigenvalues))


@pytest.mark.parametrize("tau", [0.0, 1.0, 6.0])
def test_predator_free_equilibrium(tau):
    sp = boundary_spectrum(P, "E2", tau)
    l1, l2 = sp.eigenvalues
    assert l1 == pytest.approx(-0.0208333 - 0.312222j, abs=1e-5)
    assert l2 == pytest.approx(np.conj(l1))
    assert sp.indicator == pytest.approx(-0.3 + 2.54583 * math.exp(-0.4 * tau), abs=1e-5)
    lam, gain = sp.delayed_root, sp.indicator + P.d3
    assert abs(lam + P.d3 - gain * math.exp(-lam * tau)) < 1e-10
    assert (lam > 0) == (sp.indicator > 0)
    assert sp.verdict == ("stable" if sp.indicator < 0 else "unstable")


def test_predator_free_absent_when_h1_fails():
    with pytest.raises(EquilibriumAbsent):
        boundary_spectrum(BOUNDARY_PARAMS, "E2")


def test_marginal_verdict():
    assert verdict_for([-1.0, 1e-10]) == "marginal"
    assert verdict_for([-1.0, -1e-3]) == "stable"
    assert verdict_for([-1.0, 1e-3]) == "unstable"


def test_predator_free_verdict_agrees_with_simulation():
    # past the threshold the predator dies out and (x, y) spirals into E2
    p = P.with_tau(5.6)
    sp = boundary_spectrum(p, "E2")
    assert sp.verdict == "stable"
    tr = simulate(p, (0.05, 1.9, 0.0, 0.1), t_end=3000)
    assert np.max(np.abs(tr.final[[0, 1, 3]] - (0.0416667, 1.95833, 0.0))) < 1e-3
