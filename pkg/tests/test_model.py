from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stagechain.errors import NegativeDelay, NonPositiveRate
from stagechain.model import (
    BOUNDARY_PARAMS, REFERENCE_PARAMS, RATE_NAMES, ModelParams, compute_equilibria, equilibrium,
    equilibrium_residual, existence_thresholds, h1_holds, h2_holds, interior_coords, rhs_full,
    rhs_reduced, validate_params, z1_steady,
)

rates = st.floats(0.05, 5.0)


@st.composite
def params(draw, tau=st.floats(0.0, 6.0)):
    return ModelParams(**{n: draw(rates) for n in RATE_NAMES}, tau=draw(tau))


def test_reference_set_valid():
    p = validate_params(dict(a1=2, b1=1, c1=1, c2=0.6, d1=0.05, d2=0.4, d3=0.3,
                             alpha1=1.2, alpha2=1.3, tau=0))
    assert p == REFERENCE_PARAMS


def test_zero_rate_rejected_with_name():
    raw = {n: getattr(REFERENCE_PARAMS, n) for n in RATE_NAMES}
    raw["a1"] = 0.0
    with pytest.raises(NonPositiveRate) as exc:
        validate_params(raw)
    assert exc.value.names == ["a1"]


def test_all_bad_rates_collected():
    with pytest.raises(NonPositiveRate) as exc:
        ModelParams(a1=-1, b1=1, c1=0, c2=1, d1=1, d2=1, d3=1, alpha1=1, alpha2=1)
    assert exc.value.names == ["a1", "c1"]


def test_negative_delay_rejected():
    with pytest.raises(NegativeDelay):
        REFERENCE_PARAMS.with_tau(-0.1)


def test_rhs_origin_and_prey_only():
    z = np.zeros(4)
    assert np.all(rhs_full(z, z, REFERENCE_PARAMS) == 0)
    d = rhs_full(np.array([1.0, 0, 0, 0]), np.array([3.0, 0, 2.0, 5.0]), REFERENCE_PARAMS)
    assert np.allclose(d, [REFERENCE_PARAMS.a1 - REFERENCE_PARAMS.b1, 0, 0, 0], atol=0)


@pytest.mark.parametrize("tau", [0.0, 0.75, 3.0])
def test_interior_state_is_stationary(tau):
    p = REFERENCE_PARAMS.with_tau(tau)
    e3 = equilibrium(p, "E3")
    s = e3.full_state()
    assert np.max(np.abs(rhs_full(s, s, p))) < 1e-12
    c = np.array(e3.coords)
    assert np.max(np.abs(rhs_reduced(c, c, p))) < 1e-12


def test_boundary_values():
    eqs = {e.kind: e for e in compute_equilibria(REFERENCE_PARAMS)}
    assert eqs["E0"].exists and eqs["E0"].coords == (0.0, 0.0, 0.0)
    assert eqs["E2"].coords == pytest.approx((0.0416667, 1.95833, 0.0), abs=1e-5)
    assert eqs["E3"].coords == pytest.approx((1.76923, 0.230769, 3.45513), abs=1e-5)


def test_thresholds_reference():
    th = existence_thresholds(REFERENCE_PARAMS)
    assert th.tau_bar == pytest.approx(5.34608, abs=1e-4)
    assert th.tau_cr == pytest.approx(5.34608, abs=1e-4)
    assert th.h2(5.3) and not th.h2(5.4)


def test_thresholds_absent_when_h1_fails():
    th = existence_thresholds(BOUNDARY_PARAMS)
    assert not th.h1 and th.tau_bar is None and th.tau_cr is None and th.reason
    flags = {e.kind: e.exists for e in compute_equilibria(BOUNDARY_PARAMS)}
    assert flags == {"E0": True, "E1": True, "E2": False, "E3": False}


def test_interior_monotone_in_tau():
    tb = existence_thresholds(REFERENCE_PARAMS).tau_bar
    xs, ys, zs = np.array([interior_coords(REFERENCE_PARAMS, t) for t in np.linspace(0, tb, 200)[:-1]]).T
    assert np.all(np.diff(xs) < 0) and np.all(np.diff(ys) > 0) and np.all(np.diff(zs) < 0)


def test_z1_steady_matches_integral():
    p = REFERENCE_PARAMS.with_tau(2.0)
    e3 = equilibrium(p, "E3")
    expected = p.alpha2 * e3.y * e3.z2 * (1 - math.exp(-p.d2 * p.tau)) / p.d2
    assert z1_steady(e3.y, e3.z2, p) == pytest.approx(expected, rel=1e-14)


@settings(max_examples=300, deadline=None)
@given(params())
def test_h2_at_zero_implies_h1(p):
    if h2_holds(p, 0.0):
        assert h1_holds(p)


@settings(max_examples=300, deadline=None)
@given(params())
def test_thresholds_coincide(p):
    th = existence_thresholds(p)
    if th.tau_bar is not None:
        assert th.tau_cr == pytest.approx(th.tau_bar, rel=1e-12)
        assert h2_holds(p, 0.999 * th.tau_bar) and not h2_holds(p, 1.001 * th.tau_bar)


@settings(max_examples=200, deadline=None)
@given(params())
def test_existing_equilibria_have_small_residual(p):
    for e in compute_equilibria(p):
        if e.exists:
            scale = max(1.0, *(abs(c) for c in e.coords))
            assert equilibrium_residual(e, p) < 1e-10 * scale ** 2
