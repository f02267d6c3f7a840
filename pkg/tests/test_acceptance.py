"""Acceptance criteria 1-9, each at its stated tolerance.

Every test records a one-line PASS/FAIL summary (shown in the terminal
summary) before asserting, so failing criteria are reported, not hidden.
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from stagechain.dde import check_boundedness, check_positivity, simulate
from stagechain.hopf import analyze_crossing
from stagechain.linstab import boundary_spectrum, char_coeffs
from stagechain.model import (
    CHAOS_PARAMS, REFERENCE_PARAMS, compute_equilibria, equilibrium_residual, existence_thresholds,
)
from stagechain.orbit import classify_orbit, largest_lyapunov
from stagechain.switch import find_switches

P = REFERENCE_PARAMS
HORIZON = 3000.0
REGIME_TAUS = (0.0, 0.742, 0.75, 1.56, 1.57)
REGIME_EXPECTED = ("Equilibrium", "Equilibrium", "Periodic", "Periodic", "Equilibrium")
# published reference magnitudes for Re C1(0) at the two crossings (sign is the criterion)
REFERENCE_RE_C1 = (-3.9481, 9.3706)


@pytest.fixture(scope="module")
def switches():
    return find_switches(P)


@pytest.fixture(scope="module")
def runs(switches):
    """Every trajectory the criteria look at, keyed by label."""
    cases = {f"tau={t}": P.with_tau(t) for t in REGIME_TAUS}
    cases["onset"] = P.with_tau(switches.sn_zeros[0].tau + 0.01)
    cases["chaos"] = CHAOS_PARAMS
    cases["tau=0.3"] = P.with_tau(0.3)
    return {k: simulate(p, t_end=HORIZON) for k, p in cases.items()}


def test_criterion_1_thresholds(report_line):
    th = existence_thresholds(P)
    ok = abs(th.tau_bar - 5.34608) <= 1e-3 and abs(th.tau_cr - 5.34608) <= 1e-3
    report_line(1, ok, f"tau_bar = {th.tau_bar:.6f}, tau_cr = {th.tau_cr:.6f} (target 5.34608 +- 1e-3)")
    assert ok


def test_criterion_2_predator_free_equilibrium(report_line):
    e2 = {e.kind: e for e in compute_equilibria(P)}["E2"]
    l1, l2 = boundary_spectrum(P, "E2").eigenvalues
    target = np.array([0.0416667, 1.95833, 0.0])
    ok = (np.max(np.abs(np.array(e2.coords) - target)) <= 1e-5
          and abs(l1 - (-0.0208333 - 0.312222j)) <= 1e-5 and abs(l2 - (-0.0208333 + 0.312222j)) <= 1e-5)
    report_line(2, ok, f"E2 = ({e2.x:.7f}, {e2.y:.5f}, {e2.z2:g}), lambda = {l1.real:.7f} +- {abs(l1.imag):.6f}i")
    assert ok


def test_criterion_3_switch_detection(report_line, switches):
    zeros = switches.sn_zeros
    s0 = [z for z in zeros if z.n == 0]
    regions = switches.branch_regions
    one_branch = regions[0][2] == 1 and abs(regions[0][1] - 2.59955) <= 0.05
    ok = (len(s0) == 2 and abs(s0[0].tau - 0.743) <= 0.01 and abs(s0[1].tau - 1.568) <= 0.01
          and s0[0].delta == 1 and s0[1].delta == -1 and one_branch)
    found = ", ".join(f"{z.tau:.5f} (delta {z.delta:+d})" for z in s0)
    report_line(3, ok, f"S0 zeros {found}; one branch on [0, {regions[0][1]:.5f}); "
                       "targets 0.743 / 1.568 +- 0.01")
    assert len(s0) == 2 and one_branch
    assert [z.delta for z in s0] == [1, -1]
    assert abs(s0[0].tau - 0.743) <= 0.01 and abs(s0[1].tau - 1.568) <= 0.01


def test_criterion_4_regimes(report_line, runs):
    got = [classify_orbit(runs[f"tau={t}"], compute_lle=False).kind for t in REGIME_TAUS]
    ok = tuple(got) == REGIME_EXPECTED
    detail = ", ".join(f"tau={t}: {g}{'' if g == e else f' (expected {e})'}"
                       for t, g, e in zip(REGIME_TAUS, got, REGIME_EXPECTED))
    report_line(4, ok, detail)
    assert ok


def test_criterion_5_hopf_direction(report_line, switches):
    reps = [analyze_crossing(P, z.tau, z.omega) for z in switches.sn_zeros]
    signs = [np.sign(r.C1_0.real) for r in reps]
    ok = len(reps) == 2 and signs == [-1, 1]
    detail = "; ".join(f"Re C1({r.tau_c:.4f}) = {r.C1_0.real:+.4f} (reference {ref:+.4f})"
                       for r, ref in zip(reps, REFERENCE_RE_C1))
    report_line(5, ok, detail)
    assert ok


def test_criterion_6_onset_period(report_line, switches, runs):
    z = switches.sn_zeros[0]
    oc = classify_orbit(runs["onset"], compute_lle=False)
    target = 2 * math.pi / z.omega
    ok = oc.kind == "Periodic" and abs(oc.period - target) <= 0.05 * target
    report_line(6, ok, f"period {oc.period} vs 2 pi / omega = {target:.4f} at tau = {z.tau + 0.01:.4f}")
    assert ok


def test_criterion_7_lyapunov(report_line):
    chaos = largest_lyapunov(CHAOS_PARAMS, horizon=HORIZON)
    stable = largest_lyapunov(P, 0.3, horizon=HORIZON)
    ok = chaos > 0 and stable < 0
    report_line(7, ok, f"lle(chaos set, tau=1.5) = {chaos:.4f}, lle(reference set, tau=0.3) = {stable:.4f}")
    assert ok


def test_criterion_8_invariants(report_line, switches, runs):
    pos = all(check_positivity(tr).ok for tr in runs.values())
    bnd = all(check_boundedness(tr).ok for tr in runs.values())
    resid = max(equilibrium_residual(e, P.with_tau(t))
                for t in (0.0, *REGIME_TAUS, 3.0) for e in compute_equilibria(P.with_tau(t)) if e.exists)
    root = max(abs(char_coeffs(P, z.tau)(1j * z.omega)) for z in switches.sn_zeros)
    agree = all(np.sign(analyze_crossing(P, z.tau, z.omega).lambda_prime.real) == z.delta
                for z in switches.sn_zeros)
    ok = pos and bnd and resid < 1e-10 and root < 1e-7 and agree
    report_line(8, ok, f"positivity {pos}, boundedness {bnd} over {len(runs)} runs; "
                       f"max equilibrium residual {resid:.1e}; max root residual {root:.1e}; "
                       f"sign Re lambda' = delta: {agree}")
    assert ok


def test_criterion_9_integrator_order(report_line):
    p = P.with_tau(1.0)

    def hist(th):
        return (1.0 + 0.3 * math.sin(th), 0.8 + 0.2 * math.cos(2 * th), 0.0, 1.2 - 0.1 * th)

    ends = [simulate(p, hist, t_end=1.0, step=h).final for h in (0.2, 0.1, 0.05)]
    ratio = np.max(np.abs(ends[0] - ends[2])) / np.max(np.abs(ends[1] - ends[2]))
    ok = 8 <= ratio <= 32
    report_line(9, ok, f"error ratio under step halving on [0, tau] = {ratio:.2f} (target [8, 32])")
    assert ok
