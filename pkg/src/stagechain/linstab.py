"""Linearisation and local-stability verdicts.

The interior characteristic function is

    P(lam) + Q(lam) exp(-lam tau),
    P = lam^3 + A1 lam^2 + A2 lam + A3,   Q = B1 lam^2 + B2 lam + B3,

with coefficients that depend on ``tau`` through the interior equilibrium.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import lambertw

from .errors import EquilibriumAbsent, NoInteriorEquilibrium, NumericalError
from .model import ModelParams, compute_equilibria, h2_holds, interior_coords

MARGINAL_TOL = 1e-9


def jacobians(p: ModelParams, coords, tau: float | None = None):
    """Instantaneous and lagged Jacobians ``(J0, J1)`` of the reduced system at ``coords``."""
    tau = p.tau if tau is None else tau
    x, y, z = coords
    g = p.alpha2 * math.exp(-p.d2 * tau)
    J0 = np.array([
        [p.a1 - 2 * p.b1 * x - p.c1 * y, -p.c1 * x, 0.0],
        [p.alpha1 * y, p.alpha1 * x - p.d1 - p.c2 * z, -p.c2 * y],
        [0.0, 0.0, -p.d3],
    ])
    J1 = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, g * z, g * y]])
    return J0, J1


def characteristic_matrix(lam: complex, J0, J1, tau: float) -> np.ndarray:
    return lam * np.eye(3) - J0 - J1 * cmath.exp(-lam * tau)


# -- interior equilibrium -------------------------------------------------------


@dataclass(frozen=True)
class CharCoefficients:
    tau: float
    A1: float
    A2: float
    A3: float
    B1: float
    B2: float
    B3: float

    @property
    def A(self):
        return (self.A1, self.A2, self.A3)

    @property
    def B(self):
        return (self.B1, self.B2, self.B3)

    def P(self, lam):
        return ((lam + self.A1) * lam + self.A2) * lam + self.A3

    def Q(self, lam):
        return (self.B1 * lam + self.B2) * lam + self.B3

    def __call__(self, lam, tau: float | None = None):
        """Characteristic function at ``lam``; ``tau`` in the exponential defaults to ``self.tau``."""
        tau = self.tau if tau is None else tau
        return self.P(lam) + self.Q(lam) * np.exp(-lam * tau)

    def dlam(self, lam, tau: float | None = None):
        tau = self.tau if tau is None else tau
        dP = (3 * lam + 2 * self.A1) * lam + self.A2
        dQ = 2 * self.B1 * lam + self.B2
        return dP + (dQ - tau * self.Q(lam)) * np.exp(-lam * tau)


def _coeffs_from(p: ModelParams, x, y, z, e):
    A1 = p.b1 * x + p.d3
    A2 = p.b1 * p.d3 * x + p.c1 * p.alpha1 * x * y
    A3 = p.c1 * p.d3 * p.alpha1 * x * y
    B1 = -p.alpha2 * y * e
    B2 = p.alpha2 * y * (p.c2 * z - p.b1 * x) * e
    B3 = p.alpha2 * x * y * (p.b1 * p.c2 * z - p.c1 * p.alpha1 * y) * e
    return A1, A2, A3, B1, B2, B3


def char_coeffs(p: ModelParams, tau: float | None = None) -> CharCoefficients:
    tau = p.tau if tau is None else float(tau)
    if not h2_holds(p, tau):
        raise NoInteriorEquilibrium(f"H2 fails at tau={tau}: no interior equilibrium")
    x, y, z = interior_coords(p, tau)
    return CharCoefficients(tau, *_coeffs_from(p, x, y, z, math.exp(-p.d2 * tau)))


def char_coeff_derivatives(p: ModelParams, tau: float) -> CharCoefficients:
    """Analytic d/dtau of every coefficient (through x*, y*, z2* and e^{-d2 tau})."""
    char_coeffs(p, tau)
    g = math.exp(p.d2 * tau)
    e = 1.0 / g
    x, y, z = interior_coords(p, tau)
    dx = -p.c1 * p.d3 * p.d2 * g / (p.b1 * p.alpha2)
    dy = p.d2 * y
    dz = -p.c1 * p.d3 * p.alpha1 * p.d2 * g / (p.b1 * p.c2 * p.alpha2)
    de = -p.d2 * e
    a2 = p.alpha2
    dA1 = p.b1 * dx
    dA2 = p.b1 * p.d3 * dx + p.c1 * p.alpha1 * (dx * y + x * dy)
    dA3 = p.c1 * p.d3 * p.alpha1 * (dx * y + x * dy)
    dB1 = -a2 * (dy * e + y * de)
    u = p.c2 * z - p.b1 * x
    du = p.c2 * dz - p.b1 * dx
    dB2 = a2 * (dy * u * e + y * du * e + y * u * de)
    v = p.b1 * p.c2 * z - p.c1 * p.alpha1 * y
    dv = p.b1 * p.c2 * dz - p.c1 * p.alpha1 * dy
    dB3 = a2 * ((dx * y + x * dy) * v * e + x * y * dv * e + x * y * v * de)
    return CharCoefficients(tau, dA1, dA2, dA3, dB1, dB2, dB3)


@dataclass(frozen=True)
class RouthHurwitz:
    discriminant: float
    closed_form: float
    coefficients: tuple
    verdict: str


def routh_hurwitz_tau0(p: ModelParams) -> RouthHurwitz:
    """Routh-Hurwitz test of the undelayed interior cubic lam^3 + a lam^2 + b lam + c."""
    cc = char_coeffs(p, 0.0)
    a, b, c = cc.A1 + cc.B1, cc.A2 + cc.B2, cc.A3 + cc.B3
    disc = a * b - c
    x, y, _ = interior_coords(p, 0.0)
    closed = p.b1 * p.c1 * p.alpha1 * x * x * y
    if abs(disc - closed) > 1e-10 * max(abs(closed), 1e-300):
        raise NumericalError(f"Routh-Hurwitz discriminant {disc} != closed form {closed}")
    if min(a, b, c) > 0 and disc > 0:
        verdict = "stable"
    elif abs(disc) <= MARGINAL_TOL:
        verdict = "marginal"
    else:
        verdict = "unstable"
    return RouthHurwitz(disc, closed, (a, b, c), verdict)


# -- boundary equilibria --------------------------------------------------------


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a boundary equilibrium plus, for E2, its delayed branch.

    For E2 the decoupled z2 factor ``lam + d3 - alpha2 ybar e^{-d2 tau} e^{-lam tau}``
    is summarised by ``indicator = -d3 + alpha2 ybar e^{-d2 tau}`` (its sign decides
    stability for every tau) and by its dominant real root via Lambert W.
    """

    kind: str
    eigenvalues: tuple
    verdict: str
    indicator: float | None = None
    delayed_root: float | None = None


def verdict_for(real_parts) -> str:
    rp = np.asarray(real_parts, dtype=float)
    if np.any(rp > MARGINAL_TOL):
        return "unstable"
    if np.any(np.abs(rp) <= MARGINAL_TOL):
        return "marginal"
    return "stable"


def dominant_delayed_root(a: float, b: float, tau: float) -> float:
    """Rightmost root of ``lam + a = b exp(-lam tau)`` with ``b > 0``."""
    if tau == 0:
        return b - a
    return float((-a + lambertw(b * tau * math.exp(a * tau), 0) / tau).real)


def boundary_spectrum(p: ModelParams, which: str, tau: float | None = None) -> Spectrum:
    tau = p.tau if tau is None else float(tau)
    pt = p.with_tau(tau)
    eqs = {e.kind: e for e in compute_equilibria(pt)}
    if which not in ("E0", "E1", "E2"):
        raise ValueError(f"boundary equilibrium must be E0, E1 or E2, got {which!r}")
    e = eqs[which]
    if not e.exists:
        raise EquilibriumAbsent(f"{which} does not exist ({e.condition} fails)")
    if which == "E0":
        # lagged Jacobian vanishes at the origin; -d3, not +d3, is the z2 rate
        lams = (p.a1, -p.d1, -p.d3)
        return Spectrum("E0", lams, verdict_for(lams))
    if which == "E1":
        lams = (-p.a1, -p.d3, -p.d1 + p.a1 * p.alpha1 / p.b1)
        return Spectrum("E1", lams, verdict_for(lams))
    xb, yb = e.x, e.y
    # lam^2 + b1 xb lam + c1 alpha1 xb yb = 0
    bq, cq = p.b1 * xb, p.c1 * p.alpha1 * xb * yb
    disc = complex(bq * bq - 4 * cq)
    r = cmath.sqrt(disc)
    l1, l2 = (-bq - r) / 2, (-bq + r) / 2
    if l1.imag > 0:
        l1, l2 = l2, l1
    gain = p.alpha2 * yb * math.exp(-p.d2 * tau)
    indicator = -p.d3 + gain
    root = dominant_delayed_root(p.d3, gain, tau)
    verdict = verdict_for([l1.real, l2.real, indicator])
    return Spectrum("E2", (l1, l2), verdict, indicator, root)
