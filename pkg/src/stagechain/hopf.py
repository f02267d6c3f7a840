"""Direction and stability of the Hopf bifurcation at a critical delay.

Centre-manifold reduction in the Hassard-Kazarinoff-Wan style.  Time is rescaled
by the critical delay so the lag becomes 1; exponentials therefore carry the
product ``omega * tau_c`` while matrix entries carry ``omega`` alone (every
entry is divided through by ``tau_c``).

Notation: ``q(theta) = (1, alpha, beta) e^{i omega tau theta}`` is the
eigenvector of the generator, ``q*(s) = D (1, alpha*, beta*) e^{i omega tau s}``
the adjoint one, normalised by the bilinear form so <q*, q> = 1, <q*, q-bar> = 0.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotACrossing, SingularNormalizer, TransversalityFailure
from .linalg import gauss_solve
from .linstab import char_coeff_derivatives, char_coeffs, jacobians
from .model import ModelParams, interior_coords

log = logging.getLogger(__name__)


@dataclass
class HopfContext:
    tau_c: float
    omega_c: float
    alpha: complex
    beta: complex
    alpha_star: complex
    beta_star: complex
    Dbar: complex
    coords: tuple
    J0: np.ndarray = field(repr=False)
    J1: np.ndarray = field(repr=False)

    @property
    def q0(self) -> np.ndarray:
        return np.array([1.0, self.alpha, self.beta])

    @property
    def qstar0(self) -> np.ndarray:
        """``q*(0) = D (1, alpha*, beta*)``."""
        return np.conj(self.Dbar) * np.array([1.0, self.alpha_star, self.beta_star])

    @property
    def phase(self) -> float:
        return self.omega_c * self.tau_c

    @property
    def gain(self) -> float:
        """``alpha2 e^{-d2 tau_c}``, the lagged recruitment coefficient."""
        return self.J1[2, 2] / self.coords[1]


def bilinear_form(psi0, sigma: complex, phi0, rho: complex, J1, tau: float) -> complex:
    """<psi, phi> for psi(s) = psi0 e^{sigma s}, phi(theta) = phi0 e^{rho theta}.

    The generator's measure has a point mass ``tau * J1`` at theta = -1 (and the
    instantaneous part at 0, which the double integral does not see), so

        <psi, phi> = conj(psi0) . phi0 + conj(psi0) tau J1 phi0 e^{conj(sigma)} * I,
        I = int_{-1}^{0} e^{(conj(sigma) + rho) xi} d xi.
    """
    pb = np.conj(np.asarray(psi0, dtype=complex))
    k = np.conj(sigma) + rho
    integral = 1.0 if abs(k) < 1e-14 else (1.0 - cmath.exp(-k)) / k
    return complex(pb @ phi0 + (pb @ (tau * np.asarray(J1)) @ phi0) * cmath.exp(np.conj(sigma)) * integral)


def eigenvectors(p: ModelParams, tau_c: float, omega_c: float) -> HopfContext:
    cc = char_coeffs(p, tau_c)
    resid = abs(cc(1j * omega_c, tau_c))
    if resid > 1e-7:
        raise NotACrossing(f"characteristic residual {resid:.3e} at i*{omega_c}, tau={tau_c}")
    x, y, z = interior_coords(p, tau_c)
    J0, J1 = jacobians(p, (x, y, z), tau_c)
    w = omega_c
    e = p.alpha2 * math.exp(-p.d2 * tau_c)
    E = cmath.exp(-1j * w * tau_c)
    alpha = -(1j * w + p.b1 * x) / (p.c1 * x)
    beta = alpha * e * z * E / (1j * w + p.d3 - e * y * E)
    alpha_s = (p.b1 * x - 1j * w) / (p.alpha1 * y)
    beta_s = p.c2 * y * (-1j * w + p.b1 * x) / (p.alpha1 * y * (1j * w - p.d3 + e * y * np.conj(E)))
    den = (1 + alpha * np.conj(alpha_s) + beta * np.conj(beta_s)
           + tau_c * (alpha * z + beta * y) * e * np.conj(beta_s) * E)
    if abs(den) < 1e-12:
        raise SingularNormalizer(f"normaliser denominator {abs(den):.3e}")
    ctx = HopfContext(tau_c, w, alpha, beta, alpha_s, beta_s, 1.0 / den, (x, y, z), J0, J1)
    one = inner(ctx, ctx.q0, 1j * ctx.phase)
    zero = inner(ctx, np.conj(ctx.q0), -1j * ctx.phase)
    if abs(one - 1) > 1e-10 or abs(zero) > 1e-10:
        raise SingularNormalizer(f"normalisation failed: <q*,q>={one}, <q*,qbar>={zero}")
    return ctx


def inner(ctx: HopfContext, phi0, rho: complex) -> complex:
    """<q*, phi> for phi(theta) = phi0 e^{rho theta} in the rescaled problem."""
    return bilinear_form(ctx.qstar0, 1j * ctx.phase, phi0, rho, ctx.J1, ctx.tau_c)


@dataclass(frozen=True)
class GCoefficients:
    g20: complex
    g11: complex
    g02: complex


def g_coefficients(ctx: HopfContext, p: ModelParams) -> GCoefficients:
    """Quadratic coefficients of the reduced flow on the centre manifold."""
    a, b = ctx.alpha, ctx.beta
    ab, bb = np.conj(a), np.conj(b)
    asb, bsb = np.conj(ctx.alpha_star), np.conj(ctx.beta_star)
    e = ctx.gain
    E2 = cmath.exp(-2j * ctx.phase)
    k = 2 * ctx.tau_c * ctx.Dbar
    pred = p.c1 - p.alpha1 * asb
    re_a = a.real
    re_abb = (a * bb).real
    g20 = k * (-p.b1 - pred * a - p.c2 * a * b * asb + a * e * b * bsb * E2)
    g11 = k * (-p.b1 - pred * re_a - p.c2 * asb * re_abb + e * bsb * re_abb)
    g02 = k * (-p.b1 - pred * ab - p.c2 * asb * ab * bb + e * bsb * ab * bb / E2)
    return GCoefficients(g20, g11, g02)


def quadratic_forcing(ctx: HopfContext, p: ModelParams):
    """z^2 and z z-bar coefficient vectors of the nonlinearity (per unit tau_c, halved)."""
    a, b = ctx.alpha, ctx.beta
    e = ctx.gain
    f20 = np.array([-p.b1 - p.c1 * a,
                    p.alpha1 * a - p.c2 * a * b,
                    e * a * b * cmath.exp(-2j * ctx.phase)])
    re_a = a.real
    re_abb = (a * np.conj(b)).real
    f11 = np.array([-p.b1 - p.c1 * re_a,
                    p.alpha1 * re_a - p.c2 * re_abb,
                    e * re_abb], dtype=complex)
    return f20, f11


def e_matrices(ctx: HopfContext):
    """System matrices for the constant parts of W20 and W11, built from the generator's measure."""
    w = ctx.omega_c
    M1 = 2j * w * np.eye(3) - ctx.J0 - ctx.J1 * cmath.exp(-2j * ctx.phase)
    M2 = -ctx.J0 - ctx.J1
    return M1, M2.astype(complex)


def solve_E1_E2(ctx: HopfContext, p: ModelParams):
    M1, M2 = e_matrices(ctx)
    f20, f11 = quadratic_forcing(ctx, p)
    E1 = gauss_solve(M1, 2 * f20)
    E2 = gauss_solve(M2, 2 * f11)
    log.debug("E-system (3,3) entries: %r and %r", M1[2, 2], M2[2, 2])
    return E1, E2


def w20(ctx: HopfContext, g: GCoefficients, E1, theta: float) -> np.ndarray:
    ph = ctx.phase
    return (1j * g.g20 / ph * ctx.q0 * cmath.exp(1j * ph * theta)
            + 1j * np.conj(g.g02) / (3 * ph) * np.conj(ctx.q0) * cmath.exp(-1j * ph * theta)
            + E1 * cmath.exp(2j * ph * theta))


def w11(ctx: HopfContext, g: GCoefficients, E2, theta: float) -> np.ndarray:
    ph = ctx.phase
    return (-1j * g.g11 / ph * ctx.q0 * cmath.exp(1j * ph * theta)
            + 1j * np.conj(g.g11) / ph * np.conj(ctx.q0) * cmath.exp(-1j * ph * theta)
            + E2)


def g21_coefficient(ctx: HopfContext, p: ModelParams, g: GCoefficients, E1, E2) -> complex:
    a, b = ctx.alpha, ctx.beta
    ab, bb = np.conj(a), np.conj(b)
    asb, bsb = np.conj(ctx.alpha_star), np.conj(ctx.beta_star)
    e = ctx.gain
    E = cmath.exp(-1j * ctx.phase)
    W20_0, W20_1 = w20(ctx, g, E1, 0.0), w20(ctx, g, E1, -1.0)
    W11_0, W11_1 = w11(ctx, g, E2, 0.0), w11(ctx, g, E2, -1.0)
    bracket = (
        -p.b1 * (2 * W20_0[0] + 4 * W11_0[0])
        - (p.c1 - p.alpha1 * asb) * (ab * W20_0[0] + 2 * a * W11_0[0] + 2 * W11_0[1] + W20_0[1])
        - p.c2 * asb * (bb * W20_0[1] + 2 * b * W11_0[1] + 2 * a * W11_0[2] + ab * W20_0[2])
        + e * bsb * (bb / E * W20_1[1] + 2 * b * E * W11_1[1]
                     + 2 * a * E * W11_1[2] + ab / E * W20_1[2])
    )
    return ctx.tau_c * ctx.Dbar * bracket


def lambda_prime(p: ModelParams, tau_c: float, omega_c: float) -> complex:
    """d lam / d tau at lam = i omega_c by implicit differentiation, coefficient drift included."""
    cc = char_coeffs(p, tau_c)
    dc = char_coeff_derivatives(p, tau_c)
    lam = 1j * omega_c
    ex = cmath.exp(-lam * tau_c)
    G_tau = dc.P(lam) - lam ** 3 + dc.Q(lam) * ex - lam * cc.Q(lam) * ex
    G_lam = cc.dlam(lam, tau_c)
    return -G_tau / G_lam


def track_root(p: ModelParams, tau: float, guess: complex, tol: float = 1e-14) -> complex:
    """Newton iteration on the interior characteristic function at fixed ``tau``."""
    cc = char_coeffs(p, tau)
    lam = complex(guess)
    for _ in range(100):
        step = cc(lam, tau) / cc.dlam(lam, tau)
        lam -= step
        if abs(step) < tol:
            break
    return lam


def lambda_prime_fd(p: ModelParams, tau_c: float, omega_c: float, h: float = 1e-5) -> complex:
    """Central difference of the tracked root; independent check on :func:`lambda_prime`."""
    lp = track_root(p, tau_c + h, 1j * omega_c)
    lm = track_root(p, tau_c - h, 1j * omega_c)
    return (lp - lm) / (2 * h)


@dataclass
class HopfReport:
    tau_c: float
    omega_c: float
    g20: complex
    g11: complex
    g02: complex
    g21: complex
    E1_vec: np.ndarray
    E2_vec: np.ndarray
    C1_0: complex
    lambda_prime: complex
    mu2: float
    beta2: float
    T2: float
    direction: str
    orbit_stability: str
    context: HopfContext = field(repr=False)

    @property
    def period(self) -> float:
        """Onset period 2 pi / omega_c in original time units."""
        return 2 * math.pi / self.omega_c

    def predicted_x_amplitude(self, tau: float) -> float | None:
        """Half peak-to-peak of x(t) on the bifurcating orbit at ``tau`` (leading order).

        In rescaled time the critical pair moves with real part ``(tau - tau_c) tau_c Re lam'``,
        so the normal-form radius is r^2 = -that / Re C1(0); x oscillates as 2 r cos(.).
        """
        r2 = -(tau - self.tau_c) * self.tau_c * self.lambda_prime.real / self.C1_0.real
        if r2 <= 0:
            return None
        return 2.0 * math.sqrt(r2) * abs(self.context.q0[0])

    def as_record(self) -> dict:
        rec = {"tau_c": self.tau_c, "omega_c": self.omega_c}
        for name in ("g20", "g11", "g02", "g21", "C1_0", "lambda_prime"):
            v = complex(getattr(self, name))
            rec[name + "_re"], rec[name + "_im"] = v.real, v.imag
        for name, vec in (("E1", self.E1_vec), ("E2", self.E2_vec)):
            for i, v in enumerate(vec, 1):
                rec[f"{name}_{i}_re"], rec[f"{name}_{i}_im"] = complex(v).real, complex(v).imag
        rec.update(mu2=self.mu2, beta2=self.beta2, T2=self.T2,
                   direction=self.direction, orbit_stability=self.orbit_stability)
        return rec


def normal_form(ctx: HopfContext, g: GCoefficients, E1, E2, p: ModelParams) -> HopfReport:
    g21 = g21_coefficient(ctx, p, g, E1, E2)
    ph = ctx.phase
    C1 = (1j / (2 * ph) * (g.g20 * g.g11 - 2 * abs(g.g11) ** 2 - abs(g.g02) ** 2 / 3)
          + g21 / 2)
    lp = lambda_prime(p, ctx.tau_c, ctx.omega_c)
    if abs(lp.real) < 1e-10:
        raise TransversalityFailure(f"Re lambda'({ctx.tau_c}) = {lp.real:.3e}")
    mu2 = -C1.real / lp.real
    beta2 = 2 * C1.real
    T2 = -(C1.imag + mu2 * lp.imag) / ph
    return HopfReport(
        ctx.tau_c, ctx.omega_c, g.g20, g.g11, g.g02, g21, E1, E2, C1, lp, mu2, beta2, T2,
        "supercritical" if mu2 > 0 else "subcritical",
        "stable" if beta2 < 0 else "unstable",
        ctx,
    )


def analyze_crossing(p: ModelParams, tau_c: float, omega_c: float) -> HopfReport:
    ctx = eigenvectors(p, tau_c, omega_c)
    g = g_coefficients(ctx, p)
    E1, E2 = solve_E1_E2(ctx, p)
    return normal_form(ctx, g, E1, E2, p)


def hopf_at_switches(p: ModelParams, report) -> list[HopfReport]:
    """Normal-form report at every non-degenerate zero of a :class:`SwitchReport`."""
    return [analyze_crossing(p, z.tau, z.omega) for z in report.sn_zeros if z.delta != 0]
