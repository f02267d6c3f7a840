"""Delay-dependent stability switches of the interior equilibrium.

Purely imaginary roots ``i omega`` of ``P + Q e^{-lam tau}`` satisfy
``F(omega, tau) = |P(i omega)|^2 - |Q(i omega)|^2 = 0``, a cubic ``h(z)`` in
``z = omega^2``.  For each positive root the angle ``theta(tau)`` fixes the
phase, and crossings happen exactly at zeros of

    S_n(tau) = tau - (theta(tau) + 2 n pi) / omega(tau).
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import GridTooCoarse, InconsistentSinCos, NoInteriorEquilibrium, NoOmegaBranch
from .linstab import CharCoefficients, char_coeffs, routh_hurwitz_tau0
from .model import ModelParams, existence_thresholds, interior_coords

ZERO_ROOT = 1e-12
TWO_PI = 2.0 * math.pi


# -- cubic ----------------------------------------------------------------------


def cubic_real_roots(p: float, q: float, r: float) -> list[float]:
    """Real roots of ``z^3 + p z^2 + q z + r``, ascending.

    The variable is rescaled so the coefficients are O(1); then the
    trigonometric form is used when all three roots are real and Cardano
    otherwise, followed by Newton polishing on the original cubic.
    """
    s = max(abs(p), math.sqrt(abs(q)), abs(r) ** (1 / 3))
    if s == 0.0:
        return [0.0, 0.0, 0.0]
    ps, qs, rs = p / s, q / s / s, r / s / s / s
    shift = ps / 3.0
    a = qs - ps * ps / 3.0
    b = 2.0 * ps ** 3 / 27.0 - ps * qs / 3.0 + rs
    disc = (b / 2.0) ** 2 + (a / 3.0) ** 3
    if disc > 1e-14:
        sd = math.sqrt(disc)
        ts = [math.copysign(abs(-b / 2 + sd) ** (1 / 3), -b / 2 + sd)
              + math.copysign(abs(-b / 2 - sd) ** (1 / 3), -b / 2 - sd)]
    else:
        m = 2.0 * math.sqrt(max(-a / 3.0, 0.0))
        if m < 1e-7:
            ts = [math.copysign(abs(b) ** (1 / 3), -b)]
        else:
            arg = max(-1.0, min(1.0, 3.0 * b / (a * m)))
            phi = math.acos(arg) / 3.0
            ts = [m * math.cos(phi - 2.0 * math.pi * k / 3.0) for k in range(3)]
    roots = []
    for t in ts:
        z = (t - shift) * s
        hz = ((z + p) * z + q) * z + r
        # near a double root the derivative vanishes; keep the best iterate
        best, best_h = z, abs(hz)
        for _ in range(3):
            dh = (3 * z + 2 * p) * z + q
            if dh == 0.0:
                break
            dz = hz / dh
            z -= dz
            hz = ((z + p) * z + q) * z + r
            if abs(hz) < best_h:
                best, best_h = z, abs(hz)
            if abs(dz) <= 1e-16 * max(1.0, abs(z)):
                break
        roots.append(best)
    return sorted(roots)


# -- F(omega, tau) ---------------------------------------------------------------


@dataclass(frozen=True)
class FCubic:
    """``h(z) = z^3 + p z^2 + q z + r`` at one ``tau`` with its positive roots."""

    tau: float
    p: float
    q: float
    r: float
    positive_roots: tuple
    omegas: tuple
    coeffs: CharCoefficients | None = field(default=None, repr=False, compare=False)

    def h(self, z):
        return ((z + self.p) * z + self.q) * z + self.r

    def F(self, omega):
        return self.h(omega * omega)

    def dF_domega(self, omega):
        w = omega
        return 6 * w ** 5 + 4 * self.p * w ** 3 + 2 * self.q * w


def pqr(cc: CharCoefficients):
    A1, A2, A3 = cc.A
    B1, B2, B3 = cc.B
    p = A1 * A1 - 2 * A2 - B1 * B1
    q = A2 * A2 - 2 * A1 * A3 - B2 * B2 + 2 * B1 * B3
    r = A3 * A3 - B3 * B3
    return p, q, r


def f_value(cc: CharCoefficients, omega: float) -> float:
    """``|P(i omega)|^2 - |Q(i omega)|^2`` evaluated directly from the complex polynomials."""
    lam = 1j * omega
    return abs(cc.P(lam)) ** 2 - abs(cc.Q(lam)) ** 2


def f_cubic(p: ModelParams, tau: float | None = None) -> FCubic:
    tau = p.tau if tau is None else float(tau)
    cc = char_coeffs(p, tau)
    pp, qq, rr = pqr(cc)
    pos = tuple(z for z in cubic_real_roots(pp, qq, rr) if z > ZERO_ROOT)
    return FCubic(tau, pp, qq, rr, pos, tuple(math.sqrt(z) for z in pos), cc)


@dataclass(frozen=True)
class CaseInfo:
    intervals: tuple  # subset of I11, I12, I21, I22, I23
    n_positive: int
    case: str


_CASE_BY_COUNT = {0: "I", 1: "II", 2: "III", 3: "IV"}


def classify_case(fc: FCubic) -> CaseInfo:
    """Descartes sign-pattern membership and the case label from the realised root count."""
    p, q, r = fc.p, fc.q, fc.r
    member = []
    if p > 0 and q > 0 and r > 0:
        member.append("I11")
    if r > 0 and (p < 0 or q < 0):
        member.append("I12")
    if p > 0 and r < 0:
        member.append("I21")
    if p < 0 and q < 0 and r < 0:
        member.append("I22")
    if p < 0 and q > 0 and r < 0:
        member.append("I23")
    n = len(fc.positive_roots)
    return CaseInfo(tuple(member), n, _CASE_BY_COUNT[n])


# -- theta and S_n ----------------------------------------------------------------


def sin_cos_theta(cc: CharCoefficients, omega: float):
    """``(sin, cos)`` of ``omega * tau`` at a crossing, from e^{-i omega tau} = -P/Q."""
    A1, A2, A3 = cc.A
    B1, B2, B3 = cc.B
    w = omega
    w2 = w * w
    den = B1 * B1 * w2 * w2 + (B2 * B2 - 2 * B1 * B3) * w2 + B3 * B3
    s = (B1 * w ** 5 + (A1 * B2 - A2 * B1 - B3) * w ** 3 + (A2 * B3 - A3 * B2) * w) / den
    c = ((B2 - A1 * B1) * w2 * w2 + (A1 * B3 + A3 * B1 - A2 * B2) * w2 - A3 * B3) / den
    return s, c


def theta_of_tau(p: ModelParams, tau: float, omega: float,
                 cc: CharCoefficients | None = None) -> float:
    """Crossing phase in [0, 2 pi); raises if ``omega`` is not a root of F."""
    cc = cc or char_coeffs(p, tau)
    s, c = sin_cos_theta(cc, omega)
    if abs(s * s + c * c - 1.0) > 1e-8:
        raise InconsistentSinCos(
            f"sin^2+cos^2 = {s * s + c * c!r} at omega={omega}, tau={tau}: omega is not a root of F")
    return math.atan2(s, c) % TWO_PI


def s_n(p: ModelParams, tau: float, n: int, branch: int = 0) -> float:
    fc = f_cubic(p, tau)
    if branch >= len(fc.omegas) or branch < 0:
        raise NoOmegaBranch(f"no omega branch {branch} at tau={tau} ({len(fc.omegas)} exist)")
    w = fc.omegas[branch]
    return tau - (theta_of_tau(p, tau, w, fc.coeffs) + TWO_PI * n) / w


def _s_or_nan(p, tau, n, branch, count):
    try:
        fc = f_cubic(p, tau)
    except NoInteriorEquilibrium:
        return math.nan
    if len(fc.omegas) != count:
        return math.nan
    w = fc.omegas[branch]
    try:
        th = theta_of_tau(p, tau, w, fc.coeffs)
    except InconsistentSinCos:
        return math.nan
    return tau - (th + TWO_PI * n) / w


def lemma_checks(p: ModelParams, tau: float) -> dict:
    """Executable versions of the quasi-polynomial preconditions at ``tau``."""
    cc = char_coeffs(p, tau)
    x, y, z = interior_coords(p, tau)
    pq0 = cc.P(0.0) + cc.Q(0.0)
    closed = p.b1 * p.c2 * p.alpha2 * x * y * z * math.exp(-p.d2 * tau)
    big = 1e3 * max(1.0, *map(abs, cc.A + cc.B))
    ratio = abs(cc.Q(1j * big)) / abs(cc.P(1j * big))
    return {"P0_plus_Q0": pq0, "closed_form": closed, "Q_over_P_at_large_omega": ratio}


# -- switch search ----------------------------------------------------------------


@dataclass(frozen=True)
class SwitchZero:
    n: int
    branch: int
    tau: float
    omega: float
    delta: int  # +1 destabilising, -1 stabilising, 0 degenerate
    dF_domega: float
    dS_dtau: float
    residual: float  # |P + Q e^{-i omega tau}| at the zero


@dataclass
class SwitchReport:
    case_label: str
    intervals_I: dict
    branch_regions: list  # (tau_start, tau_end, number of omega branches)
    sn_zeros: list
    tau_star: float | None
    tau_star_star: float | None
    stability_intervals: list  # (tau_start, tau_end, "stable" | "unstable")
    tau_bar: float | None
    grid: np.ndarray = field(default=None, repr=False)
    s_curves: dict = field(default_factory=dict, repr=False)  # (n, branch) -> array
    omega_curves: dict = field(default_factory=dict, repr=False)
    theta_curves: dict = field(default_factory=dict, repr=False)

    @property
    def omega_at_zeros(self):
        return [z.omega for z in self.sn_zeros]

    def zeros_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n,branch,tau_zero,omega,delta\n")
        for z in self.sn_zeros:
            buf.write("%d,%d,%.17g,%.17g,%d\n" % (z.n, z.branch, z.tau, z.omega, z.delta))
        return buf.getvalue()

    def curves_csv(self) -> str:
        n_max = max((k[0] for k in self.s_curves), default=-1)
        buf = io.StringIO()
        buf.write("tau,omega,theta," + ",".join(f"S{n}" for n in range(n_max + 1)) + "\n")
        branches = sorted({k[1] for k in self.s_curves})
        for i, t in enumerate(self.grid):
            for b in branches:
                w = self.omega_curves[b][i]
                if not math.isfinite(w):
                    continue
                vals = [self.s_curves[(n, b)][i] for n in range(n_max + 1)]
                buf.write("%.17g,%.17g,%.17g," % (t, w, self.theta_curves[b][i])
                          + ",".join("%.17g" % v for v in vals) + "\n")
        return buf.getvalue()

    def is_stable(self, tau: float) -> bool | None:
        for a, b, s in self.stability_intervals:
            if a <= tau < b:
                return s == "stable"
        return None


def _count_roots(p, tau):
    try:
        return len(f_cubic(p, tau).omegas)
    except Exception:
        return -1


def _refine_count_change(p, a, b, ca, cb):
    while b - a > 1e-12 * max(1.0, b):
        m = 0.5 * (a + b)
        cm = _count_roots(p, m)
        if cm == ca:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def _ds_dtau(p, tau, n, branch, count, hstep):
    lo, hi = tau - hstep, tau + hstep
    return (_s_or_nan(p, hi, n, branch, count) - _s_or_nan(p, lo, n, branch, count)) / (hi - lo)


def find_switches(p: ModelParams, grid_step: float | None = None, n_max: int = 3) -> SwitchReport:
    """Locate every zero of ``S_n`` (n <= n_max) on every omega branch over [0, tau_bar)."""
    th = existence_thresholds(p)
    if th.tau_bar is None:
        return SwitchReport("I", {}, [], [], None, None, [], None, np.empty(0))
    tau_bar = th.tau_bar
    grid_step = grid_step or tau_bar / 2000
    npts = int(math.ceil(tau_bar / grid_step))
    grid = np.linspace(0.0, tau_bar, npts + 1)[:-1]

    cubics = [f_cubic(p, t) for t in grid]
    counts = np.array([len(fc.omegas) for fc in cubics])

    intervals_I: dict = {}
    for t, fc in zip(grid, cubics):
        for name in classify_case(fc).intervals:
            intervals_I.setdefault(name, []).append(t)
    intervals_I = {k: _runs(np.array(v), grid_step) for k, v in intervals_I.items()}
    case_label = _CASE_BY_COUNT[int(counts.max())]

    # contiguous regions of constant branch count
    regions = []
    start = 0
    for i in range(1, len(grid) + 1):
        if i == len(grid) or counts[i] != counts[start]:
            a = 0.0 if start == 0 else _refine_count_change(
                p, grid[start - 1], grid[start], counts[start - 1], counts[start])
            b = tau_bar if i == len(grid) else _refine_count_change(
                p, grid[i - 1], grid[i], counts[i - 1], counts[i])
            regions.append((a, b, int(counts[start]), start, i))
            start = i

    max_b = int(counts.max())
    omega_curves = {b: np.full(len(grid), np.nan) for b in range(max_b)}
    theta_curves = {b: np.full(len(grid), np.nan) for b in range(max_b)}
    s_curves = {(n, b): np.full(len(grid), np.nan) for n in range(n_max + 1) for b in range(max_b)}
    for i, (t, fc) in enumerate(zip(grid, cubics)):
        for b, w in enumerate(fc.omegas):
            thv = theta_of_tau(p, t, w, fc.coeffs)
            omega_curves[b][i] = w
            theta_curves[b][i] = thv
            for n in range(n_max + 1):
                s_curves[(n, b)][i] = t - (thv + TWO_PI * n) / w

    zeros: list[SwitchZero] = []
    for a, b, count, i0, i1 in regions:
        for br in range(count):
            for n in range(n_max + 1):
                seq = []
                vals = s_curves[(n, br)]
                for i in range(i0, i1 - 1):
                    va, vb = vals[i], vals[i + 1]
                    if not (math.isfinite(va) and math.isfinite(vb)) or va * vb > 0:
                        continue
                    if va == 0.0 and i > i0:
                        continue  # counted in the previous cell
                    z = _refine_zero(p, grid[i], grid[i + 1], n, br, count, va, vb)
                    if z is not None:
                        seq.append(z)
                _check_alternation(seq, n, br)
                zeros.extend(seq)
    zeros.sort(key=lambda z: (z.tau, z.n, z.branch))

    s0 = [z.tau for z in zeros if z.n == 0]
    tau_star = min(s0) if s0 else None
    tau_star_star = max(s0) if s0 else None
    stab = _partition(p, zeros, tau_bar)
    return SwitchReport(case_label, intervals_I,
                        [(a, b, c) for a, b, c, _, _ in regions], zeros,
                        tau_star, tau_star_star, stab, tau_bar, grid,
                        s_curves, omega_curves, theta_curves)


def _runs(ts: np.ndarray, step: float):
    if len(ts) == 0:
        return []
    out = []
    a = prev = ts[0]
    for t in ts[1:]:
        if t - prev > 1.5 * step:
            out.append((float(a), float(prev)))
            a = t
        prev = t
    out.append((float(a), float(prev)))
    return out


def _refine_zero(p, a, b, n, br, count, va, vb):
    f = lambda t: _s_or_nan(p, t, n, br, count)  # noqa: E731
    if va == 0.0:
        t0 = a
    else:
        t0 = brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    s_val = f(t0)
    if not math.isfinite(s_val) or abs(s_val) > 1e-10:
        # sign change caused by the 2 pi wrap of theta, not a zero
        return None
    fc = f_cubic(p, t0)
    w = fc.omegas[br]
    lam = 1j * w
    cc = fc.coeffs
    residual = abs(cc(lam, t0))
    dF = fc.dF_domega(w)
    hstep = 1e-6 * max(1.0, t0)
    dS = _ds_dtau(p, t0, n, br, count, hstep)
    if abs(dF) <= 1e-9 or abs(dS) <= 1e-9 or not math.isfinite(dS):
        delta = 0
    else:
        delta = int(np.sign(dF) * np.sign(dS))
    return SwitchZero(n, br, t0, w, delta, dF, dS, residual)


def _check_alternation(seq, n, br):
    slopes = [np.sign(z.dS_dtau) for z in seq if z.delta != 0]
    for s1, s2 in zip(slopes, slopes[1:]):
        if s1 == s2:
            raise GridTooCoarse(
                f"S_{n} on branch {br}: consecutive zeros cross in the same direction; "
                "a zero pair was missed inside one grid cell")


def _partition(p, zeros, tau_bar):
    rh = routh_hurwitz_tau0(p)
    unstable_pairs = 0 if rh.verdict == "stable" else 1
    out = []
    a = 0.0
    for z in zeros:
        if z.delta == 0:
            continue
        state = "stable" if unstable_pairs == 0 else "unstable"
        if z.tau > a:
            out.append((a, z.tau, state))
        a = z.tau
        unstable_pairs = max(unstable_pairs + z.delta, 0)
    out.append((a, tau_bar, "stable" if unstable_pairs == 0 else "unstable"))
    # merge adjacent equal labels
    merged = []
    for seg in out:
        if merged and merged[-1][2] == seg[2]:
            merged[-1] = (merged[-1][0], seg[1], seg[2])
        else:
            merged.append(seg)
    return merged
