"""Long-run regime classification, largest Lyapunov exponent and tau sweeps."""
from __future__ import annotations

import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .dde import (
    DEFAULT_HISTORY, Trajectory, _integrate, _pack, _sample_history, adjusted_step,
    consistent_z1, simulate,
)
from .errors import NonFiniteState, TrajectoryTooShort
from .model import Equilibrium, ModelParams, compute_equilibria, rhs_full

AMPLITUDE_TOL = 1e-5
LLE_THRESHOLD = 0.01
PERIOD_CV = 0.02
MIN_DELAY_INTERVALS = 50
# a decaying oscillation counts as converging when the late half of the
# post-transient window has under this fraction of the early half's amplitude
DECAY_RATIO = 0.5
KINDS = ("Equilibrium", "Periodic", "Chaotic", "Undetermined")


@dataclass
class OrbitClass:
    kind: str
    amplitude: float
    equilibrium_target: Equilibrium | None = None
    period: float | None = None
    lle: float | None = None
    channel_amplitudes: tuple = ()


def _half_range(a: np.ndarray) -> float:
    return 0.5 * float(np.max(a) - np.min(a)) if len(a) else 0.0


def post_transient(traj: Trajectory, transient_fraction: float = 0.5):
    n0 = int(len(traj.times) * transient_fraction)
    return traj.times[n0:], traj.states[n0:]


def _nearest_equilibrium(p: ModelParams, state) -> Equilibrium:
    best, dist = None, math.inf
    for e in compute_equilibria(p):
        if not e.exists:
            continue
        d = max(abs(state[0] - e.x), abs(state[1] - e.y), abs(state[3] - e.z2))
        if d < dist:
            best, dist = e, d
    return best


def peak_period(t: np.ndarray, x: np.ndarray, prominence: float, max_k: int = 4):
    """Period from peak spacing, trying every k-th peak so period-k orbits are recognised.

    Returns ``(period, cv)`` for the smallest k whose spacing CV is below the
    threshold, or ``(None, best_cv)``.
    """
    idx, _ = find_peaks(x, prominence=prominence)
    best = math.inf
    for k in range(1, max_k + 1):
        if len(idx) < 2 * k + 2:
            break
        gaps = np.diff(t[idx[::k]]) if k == 1 else t[idx[k:]] - t[idx[:-k]]
        cv = float(np.std(gaps) / np.mean(gaps))
        best = min(best, cv)
        if cv < PERIOD_CV:
            return float(np.mean(gaps)), cv
    return None, best


def classify_orbit(traj: Trajectory, transient_fraction: float = 0.5, tol: float = AMPLITUDE_TOL,
                   lle: float | None = None, compute_lle: bool = True) -> OrbitClass:
    """Equilibrium, Periodic, Chaotic or Undetermined from the post-transient window.

    Irregular runs need an exponent to be called chaotic; it is estimated from the
    run's parameters when ``lle`` is not supplied and ``compute_lle`` is set.
    """
    p = traj.params_used
    t, s = post_transient(traj, transient_fraction)
    span = float(t[-1] - t[0]) if len(t) > 1 else 0.0
    unit = p.tau if p.tau > 0 else 1.0
    if span < MIN_DELAY_INTERVALS * unit:
        raise TrajectoryTooShort(
            f"post-transient window {span:g} < {MIN_DELAY_INTERVALS} x {unit:g}")
    amps = tuple(_half_range(s[:, j]) for j in range(4))
    amp = amps[0]
    if max(amps) < tol:
        return OrbitClass("Equilibrium", amp, _nearest_equilibrium(p, s[-1]), None, lle, amps)

    half = len(t) // 2
    early = max(_half_range(s[:half, j]) for j in range(4))
    late = max(_half_range(s[half:, j]) for j in range(4))
    quarter = max(_half_range(s[-(len(t) // 4):, j]) for j in range(4))
    if late < DECAY_RATIO * early and quarter <= late:
        return OrbitClass("Equilibrium", amp, _nearest_equilibrium(p, s[-1]), None, lle, amps)

    period, _ = peak_period(t, s[:, 0], prominence=max(tol, 1e-3 * amp))
    if period is not None:
        return OrbitClass("Periodic", amp, None, period, lle, amps)
    if lle is None and compute_lle:
        lle = largest_lyapunov(p, p.tau, horizon=float(traj.times[-1]), step=traj.step)
    if lle is not None and lle > LLE_THRESHOLD:
        return OrbitClass("Chaotic", amp, None, None, lle, amps)
    return OrbitClass("Undetermined", amp, None, None, lle, amps)


def largest_lyapunov(p: ModelParams, tau: float | None = None, horizon: float = 3000.0,
                     renorm_interval: float = 5.0, step: float = 0.01, history=None,
                     d0: float = 1e-8) -> float:
    """Two-trajectory (Benettin) estimate of the largest Lyapunov exponent.

    The separation is the max-norm over the trailing delay window of both runs;
    every ``renorm_interval`` the perturbed window (states and stored derivatives)
    is pulled back along the difference to distance ``d0``.
    """
    p = p if tau is None else p.with_tau(tau)
    h = adjusted_step(step, p.tau)
    lag = int(round(p.tau / h)) if p.tau > 0 else 0
    m = max(int(round(renorm_interval / h)), 1)
    n_ren = max(int(horizon / (m * h)), 1)
    nodes, mids = _sample_history(DEFAULT_HISTORY if history is None else history, p.tau, h, lag)
    nodes = nodes.copy()
    nodes[-1, 2] = consistent_z1(p, nodes, mids, h)
    par = _pack(p)
    n_total = lag + n_ren * m + 1

    runs = []
    for offset in (0.0, d0):
        S = np.empty((n_total, 4))
        F = np.zeros_like(S)
        S[: lag + 1] = nodes + offset
        F[lag] = rhs_full(S[lag], S[0], p)
        runs.append((S, F, mids + offset))
    (Sa, Fa, _), (Sb, Fb, _) = runs

    total = 0.0
    k = lag
    for _ in range(n_ren):
        for S, F, mh in runs:
            bad = _integrate(S, F, k, lag, lag, m, h, par, mh)
            if bad >= 0:
                raise NonFiniteState((bad - lag) * h)
        k += m
        w = slice(k - lag, k + 1)
        diff = Sb[w] - Sa[w]
        d = float(np.max(np.abs(diff)))
        if d == 0.0:
            return -math.inf
        total += math.log(d / d0)
        scale = d0 / d
        Sb[w] = Sa[w] + diff * scale
        Fb[w] = Fa[w] + (Fb[w] - Fa[w]) * scale
    return total / (n_ren * m * h)


# -- sweeps ---------------------------------------------------------------------


@dataclass
class SweepRow:
    tau: float
    kind: str
    period: float | None
    amplitude: float
    lle: float | None
    extrema: list = field(default_factory=list)


def tau_grid(tau_min: float, tau_max: float, tau_step: float) -> np.ndarray:
    if not tau_step > 0:
        raise ValueError("tau_step must be positive")
    if tau_max < tau_min:
        return np.empty(0)
    n = int(math.floor((tau_max - tau_min) / tau_step + 1e-9)) + 1
    return np.round(tau_min + tau_step * np.arange(n), 12)


def local_extrema(x: np.ndarray, max_values: int = 100, rel_gap: float = 1e-3) -> list:
    """Distinct local maxima and minima of ``x``, sorted.

    Sampled extrema of one orbit scatter slightly; values closer than
    ``rel_gap`` times the spread are merged into their cluster mean.
    """
    inner = x[1:-1]
    mask = ((inner > x[:-2]) & (inner >= x[2:])) | ((inner < x[:-2]) & (inner <= x[2:]))
    vals = np.sort(inner[mask])
    if len(vals) == 0:
        return [float(x[-1])]
    spread = max(float(vals[-1] - vals[0]), 1e-12 * max(1.0, abs(float(vals[-1]))))
    groups = np.split(vals, np.flatnonzero(np.diff(vals) > rel_gap * spread) + 1)
    uniq = np.array([g.mean() for g in groups])
    if len(uniq) > max_values:
        uniq = uniq[np.linspace(0, len(uniq) - 1, max_values).astype(int)]
    return [float(v) for v in uniq]


def _sweep_one(args) -> SweepRow:
    p, tau, t_end, step, with_lle, history = args
    pt = p.with_tau(tau)
    # the integrator needs step <= tau/4
    st = min(step, tau / 4) if tau > 0 else step
    traj = simulate(pt, history, t_end=t_end, step=st)
    lle = largest_lyapunov(pt, horizon=t_end, step=st, history=history) if with_lle else None
    oc = classify_orbit(traj, lle=lle, compute_lle=with_lle)
    _, s = post_transient(traj)
    ext = [float(s[-1, 0])] if oc.kind == "Equilibrium" else local_extrema(s[:, 0])
    return SweepRow(float(tau), oc.kind, oc.period, oc.amplitude, oc.lle, ext)


@dataclass
class SweepTable:
    rows: list

    def __len__(self) -> int:
        return len(self.rows)

    def kinds(self) -> list:
        return [r.kind for r in self.rows]

    def to_csv(self, fh=None) -> str:
        out = io.StringIO()
        out.write("tau,class,period,amplitude,lle,extrema\n")

        def num(v):
            return "" if v is None else "%.17g" % v

        for r in self.rows:
            out.write(",".join([num(r.tau), r.kind, num(r.period), num(r.amplitude), num(r.lle),
                                ";".join("%.17g" % v for v in r.extrema)]) + "\n")
        text = out.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def read_sweep_csv(text: str) -> SweepTable:
    lines = text.strip().splitlines()
    rows = []
    for line in lines[1:]:
        tau, kind, period, amp, lle, ext = line.split(",")
        rows.append(SweepRow(float(tau), kind, float(period) if period else None, float(amp),
                             float(lle) if lle else None,
                             [float(v) for v in ext.split(";")] if ext else []))
    return SweepTable(rows)


def bifurcation_sweep(p: ModelParams, tau_min: float, tau_max: float, tau_step: float,
                      t_end: float = 3000.0, step: float = 0.01, with_lle: bool = False,
                      jobs: int | None = None, history=None) -> SweepTable:
    """Classify the long-run regime at every tau on the grid; runs in parallel processes."""
    taus = tau_grid(tau_min, tau_max, tau_step)
    tasks = [(p, float(t), t_end, step, with_lle, history) for t in taus]
    jobs = jobs or os.cpu_count() or 1
    if jobs == 1 or len(tasks) <= 1:
        return SweepTable([_sweep_one(a) for a in tasks])
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as ex:
        return SweepTable(list(ex.map(_sweep_one, tasks)))
