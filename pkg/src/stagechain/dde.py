"""Fixed-step method-of-steps integrator for the constant-delay system.

The step is forced to divide ``tau`` so that every lagged grid point is a stored
node and the smoothness breaks at multiples of ``tau`` land on the grid.  The
classical RK4 stages at half steps need lagged values between nodes; those come
from a cubic Hermite interpolant built on the stored states and derivatives.
"""
from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field
import numba
import numpy as np
from scipy.integrate import simpson

from .errors import InsufficientHistory, NonFiniteState, OutOfCoverage, StepTooLarge
from .model import ModelParams, rhs_full

log = logging.getLogger(__name__)

BLOWUP = 1e12
POSITIVITY_TOL = 1e-9
CHANNELS = ("x", "y", "z1", "z2")
DEFAULT_HISTORY = (1.0, 1.0, 0.0, 1.0)


# -- history / interpolation ----------------------------------------------------


@dataclass
class HistoryBuffer:
    """Uniformly spaced states and derivatives, interpolable by cubic Hermite."""

    start_time: float
    step: float
    nodes: np.ndarray
    derivative_nodes: np.ndarray

    @property
    def end_time(self) -> float:
        return self.start_time + (len(self.nodes) - 1) * self.step

    def __call__(self, t: float) -> np.ndarray:
        return interpolate_history(self, t)


def interpolate_history(h: HistoryBuffer, t: float) -> np.ndarray:
    """Cubic Hermite value at ``t``; exact at nodes, never extrapolates."""
    n = len(h.nodes)
    s = (t - h.start_time) / h.step
    if s < -1e-12 or s > n - 1 + 1e-12 or n == 0:
        raise OutOfCoverage(f"t={t} outside [{h.start_time}, {h.end_time}]")
    r = round(s)
    if abs(s - r) < 1e-9:
        # queries that differ from a node by round-off return the node itself
        return np.array(h.nodes[min(max(int(r), 0), n - 1)], dtype=float)
    i = min(max(int(math.floor(s)), 0), n - 2) if n > 1 else 0
    u = s - i
    y0, y1 = h.nodes[i], h.nodes[i + 1]
    m0, m1 = h.derivative_nodes[i] * h.step, h.derivative_nodes[i + 1] * h.step
    u2, u3 = u * u, u * u * u
    return ((2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * m0
            + (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * m1)


# -- integration kernel ---------------------------------------------------------


@numba.njit(cache=True)
def _f(s, yd, z2d, par, out):
    a1, b1, c1, c2, d1, d2, d3, al1, al2, gain = (par[0], par[1], par[2], par[3], par[4],
                                                   par[5], par[6], par[7], par[8], par[9])
    x, y, z1, z2 = s[0], s[1], s[2], s[3]
    rec = gain * yd * z2d
    out[0] = x * (a1 - b1 * x - c1 * y)
    out[1] = y * (al1 * x - d1 - c2 * z2)
    out[2] = al2 * y * z2 - d2 * z1 - rec
    out[3] = rec - d3 * z2


@numba.njit(cache=True)
def _integrate(S, F, k0, i0, lag, n_steps, h, par, mid_hist):
    """Advance rows ``k0 .. k0+n_steps`` of ``S`` in place.

    ``i0`` is the row of t=0; rows below it hold the initial history, whose
    cell midpoints are read from ``mid_hist`` instead of being interpolated.
    Returns the first row that blew up, or -1.
    """
    k1 = np.empty(4)
    k2 = np.empty(4)
    k3 = np.empty(4)
    k4 = np.empty(4)
    tmp = np.empty(4)
    dm = np.empty(4)
    for k in range(k0, k0 + n_steps):
        s = S[k]
        if lag == 0:
            _f(s, s[1], s[3], par, k1)
            for j in range(4):
                tmp[j] = s[j] + 0.5 * h * k1[j]
            _f(tmp, tmp[1], tmp[3], par, k2)
            for j in range(4):
                tmp[j] = s[j] + 0.5 * h * k2[j]
            _f(tmp, tmp[1], tmp[3], par, k3)
            for j in range(4):
                tmp[j] = s[j] + h * k3[j]
            _f(tmp, tmp[1], tmp[3], par, k4)
        else:
            i = k - lag
            d0 = S[i]
            d1 = S[i + 1]
            if i < i0:
                for j in range(4):
                    dm[j] = mid_hist[i, j]
            else:
                for j in range(4):
                    dm[j] = 0.5 * (d0[j] + d1[j]) + h * 0.125 * (F[i, j] - F[i + 1, j])
            _f(s, d0[1], d0[3], par, k1)
            for j in range(4):
                tmp[j] = s[j] + 0.5 * h * k1[j]
            _f(tmp, dm[1], dm[3], par, k2)
            for j in range(4):
                tmp[j] = s[j] + 0.5 * h * k2[j]
            _f(tmp, dm[1], dm[3], par, k3)
            for j in range(4):
                tmp[j] = s[j] + h * k3[j]
            _f(tmp, d1[1], d1[3], par, k4)
        bad = False
        for j in range(4):
            v = s[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
            S[k + 1, j] = v
            if not (abs(v) <= 1e12):
                bad = True
        if bad:
            return k + 1
        dl = S[k + 1 - lag]
        _f(S[k + 1], dl[1], dl[3], par, F[k + 1])
    return -1


def _pack(p: ModelParams) -> np.ndarray:
    return np.array([p.a1, p.b1, p.c1, p.c2, p.d1, p.d2, p.d3, p.alpha1, p.alpha2,
                     p.delayed_gain])


# -- trajectories ---------------------------------------------------------------


@dataclass
class Trajectory:
    """Solution on a uniform grid ``times`` (from 0) plus the initial history segment.

    ``history_times``/``history_states`` sample [-tau, 0) on the same grid, so
    concatenating them with ``times``/``states`` gives a continuous record.
    """

    times: np.ndarray
    states: np.ndarray
    params_used: ModelParams
    step: float
    history_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    history_states: np.ndarray = field(default_factory=lambda: np.empty((0, 4)))
    derivatives: np.ndarray | None = None
    step_requested: float | None = None
    z1_requested: float | None = None

    @property
    def lag(self) -> int:
        return len(self.history_times)

    @property
    def x(self):
        return self.states[:, 0]

    @property
    def y(self):
        return self.states[:, 1]

    @property
    def z1(self):
        return self.states[:, 2]

    @property
    def z2(self):
        return self.states[:, 3]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def with_history(self):
        """Concatenated ``(times, states)`` covering [-tau, t_end]."""
        return (np.concatenate([self.history_times, self.times]),
                np.vstack([self.history_states, self.states]))

    def history_buffer(self) -> HistoryBuffer:
        if self.derivatives is None:
            raise InsufficientHistory("trajectory carries no derivative record")
        return HistoryBuffer(float(self.times[0]), self.step, self.states, self.derivatives)

    def to_csv(self, fh=None) -> str:
        return trajectory_to_csv(self, fh)


def adjusted_step(step: float, tau: float) -> float:
    """Largest step not exceeding ``step`` that divides ``tau`` exactly."""
    if tau == 0:
        return step
    return tau / math.ceil(tau / step - 1e-9)


def _sample_history(history, tau: float, h: float, lag: int):
    """Nodes on [-tau, 0] and the midpoint of each cell."""
    thetas = -tau + h * np.arange(lag + 1)
    thetas[-1] = 0.0
    if history is None:
        history = DEFAULT_HISTORY
    if callable(history):
        nodes = np.array([np.asarray(history(t), dtype=float) for t in thetas]).reshape(lag + 1, 4)
        mids = np.array([np.asarray(history(t + 0.5 * h), dtype=float) for t in thetas[:-1]])
        return nodes, mids.reshape(lag, 4)
    arr = np.asarray(history, dtype=float)
    if arr.ndim == 1:
        if arr.shape != (4,):
            raise ValueError("constant history must have 4 components (x, y, z1, z2)")
        nodes = np.tile(arr, (lag + 1, 1))
        return nodes, np.tile(arr, (lag, 1))
    if arr.shape != (lag + 1, 4):
        raise ValueError(f"tabulated history must have shape ({lag + 1}, 4) on the step grid")
    d = np.gradient(arr, h, axis=0) if lag > 1 else np.zeros_like(arr)
    mids = 0.5 * (arr[:-1] + arr[1:]) + 0.125 * h * (d[:-1] - d[1:])
    return arr, mids


def consistent_z1(p: ModelParams, nodes: np.ndarray, mids: np.ndarray, h: float) -> float:
    """Immature stock at t=0 implied by the history: int alpha2 y z2 e^{d2 s} ds on [-tau, 0].

    Composite Simpson with the cell midpoints as the interior abscissae.
    """
    lag = len(mids)
    if lag == 0:
        return 0.0
    s = -p.tau + h * np.arange(lag + 1)
    s[-1] = 0.0
    g = p.alpha2 * nodes[:, 1] * nodes[:, 3] * np.exp(p.d2 * s)
    gm = p.alpha2 * mids[:, 1] * mids[:, 3] * np.exp(p.d2 * (s[:-1] + 0.5 * h))
    return float(h / 6.0 * np.sum(g[:-1] + 4.0 * gm + g[1:]))


def simulate(p: ModelParams, history=None, t_end: float = 100.0, step: float = 0.01) -> Trajectory:
    """Integrate the full four-stage system from an initial history.

    ``history`` is a constant 4-vector, a callable ``theta -> (x, y, z1, z2)`` on
    [-tau, 0], or an array sampled on the (adjusted) step grid over [-tau, 0].
    The z1 value at t=0 is replaced by the one the history implies; both the
    requested and applied values are recorded on the trajectory.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    tau = p.tau
    if tau > 0 and step > tau / 4:
        raise StepTooLarge(f"step {step} exceeds tau/4 = {tau / 4}")
    h = adjusted_step(step, tau)
    if h != step:
        log.info("step adjusted from %r to %r to divide tau=%r", step, h, tau)
    lag = int(round(tau / h)) if tau > 0 else 0
    nodes, mids = _sample_history(history, tau, h, lag)
    if not np.all(np.isfinite(nodes)):
        raise ValueError("history contains non-finite values")

    z1_req = float(nodes[-1, 2])
    z1_0 = consistent_z1(p, nodes, mids, h)
    if z1_0 != z1_req:
        log.info("z1(0) overridden from %r to %r for history consistency", z1_req, z1_0)
    nodes = nodes.copy()
    nodes[-1, 2] = z1_0

    n_steps = max(int(math.ceil(t_end / h - 1e-9)), 0)
    S = np.empty((lag + n_steps + 1, 4))
    F = np.zeros_like(S)
    S[: lag + 1] = nodes
    F[lag] = rhs_full(S[lag], S[0], p)
    par = _pack(p)
    bad = _integrate(S, F, lag, lag, lag, n_steps, h, par, mids)
    if bad >= 0:
        raise NonFiniteState((bad - lag) * h)
    times = h * np.arange(n_steps + 1)
    return Trajectory(
        times=times, states=S[lag:], params_used=p, step=h,
        history_times=-tau + h * np.arange(lag), history_states=S[:lag].copy(),
        derivatives=F[lag:], step_requested=step, z1_requested=z1_req,
    )


# -- diagnostics ----------------------------------------------------------------


def reconstruct_z1(traj: Trajectory, p: ModelParams | None = None) -> np.ndarray:
    """z1(t) = int_{t-tau}^t alpha2 y(s) z2(s) e^{-d2 (t-s)} ds at every solution time.

    Uses composite Simpson weights on the grid (scipy's rule when the number of
    cells is odd).  The history segment must cover one delay window before t=0.
    """
    p = p or traj.params_used
    if p.tau == 0:
        return np.zeros(len(traj.times))
    lag = int(round(p.tau / traj.step))
    if traj.lag < lag:
        raise InsufficientHistory(f"need {lag} history rows, have {traj.lag}")
    _, st = traj.with_history()
    st = st[traj.lag - lag:]
    g = p.alpha2 * st[:, 1] * st[:, 3]
    w = simpson(np.eye(lag + 1), dx=traj.step, axis=1)
    w = w * np.exp(-p.d2 * traj.step * np.arange(lag, -1, -1))
    # z1[k] = sum_j w[j] g[k + j]
    return np.correlate(g, w, mode="valid")


@dataclass
class PositivityReport:
    violations: list  # (t, channel, value)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_positivity(traj: Trajectory, tol: float = POSITIVITY_TOL) -> PositivityReport:
    rows, cols = np.nonzero(traj.states < -tol)
    return PositivityReport([(float(traj.times[r]), CHANNELS[c], float(traj.states[r, c]))
                             for r, c in zip(rows, cols)])


@dataclass
class BoundednessReport:
    """Lyapunov-function envelope V(t) <= K/p + (V(0) - K/p) e^{-p t} (comparison lemma)."""

    V_series: np.ndarray
    p_min: float
    K: float
    envelope: np.ndarray
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def lyapunov_v(states: np.ndarray, p: ModelParams) -> np.ndarray:
    s = np.atleast_2d(states)
    return (p.alpha1 * p.alpha2 * s[:, 0] + p.c1 * p.alpha2 * s[:, 1]
            + p.c1 * p.c2 * (s[:, 2] + s[:, 3]))


def check_boundedness(traj: Trajectory, p: ModelParams | None = None,
                      rtol: float = 1e-9) -> BoundednessReport:
    p = p or traj.params_used
    V = lyapunov_v(traj.states, p)
    pm = min(p.a1, p.d1, p.d2, p.d3)
    K = p.a1 ** 2 * p.alpha1 * p.alpha2 / p.b1
    t = traj.times - traj.times[0]
    env = K / pm + (V[0] - K / pm) * np.exp(-pm * t)
    tol = rtol * max(1.0, K / pm, V[0])
    bad = np.nonzero(V > env + tol)[0]
    return BoundednessReport(V, pm, K, env, [float(traj.times[i]) for i in bad])


def trajectory_to_csv(traj: Trajectory, fh=None) -> str:
    buf = io.StringIO()
    buf.write("t,x,y,z1,z2\n")
    for t, s in zip(traj.times, traj.states):
        buf.write("%.17g,%.17g,%.17g,%.17g,%.17g\n" % (t, s[0], s[1], s[2], s[3]))
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def read_trajectory_csv(text: str):
    """Parse the CSV written by :func:`trajectory_to_csv` into ``(times, states)``."""
    lines = text.strip().splitlines()
    if lines[0].strip() != "t,x,y,z1,z2":
        raise ValueError("unexpected trajectory CSV header")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]]).reshape(-1, 5)
    return data[:, 0], data[:, 1:]
