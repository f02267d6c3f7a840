"""Crop / pest / stage-structured natural-enemy model.

State ordering throughout the package is ``(x, y, z1, z2)``: crop, pest,
immature enemy, mature enemy.  The reduced system drops ``z1`` and works on
``(x, y, z2)``.

Full system::

    x'  = x (a1 - b1 x - c1 y)
    y'  = y (alpha1 x - d1 - c2 z2)
    z1' = alpha2 y z2 - d2 z1 - alpha2 exp(-d2 tau) y(t-tau) z2(t-tau)
    z2' = alpha2 exp(-d2 tau) y(t-tau) z2(t-tau) - d3 z2
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Mapping

import numpy as np

from .errors import NegativeDelay, NonPositiveRate, ParameterError

RATE_NAMES = ("a1", "b1", "c1", "c2", "d1", "d2", "d3", "alpha1", "alpha2")
PARAM_NAMES = RATE_NAMES + ("tau",)

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class ModelParams:
    """Nine positive rate constants plus the maturation delay ``tau``."""

    a1: float
    b1: float
    c1: float
    c2: float
    d1: float
    d2: float
    d3: float
    alpha1: float
    alpha2: float
    tau: float = 0.0

    def __post_init__(self):
        _check(asdict(self))

    def with_tau(self, tau: float) -> "ModelParams":
        return replace(self, tau=float(tau))

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in PARAM_NAMES], dtype=float)

    @property
    def delayed_gain(self) -> float:
        """Survival-weighted recruitment coefficient alpha2 exp(-d2 tau)."""
        return self.alpha2 * math.exp(-self.d2 * self.tau)


def _check(raw: Mapping[str, float]) -> None:
    bad = []
    for name in PARAM_NAMES:
        v = raw[name]
        if not math.isfinite(v):
            raise ParameterError(f"parameter {name} is not finite: {v!r}")
        if name != "tau" and v <= 0:
            bad.append(name)
    if bad:
        raise NonPositiveRate(bad)
    if raw["tau"] < 0:
        raise NegativeDelay(f"maturation delay must be >= 0, got tau={raw['tau']}")


def validate_params(raw: Mapping[str, float]) -> ModelParams:
    """Build :class:`ModelParams` from a mapping, reporting every violated constraint.

    ``tau`` defaults to 0 when absent; every rate constant is required.
    """
    missing = [n for n in RATE_NAMES if n not in raw]
    if missing:
        raise ParameterError("missing parameters: " + ", ".join(missing))
    unknown = sorted(set(raw) - set(PARAM_NAMES))
    if unknown:
        raise ParameterError("unknown parameters: " + ", ".join(unknown))
    values = {n: float(raw[n]) for n in RATE_NAMES}
    values["tau"] = float(raw.get("tau", 0.0))
    return ModelParams(**values)


# Reference parameter sets, reused by tests, demos and the shipped configs.
REFERENCE_PARAMS = ModelParams(a1=2.0, b1=1.0, c1=1.0, c2=0.6, d1=0.05, d2=0.4, d3=0.3,
                           alpha1=1.2, alpha2=1.3, tau=0.0)
BOUNDARY_PARAMS = replace(REFERENCE_PARAMS, a1=1.0, d1=0.5, alpha1=0.1)
CHAOS_PARAMS = ModelParams(a1=7.0, b1=1.0, c1=1.0, c2=0.5, d1=0.05, d2=0.6, d3=1.2,
                           alpha1=1.5, alpha2=2.0, tau=1.5)


# -- right-hand sides -----------------------------------------------------------


def rhs_full(state, delayed, p: ModelParams) -> np.ndarray:
    """Derivative of ``(x, y, z1, z2)`` given the current and the tau-lagged state."""
    x, y, z1, z2 = np.asarray(state, dtype=float)
    yd, z2d = float(delayed[1]), float(delayed[3])
    recruit = p.delayed_gain * yd * z2d
    return np.array([
        x * (p.a1 - p.b1 * x - p.c1 * y),
        y * (p.alpha1 * x - p.d1 - p.c2 * z2),
        p.alpha2 * y * z2 - p.d2 * z1 - recruit,
        recruit - p.d3 * z2,
    ])


def rhs_reduced(state, delayed, p: ModelParams) -> np.ndarray:
    """Derivative of ``(x, y, z2)``; ``delayed`` is the lagged ``(x, y, z2)``."""
    x, y, z2 = np.asarray(state, dtype=float)
    yd, z2d = float(delayed[1]), float(delayed[2])
    return np.array([
        x * (p.a1 - p.b1 * x - p.c1 * y),
        y * (p.alpha1 * x - p.d1 - p.c2 * z2),
        p.delayed_gain * yd * z2d - p.d3 * z2,
    ])


# -- equilibria -----------------------------------------------------------------


@dataclass(frozen=True)
class Equilibrium:
    """An equilibrium of the reduced system, flagged rather than dropped when infeasible.

    ``coords`` is ``(x, y, z2)``.  ``condition`` names the existence hypothesis:
    ``"unconditional"``, ``"H1"`` (a1 alpha1 > b1 d1) or ``"H2"`` (a1 alpha1 alpha2 > Delta).
    """

    kind: str
    coords: tuple
    exists: bool
    condition: str
    tau: float = 0.0
    z1: float = 0.0

    @property
    def x(self) -> float:
        return self.coords[0]

    @property
    def y(self) -> float:
        return self.coords[1]

    @property
    def z2(self) -> float:
        return self.coords[2]

    def full_state(self) -> np.ndarray:
        """``(x, y, z1, z2)`` with z1 at its steady value."""
        return np.array([self.x, self.y, self.z1, self.z2])


def z1_steady(y: float, z2: float, p: ModelParams) -> float:
    """Immature stock alpha2 y z2 (1 - e^{-d2 tau}) / d2 sustained by constant (y, z2)."""
    if p.tau == 0:
        return 0.0
    return p.alpha2 * y * z2 * (-math.expm1(-p.d2 * p.tau)) / p.d2


def interior_coords(p: ModelParams, tau: float | None = None) -> tuple:
    """Closed-form ``(x*, y*, z2*)`` at ``tau`` (defaults to ``p.tau``); may be non-positive."""
    tau = p.tau if tau is None else tau
    g = math.exp(p.d2 * tau)
    xs = (p.a1 * p.alpha2 - p.c1 * p.d3 * g) / (p.b1 * p.alpha2)
    ys = p.d3 * g / p.alpha2
    delta = p.c1 * p.d3 * p.alpha1 * g + p.b1 * p.d1 * p.alpha2
    zs = (p.a1 * p.alpha1 * p.alpha2 - delta) / (p.b1 * p.c2 * p.alpha2)
    return xs, ys, zs


def h1_holds(p: ModelParams) -> bool:
    return p.a1 * p.alpha1 > p.b1 * p.d1


def h2_holds(p: ModelParams, tau: float | None = None) -> bool:
    tau = p.tau if tau is None else tau
    delta = p.c1 * p.d3 * p.alpha1 * math.exp(p.d2 * tau) + p.b1 * p.d1 * p.alpha2
    return p.a1 * p.alpha1 * p.alpha2 > delta


def compute_equilibria(p: ModelParams) -> list[Equilibrium]:
    """E0, E1, E2, E3 in that order, each with its existence flag at ``p.tau``."""
    e0 = Equilibrium("E0", (0.0, 0.0, 0.0), True, "unconditional", p.tau)
    e1 = Equilibrium("E1", (p.a1 / p.b1, 0.0, 0.0), True, "unconditional", p.tau)
    xb = p.d1 / p.alpha1
    yb = (p.a1 * p.alpha1 - p.b1 * p.d1) / (p.c1 * p.alpha1)
    e2 = Equilibrium("E2", (xb, yb, 0.0), h1_holds(p), "H1", p.tau)
    xs, ys, zs = interior_coords(p)
    e3 = Equilibrium("E3", (xs, ys, zs), h2_holds(p), "H2", p.tau, z1_steady(ys, zs, p))
    return [e0, e1, e2, e3]


def equilibrium(p: ModelParams, kind: str) -> Equilibrium:
    for e in compute_equilibria(p):
        if e.kind == kind:
            return e
    raise KeyError(kind)


def equilibrium_residual(e: Equilibrium, p: ModelParams) -> float:
    """Max-norm of the reduced right-hand side at ``e`` with delayed = current."""
    c = np.array(e.coords)
    return float(np.max(np.abs(rhs_reduced(c, c, p))))


@dataclass(frozen=True)
class Thresholds:
    """Delay thresholds for interior existence (``tau_bar``) and E2 stability (``tau_cr``).

    Both are ``None`` when undefined; ``reason`` then says why.
    """

    tau_bar: float | None
    tau_cr: float | None
    h1: bool
    reason: str = ""
    _p: ModelParams | None = field(default=None, repr=False, compare=False)

    def h2(self, tau: float) -> bool:
        return h2_holds(self._p, tau)


def existence_thresholds(p: ModelParams) -> Thresholds:
    if not h1_holds(p):
        return Thresholds(None, None, False, "H1 fails (a1*alpha1 <= b1*d1): E2 and E3 absent", p)
    arg_bar = (p.a1 * p.alpha1 * p.alpha2 - p.b1 * p.d1 * p.alpha2) / (p.c1 * p.d3 * p.alpha1)
    ybar = (p.a1 * p.alpha1 - p.b1 * p.d1) / (p.c1 * p.alpha1)
    arg_cr = p.alpha2 * ybar / p.d3
    if arg_bar <= 1.0:
        return Thresholds(None, None, True,
                          f"log argument {arg_bar:.6g} <= 1: E3 absent for every tau >= 0", p)
    return Thresholds(math.log(arg_bar) / p.d2, math.log(arg_cr) / p.d2, True, "", p)
