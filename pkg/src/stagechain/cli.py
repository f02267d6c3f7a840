"""Command-line front end: ``stagechain <command> --config FILE [options]``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from .dde import simulate
from .errors import (
    ConfigError, DuplicateKey, MalformedNumber, MissingKey, NumericalError, ParameterError,
    UnknownKey,
)
from .hopf import hopf_at_switches
from .linstab import boundary_spectrum, routh_hurwitz_tau0
from .model import PARAM_NAMES, RATE_NAMES, ModelParams, compute_equilibria, h2_holds
from .orbit import bifurcation_sweep
from .svg import line_plot, scatter_plot
from .switch import find_switches

log = logging.getLogger(__name__)

COMMANDS = ("equilibria", "simulate", "stability", "switches", "hopf", "sweep")
NUMERIC_SETTINGS = ("t_end", "step", "tau_min", "tau_max", "tau_step", "jobs",
                    "history_x", "history_y", "history_z1", "history_z2")
FLAG_SETTINGS = ("svg", "lle")
TEXT_SETTINGS = ("out",)
KNOWN_KEYS = set(PARAM_NAMES) | set(NUMERIC_SETTINGS) | set(FLAG_SETTINGS) | set(TEXT_SETTINGS)


@dataclass
class RunConfig:
    params: ModelParams
    t_end: float = 3000.0
    step: float = 0.01
    tau_min: float = 0.0
    tau_max: float = 2.0
    tau_step: float = 0.02
    jobs: int | None = None
    out: str = "."
    svg: bool = False
    lle: bool = False
    history: tuple | None = None
    source_lines: dict = field(default_factory=dict, repr=False)


def _parse_bool(text: str, key: str, lineno: int) -> bool:
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"line {lineno}: {key} expects true/false, got {text!r}")


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    raw: dict = {}
    lines: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {body!r}")
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in KNOWN_KEYS:
            err = UnknownKey(f"line {lineno}: unknown key {key!r}")
            err.line = lineno
            raise err
        if key in raw:
            raise DuplicateKey(f"line {lineno}: {key!r} already set on line {lines[key]}")
        if key in PARAM_NAMES or key in NUMERIC_SETTINGS:
            try:
                raw[key] = float(value)
            except ValueError:
                err = MalformedNumber(f"line {lineno}: {key} = {value!r} is not a number")
                err.line = lineno
                raise err from None
        elif key in FLAG_SETTINGS:
            raw[key] = _parse_bool(value, key, lineno)
        else:
            raw[key] = value
        lines[key] = lineno
    missing = [k for k in RATE_NAMES if k not in raw]
    if missing:
        raise MissingKey("missing rate keys: " + ", ".join(missing))
    params = ModelParams(**{k: raw[k] for k in PARAM_NAMES if k in raw})
    cfg = RunConfig(params=params, source_lines=lines)
    for key in ("t_end", "step", "tau_min", "tau_max", "tau_step"):
        if key in raw:
            setattr(cfg, key, raw[key])
    if "jobs" in raw:
        cfg.jobs = int(raw["jobs"])
    for key in FLAG_SETTINGS + TEXT_SETTINGS:
        if key in raw:
            setattr(cfg, key, raw[key])
    hist = [raw.get(f"history_{c}") for c in ("x", "y", "z1", "z2")]
    if any(h is not None for h in hist):
        default = (1.0, 1.0, 0.0, 1.0)
        cfg.history = tuple(d if h is None else h for h, d in zip(hist, default))
    return cfg


# -- commands -------------------------------------------------------------------


def _num(v) -> str:
    return "%.17g" % v


def _write(out: Path, name: str, text: str, written: list) -> None:
    path = out / name
    with open(path, "w", newline="") as fh:
        fh.write(text)
    written.append(path)


def cmd_equilibria(cfg: RunConfig, out: Path) -> list:
    written: list = []
    buf = io.StringIO()
    buf.write("kind,x,y,z1,z2,exists,condition\n")
    for e in compute_equilibria(cfg.params):
        s = e.full_state()
        buf.write(",".join([e.kind, *(_num(v) for v in s), str(e.exists).lower(), e.condition]) + "\n")
        print(f"{e.kind}: ({', '.join(f'{v:.6g}' for v in s)})  exists={e.exists} [{e.condition}]")
    _write(out, "equilibria.csv", buf.getvalue(), written)
    return written


def cmd_simulate(cfg: RunConfig, out: Path) -> list:
    written: list = []
    traj = simulate(cfg.params, cfg.history, t_end=cfg.t_end, step=cfg.step)
    _write(out, "trajectory.csv", traj.to_csv(), written)
    f = traj.final
    print(f"t_end={traj.times[-1]:g} step={traj.step:g} final state "
          f"x={f[0]:.6g} y={f[1]:.6g} z1={f[2]:.6g} z2={f[3]:.6g}")
    if cfg.svg:
        series = [(traj.times, traj.states[:, j], name) for j, name in enumerate(("x", "y", "z1", "z2"))]
        _write(out, "timeseries.svg",
               line_plot(series, f"tau = {cfg.params.tau:g}", "t", "population"), written)
        _write(out, "phase.svg",
               line_plot([(traj.x, traj.y, "(x, y)")], "phase portrait", "x", "y"), written)
    return written


def cmd_stability(cfg: RunConfig, out: Path) -> list:
    written: list = []
    p = cfg.params
    rows = []
    eqs = {e.kind: e for e in compute_equilibria(p)}
    for kind in ("E0", "E1", "E2"):
        if not eqs[kind].exists:
            print(f"{kind}: absent")
            continue
        sp = boundary_spectrum(p, kind)
        for i, lam in enumerate(sp.eigenvalues, 1):
            rows.append((kind, f"lambda{i}", complex(lam).real, complex(lam).imag, sp.verdict))
        if sp.indicator is not None:
            rows.append((kind, "indicator", sp.indicator, 0.0, sp.verdict))
            rows.append((kind, "delayed_root", sp.delayed_root, 0.0, sp.verdict))
        lams = ", ".join(f"{complex(l):.6g}" for l in sp.eigenvalues)
        print(f"{kind}: {sp.verdict}  eigenvalues [{lams}]"
              + (f"  indicator {sp.indicator:.6g}" if sp.indicator is not None else ""))
    if h2_holds(p, 0.0):
        rh = routh_hurwitz_tau0(p)
        rows.append(("E3", "rh_discriminant", rh.discriminant, 0.0, rh.verdict))
        print(f"E3 at tau=0: {rh.verdict}  (a1a2 - a3 = {rh.discriminant:.6g})")
    buf = io.StringIO()
    buf.write("equilibrium,quantity,re,im,verdict\n")
    for kind, q, re, im, verdict in rows:
        buf.write(f"{kind},{q},{_num(re)},{_num(im)},{verdict}\n")
    _write(out, "stability.csv", buf.getvalue(), written)
    return written


def cmd_switches(cfg: RunConfig, out: Path) -> list:
    written: list = []
    rep = find_switches(cfg.params)
    print(f"case {rep.case_label}; tau_bar = {rep.tau_bar:.6g}")
    for a, b, nb in rep.branch_regions:
        print(f"  omega branches on [{a:.6g}, {b:.6g}): {nb}")
    for z in rep.sn_zeros:
        print(f"  S{z.n} zero at tau = {z.tau:.6f}, omega = {z.omega:.6f}, delta = {z.delta:+d}")
    for a, b, s in rep.stability_intervals:
        print(f"  {s} on [{a:.6g}, {b:.6g})")
    _write(out, "switch_zeros.csv", rep.zeros_csv(), written)
    _write(out, "switch_curves.csv", rep.curves_csv(), written)
    if cfg.svg:
        series = [(rep.grid, curve, f"S{n} (branch {b})")
                  for (n, b), curve in sorted(rep.s_curves.items()) if n <= 1]
        _write(out, "switch_curves.svg",
               line_plot(series, "switching functions", "tau", "S_n(tau)", hlines=(0.0,)), written)
    return written


def cmd_hopf(cfg: RunConfig, out: Path) -> list:
    written: list = []
    reps = hopf_at_switches(cfg.params, find_switches(cfg.params))
    records = [r.as_record() for r in reps]
    for r in reps:
        print(f"tau_c = {r.tau_c:.6f}: C1(0) = {r.C1_0:.6g}, lambda' = {r.lambda_prime:.6g}, "
              f"mu2 = {r.mu2:.6g} ({r.direction}), beta2 = {r.beta2:.6g} ({r.orbit_stability}), "
              f"T2 = {r.T2:.6g}, period = {r.period:.6g}")
    buf = io.StringIO()
    if records:
        w = csv.DictWriter(buf, fieldnames=list(records[0]), lineterminator="\n")
        w.writeheader()
        for rec in records:
            w.writerow({k: _num(v) if isinstance(v, float) else v for k, v in rec.items()})
    _write(out, "hopf.csv", buf.getvalue(), written)
    _write(out, "hopf.json", json.dumps(records, indent=2) + "\n", written)
    return written


def cmd_sweep(cfg: RunConfig, out: Path) -> list:
    written: list = []
    table = bifurcation_sweep(cfg.params, cfg.tau_min, cfg.tau_max, cfg.tau_step,
                              t_end=cfg.t_end, step=cfg.step, with_lle=cfg.lle,
                              jobs=cfg.jobs, history=cfg.history)
    prev = None
    for r in table.rows:
        if r.kind != prev:
            print(f"tau = {r.tau:g}: {r.kind}")
            prev = r.kind
    _write(out, "sweep.csv", table.to_csv(), written)
    if cfg.svg:
        xs = [r.tau for r in table.rows for _ in r.extrema]
        ys = [v for r in table.rows for v in r.extrema]
        _write(out, "bifurcation.svg",
               scatter_plot(xs, ys, "bifurcation diagram", "tau", "extrema of x", "x extrema"),
               written)
    return written


HANDLERS = {
    "equilibria": cmd_equilibria, "simulate": cmd_simulate, "stability": cmd_stability,
    "switches": cmd_switches, "hopf": cmd_hopf, "sweep": cmd_sweep,
}


def _ensure_writable(out: Path) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from None
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")


def run_command(cfg: RunConfig, command: str) -> tuple[int, list]:
    """Run one subcommand; returns ``(exit_status, written_paths)``."""
    if command not in HANDLERS:
        print(f"error: unknown command {command!r}", file=sys.stderr)
        return 2, []
    try:
        out = Path(cfg.out)
        _ensure_writable(out)
        return 0, HANDLERS[command](cfg, out)
    except (ConfigError, ParameterError) as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2, []
    except NumericalError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 3, []


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stagechain",
                                 description="Delayed stage-structured predator-prey analysis.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="key = value parameter file")
    ap.add_argument("--tau", type=float)
    ap.add_argument("--t-end", type=float)
    ap.add_argument("--step", type=float)
    ap.add_argument("--out")
    ap.add_argument("--svg", action="store_true")
    ap.add_argument("--jobs", type=int)
    ap.add_argument("--tau-min", type=float)
    ap.add_argument("--tau-max", type=float)
    ap.add_argument("--tau-step", type=float)
    ap.add_argument("--lle", action="store_true", help="estimate Lyapunov exponents in sweeps")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text = Path(args.config).read_text()
        cfg = parse_config(text)
        if args.tau is not None:
            cfg.params = cfg.params.with_tau(args.tau)
    except OSError as exc:
        print(f"error [cli.ConfigError]: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ParameterError) as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    overrides = {k: getattr(args, k) for k in
                 ("t_end", "step", "out", "jobs", "tau_min", "tau_max", "tau_step")
                 if getattr(args, k) is not None}
    cfg = replace(cfg, **overrides)
    if args.svg:
        cfg.svg = True
    if args.lle:
        cfg.lle = True
    status, _ = run_command(cfg, args.command)
    return status


if __name__ == "__main__":
    sys.exit(main())
