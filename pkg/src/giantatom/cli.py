"""Command-line front end: single runs, figure-style sweeps, comparison tables,
and brute-force cross-checks.  Emits CSV (default) or JSON.

Exit codes: 0 success, 2 invalid input, 3 tolerance breach in check commands.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import __version__
from .analytic import (
    NoClosedFormError,
    NoSteadyValueError,
    markovian_closed_form,
    steady_state_closed,
    steady_state_numeric,
)
from .dde import InitialState, integrate
from .model import CONFIGS, SystemParams, derive_kernel, layout_for
from .oracle import ModeGrid, calibrate, oracle_integrate

TRAJ_HEADER = ("gamma_t", "re_ca", "im_ca", "re_cb", "im_cb", "concurrence")
_SWEEPABLE = ("theta0", "delay", "detuning", "phi")


@dataclass(frozen=True)
class SweepAxis:
    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self) -> None:
        if self.name not in _SWEEPABLE:
            raise ValueError(f"cannot sweep {self.name!r}; choose one of {_SWEEPABLE}")
        if self.count < 2:
            raise ValueError("sweep count must be at least 2")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError("sweep endpoints must be finite")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class RunSpec:
    """Everything one command needs: physics parameters plus run plumbing."""

    config: str = "separate"
    theta0: float = 0.0
    delay: float = 0.0
    detuning: float = 0.0
    phi: float = 0.0
    gamma: float = 1.0
    init: str = "plus"
    t_max: float = 10.0
    steps_per_delay: int = 200
    output: str | None = None
    fmt: str = "csv"
    sweep: tuple[SweepAxis, ...] = ()


def parse_angle(text: str) -> float:
    """An angle as raw radians ('1.57') or a multiple of pi ('0.5pi', 'pi')."""
    s = str(text).strip().lower()
    if s.endswith("pi"):
        head = s[:-2].strip()
        if head in ("", "+", "-"):
            head += "1"
        return float(head) * math.pi
    return float(s)


def parse_delay(text: str) -> float:
    s = str(text).strip().lower()
    value = math.inf if s in ("inf", "infinity") else float(s)
    if math.isnan(value) or value < 0.0:
        raise ValueError("delay must be >= 0 or 'inf'")
    return value


def _make_init(name: str, phi: float) -> InitialState:
    if name == "plus":
        return InitialState.plus()
    if name == "minus":
        return InitialState.minus()
    if name == "phase":
        return InitialState.phase(phi)
    raise ValueError(f"unknown initial state {name!r}")


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    return repr(float(value))


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _json_text(meta: dict, header, rows) -> str:
    payload = {
        "meta": meta,
        "columns": list(header),
        "rows": [[_json_safe(v) for v in row] for row in rows],
    }
    return json.dumps(payload, indent=1) + "\n"


def _meta(spec: RunSpec, **extra) -> dict:
    meta = {
        "config": spec.config,
        "theta0": _json_safe(spec.theta0),
        "delay": _json_safe(spec.delay),
        "detuning": spec.detuning,
        "phi": spec.phi,
        "gamma": spec.gamma,
        "init": spec.init,
        "t_max": spec.t_max,
        "steps_per_delay": spec.steps_per_delay,
        "format": spec.fmt,
        "sweep": [
            {"name": ax.name, "start": ax.start, "stop": ax.stop, "count": ax.count}
            for ax in spec.sweep
        ],
        "version": __version__,
    }
    meta.update(extra)
    return meta


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _traj_rows(traj, max_rows: int | None = None) -> list[list[float]]:
    t = traj.t
    amps = traj.amps
    conc = 2.0 * np.abs(amps[:, 0] * np.conjugate(amps[:, 1]))
    if max_rows is not None and len(t) > max_rows:
        idx = np.unique(np.linspace(0, len(t) - 1, max_rows).round().astype(int))
    else:
        idx = range(len(t))
    return [
        [
            float(t[i]),
            float(amps[i, 0].real),
            float(amps[i, 0].imag),
            float(amps[i, 1].real),
            float(amps[i, 1].imag),
            float(conc[i]),
        ]
        for i in idx
    ]


def cmd_simulate(spec: RunSpec) -> int:
    """Run a single trajectory and write it out."""
    try:
        params = SystemParams(
            theta0=spec.theta0, delay=spec.delay, detuning=spec.detuning,
            phi=spec.phi, config=spec.config, gamma=spec.gamma,
        )
        init = _make_init(spec.init, spec.phi)
        kernel = derive_kernel(layout_for(params.config))
        traj = integrate(params, kernel, init, spec.t_max, spec.steps_per_delay)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rows = _traj_rows(traj)
    if spec.fmt == "json":
        text = _json_text(_meta(spec), TRAJ_HEADER, rows)
    else:
        text = _csv_text(TRAJ_HEADER, rows)
    _write_text(spec.output, text)
    return 0


# ---------------------------------------------------------------------------
# sweeps

def _preset_jobs(name: str):
    """(axis column names, [(overrides, init), ...], steady?) for a figure preset.

    Grids follow the published panels: theta0 scans over [0, 4pi] at delays
    {0, 0.8, inf}; delay scans cover [0, 2]; the short-delay detuning scan uses
    0.03 and the phase scan 0.3.
    """
    pi = math.pi
    th81 = [float(v) for v in np.linspace(0.0, 4.0 * pi, 81)]
    delays3 = (0.0, 0.8, math.inf)
    branch3 = ((0.0, "minus"), (pi, "plus"), (pi, "minus"))
    if name in ("fig2", "fig5"):
        config = "separate" if name == "fig2" else "nested"
        jobs = [
            ({"config": config, "theta0": th, "delay": dl}, ini)
            for ini in ("plus", "minus")
            for dl in delays3
            for th in th81
        ]
        return ["theta0", "delay", "init"], jobs, False
    if name == "fig3":
        jobs = [
            ({"config": "separate", "theta0": th, "delay": dl}, ini)
            for ini in ("plus", "minus")
            for th in (0.0, 0.5 * pi, pi)
            for dl in (0.0, 0.4, 0.8, 1.2, 1.6, 2.0)
        ]
        return ["theta0", "delay", "init"], jobs, False
    if name in ("fig3g", "fig5g"):
        config = "separate" if name == "fig3g" else "nested"
        jobs = [
            ({"config": config, "theta0": th, "delay": float(dl)}, ini)
            for th, ini in branch3
            for dl in np.linspace(0.0, 2.0, 201)
        ]
        return ["theta0", "init", "delay"], jobs, True
    if name == "fig4":
        jobs = [
            ({"config": "braided", "theta0": th, "delay": dl}, "minus")
            for dl in delays3
            for th in th81
        ]
        jobs += [
            ({"config": "braided", "theta0": th, "delay": float(dl)}, "minus")
            for th in (0.0, 0.5 * pi, pi)
            for dl in np.linspace(0.0, 2.0, 41)
        ]
        return ["theta0", "delay", "init"], jobs, False
    if name == "fig6":
        cases = (("separate", pi, "minus"), ("braided", 0.5 * pi, "plus"), ("nested", 0.5 * pi, "plus"))
        jobs = [
            ({"config": cf, "theta0": th, "delay": 0.03, "detuning": dt}, ini)
            for cf, th, ini in cases
            for dt in (0.0, 0.5, 1.0, 2.0, 4.0, 6.0)
        ]
        return ["config", "theta0", "init", "detuning"], jobs, False
    if name == "fig7":
        jobs = [
            ({"config": cf, "theta0": th, "delay": 0.3, "phi": float(ph)}, "phase")
            for cf in CONFIGS
            for th in (2.0 * pi, pi)
            for ph in np.linspace(0.0, 2.0 * pi, 81)
        ]
        return ["config", "theta0", "phi"], jobs, True
    raise ValueError(f"unknown preset {name!r}")


def _run_sweep_point(task):
    """Worker for one sweep point; returns finished output rows."""
    base, over, init_name, steady, max_rows, prefix = task
    merged = {**base, **over}
    params = SystemParams(
        theta0=merged["theta0"], delay=merged["delay"], detuning=merged["detuning"],
        phi=merged["phi"], config=merged["config"], gamma=merged["gamma"],
    )
    init = _make_init(init_name, merged["phi"])
    kernel = derive_kernel(layout_for(params.config))
    if steady:
        try:
            value = steady_state_numeric(kernel, params, init)
        except NoSteadyValueError:
            value = math.nan
        return [prefix + [value]]
    traj = integrate(params, kernel, init, merged["t_max"], merged["steps_per_delay"])
    return [prefix + row for row in _traj_rows(traj, max_rows)]


def _worker_count() -> int:
    env = os.environ.get("GIANTATOM_THREADS")
    if env:
        return max(0, int(env))
    return os.cpu_count() or 1


def cmd_sweep(spec: RunSpec, steady: bool = False, preset: str | None = None,
              max_rows: int = 201) -> int:
    """Run a grid of points (ordered deterministically) and write the matrix file."""
    try:
        if preset is not None:
            names, jobs, steady = _preset_jobs(preset)
        elif spec.sweep:
            names = [ax.name for ax in spec.sweep]
            grids = [ax.values() for ax in spec.sweep]
            jobs = [
                (dict(zip(names, (float(v) for v in combo))), spec.init)
                for combo in product(*grids)
            ]
        else:
            raise ValueError("sweep needs --param/--from/--to/--count or --preset")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    base = {
        "config": spec.config, "theta0": spec.theta0, "delay": spec.delay,
        "detuning": spec.detuning, "phi": spec.phi, "gamma": spec.gamma,
        "t_max": spec.t_max, "steps_per_delay": spec.steps_per_delay,
    }
    tasks = []
    for over, init_name in jobs:
        prefix = []
        for nm in names:
            if nm == "init":
                prefix.append(init_name)
            elif nm == "config":
                prefix.append(over["config"])
            else:
                prefix.append(float(over.get(nm, base[nm])))
        tasks.append((base, over, init_name, steady, max_rows, prefix))

    workers = _worker_count()
    try:
        if workers <= 1 or len(tasks) <= 1:
            chunks = [_run_sweep_point(t) for t in tasks]
        else:
            with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
                chunksize = max(1, len(tasks) // (4 * workers))
                chunks = list(pool.map(_run_sweep_point, tasks, chunksize=chunksize))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rows = [row for chunk in chunks for row in chunk]
    header = tuple(names) + (("steady_concurrence",) if steady else TRAJ_HEADER)
    if spec.fmt == "json":
        text = _json_text(_meta(spec, preset=preset, steady=steady), header, rows)
    else:
        text = _csv_text(header, rows)
    _write_text(spec.output, text)
    return 0


# ---------------------------------------------------------------------------
# comparison table

_TABLE_TOLS = {"markov": 1e-6, "fvt": 1e-6, "dde": 1e-3}


def cmd_table1(delay: float = 0.4, sample_t: float = 0.25, output: str | None = None) -> int:
    """Every (config, collective state, phase-shift class) cell, three ways.

    The zero-delay half compares the closed form against the integrator at
    gamma*t = sample_t; the finite-delay half compares the closed steady value
    against the Laplace final value and the integrator at gamma*t = 60.
    """
    if not (0.0 < delay < math.inf):
        print("error: table needs a positive finite delay", file=sys.stderr)
        return 2
    classes = (("even_pi", 0.0), ("half_pi", 0.5 * math.pi), ("odd_pi", math.pi))
    header = (
        "config", "theta0_class", "init",
        "markov_closed", "markov_dde", "markov_diff",
        "steady_closed", "steady_fvt", "steady_dde", "steady_diff_fvt", "steady_diff_dde",
    )
    rows = []
    breach = False
    for config in CONFIGS:
        kernel = derive_kernel(layout_for(config))
        for init_name in ("plus", "minus"):
            init = _make_init(init_name, 0.0)
            for klass, th in classes:
                p0 = SystemParams(theta0=th, delay=0.0, config=config)
                closed0 = float(markovian_closed_form(p0, init, sample_t))
                traj0 = integrate(p0, kernel, init, sample_t)
                dde0 = float(2.0 * abs(traj0.amps[-1, 0] * traj0.amps[-1, 1].conjugate()))
                mdiff = abs(closed0 - dde0)

                pd = SystemParams(theta0=th, delay=delay, config=config)
                closed_s = steady_state_closed(pd, init).value
                fvt = steady_state_numeric(kernel, pd, init)
                trajd = integrate(pd, kernel, init, 60.0)
                dde_s = float(2.0 * abs(trajd.amps[-1, 0] * trajd.amps[-1, 1].conjugate()))
                dfvt = abs(closed_s - fvt)
                ddde = abs(closed_s - dde_s)
                if mdiff > _TABLE_TOLS["markov"] or dfvt > _TABLE_TOLS["fvt"] or ddde > _TABLE_TOLS["dde"]:
                    breach = True
                rows.append([config, klass, init_name, closed0, dde0, mdiff,
                             closed_s, fvt, dde_s, dfvt, ddde])

    widths = (9, 12, 6)
    print(f"{'config':<9} {'class':<12} {'init':<6} "
          f"{'markov(closed)':>14} {'markov(dde)':>14} {'diff':>9}  "
          f"{'steady(closed)':>14} {'steady(fvt)':>14} {'steady(dde)':>14} {'d_fvt':>9} {'d_dde':>9}")
    for r in rows:
        print(f"{r[0]:<{widths[0]}} {r[1]:<{widths[1]}} {r[2]:<{widths[2]}} "
              f"{r[3]:>14.9f} {r[4]:>14.9f} {r[5]:>9.2e}  "
              f"{r[6]:>14.9f} {r[7]:>14.9f} {r[8]:>14.9f} {r[9]:>9.2e} {r[10]:>9.2e}")
    status = "BREACH" if breach else "ok"
    print(f"table check: {status} (tolerances: markov {_TABLE_TOLS['markov']:g}, "
          f"final-value {_TABLE_TOLS['fvt']:g}, integrated {_TABLE_TOLS['dde']:g})")
    if output:
        _write_text(output, _csv_text(header, rows))
    return 3 if breach else 0


# ---------------------------------------------------------------------------
# oracle check

def cmd_oracle_check(config: str, theta0: float, delay: float, init_name: str,
                     t_max: float, n_modes: int, half_width: float) -> int:
    """Calibrate the mode grid, then compare brute force against the integrator."""
    try:
        grid = ModeGrid(n_modes=n_modes, half_width=half_width)
        params = SystemParams(theta0=theta0, delay=delay, config=config)
        init = _make_init(init_name, 0.0)
        layout = layout_for(config)
        kernel = derive_kernel(layout)
        measured = calibrate(grid)
        otraj, modes = oracle_integrate(params, layout, grid, init, t_max)
        dtraj = integrate(params, kernel, init, t_max)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    c_dde = 2.0 * np.abs(dtraj.amps[:, 0] * np.conjugate(dtraj.amps[:, 1]))
    c_orc = 2.0 * np.abs(otraj.amps[:, 0] * np.conjugate(otraj.amps[:, 1]))
    c_orc_on_dde = np.interp(dtraj.t, otraj.t, c_orc)
    max_dc = float(np.max(np.abs(c_dde - c_orc_on_dde)))

    cal_ok = abs(measured - params.gamma) <= 0.02 * params.gamma
    dc_ok = max_dc < 1e-2
    drift_ok = modes.norm_drift < 1e-6
    print(f"calibration rate : {measured:.6f} (target 1 within 2%) "
          f"{'PASS' if cal_ok else 'FAIL'}")
    print(f"max |dC|         : {max_dc:.3e} (tolerance 1e-02) {'PASS' if dc_ok else 'FAIL'}")
    print(f"norm drift       : {modes.norm_drift:.3e} (tolerance 1e-06) "
          f"{'PASS' if drift_ok else 'FAIL'}")
    return 0 if (cal_ok and dc_ok and drift_ok) else 3


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", choices=CONFIGS, default="separate")
    sp.add_argument("--theta0", type=parse_angle, default=0.0,
                    help="phase shift in radians, or 'Xpi' (e.g. 0.5pi)")
    sp.add_argument("--delay", type=parse_delay, default=0.0,
                    help="gamma*t_d >= 0, or 'inf' to drop delayed terms")
    sp.add_argument("--delta", dest="detuning", type=float, default=0.0,
                    help="detuning delta/gamma")
    sp.add_argument("--phi", type=parse_angle, default=0.0,
                    help="relative phase of the 'phase' initial state")
    sp.add_argument("--init", choices=("plus", "minus", "phase"), default="plus")
    sp.add_argument("--tmax", type=float, default=10.0)
    sp.add_argument("--steps-per-delay", type=int, default=200)
    sp.add_argument("--output", default=None, help="file path; stdout if omitted")
    sp.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="giantatom",
        description="Delayed collective decay and entanglement of two giant atoms "
                    "coupled to a 1D waveguide at two points each.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate one trajectory")
    _add_common(sim)

    sw = sub.add_parser("sweep", help="run a parameter grid (or a figure preset)")
    _add_common(sw)
    sw.add_argument("--param", choices=_SWEEPABLE, help="name of the swept parameter")
    sw.add_argument("--from", dest="start", type=parse_angle, help="sweep start")
    sw.add_argument("--to", dest="stop", type=parse_angle, help="sweep end")
    sw.add_argument("--count", type=int, help="number of sweep points")
    sw.add_argument("--steady", action="store_true",
                    help="record the settled long-time concurrence per point")
    sw.add_argument("--preset",
                    choices=("fig2", "fig3", "fig3g", "fig4", "fig5", "fig5g", "fig6", "fig7"),
                    help="published-panel parameter grids")
    sw.add_argument("--max-rows", type=int, default=201,
                    help="trajectory samples kept per sweep point")

    tb = sub.add_parser("table1", help="closed form vs final value vs integration, per cell")
    tb.add_argument("--delay", type=parse_delay, default=0.4)
    tb.add_argument("--sample-t", type=float, default=0.25)
    tb.add_argument("--output", default=None)

    oc = sub.add_parser("oracle-check", help="mode-grid brute force vs the integrator")
    oc.add_argument("--config", choices=CONFIGS, default="separate")
    oc.add_argument("--theta0", type=parse_angle, default=math.pi)
    oc.add_argument("--delay", type=parse_delay, default=0.8)
    oc.add_argument("--init", choices=("plus", "minus"), default="plus")
    oc.add_argument("--tmax", type=float, default=10.0)
    oc.add_argument("--modes", type=int, default=4001)
    oc.add_argument("--half-width", type=float, default=320.0,
                    help="window in units of gamma; wider windows shrink the "
                         "band-truncation artifact (~1.7/W in concurrence)")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "simulate":
        spec = RunSpec(
            config=args.config, theta0=args.theta0, delay=args.delay,
            detuning=args.detuning, phi=args.phi, init=args.init,
            t_max=args.tmax, steps_per_delay=args.steps_per_delay,
            output=args.output, fmt=args.fmt,
        )
        return cmd_simulate(spec)

    if args.command == "sweep":
        axes: tuple[SweepAxis, ...] = ()
        if args.param is not None:
            if args.start is None or args.stop is None or args.count is None:
                print("error: --param needs --from, --to and --count", file=sys.stderr)
                return 2
            try:
                axes = (SweepAxis(args.param, args.start, args.stop, args.count),)
            except ValueError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 2
        spec = RunSpec(
            config=args.config, theta0=args.theta0, delay=args.delay,
            detuning=args.detuning, phi=args.phi, init=args.init,
            t_max=args.tmax, steps_per_delay=args.steps_per_delay,
            output=args.output, fmt=args.fmt, sweep=axes,
        )
        return cmd_sweep(spec, steady=args.steady, preset=args.preset,
                         max_rows=args.max_rows)

    if args.command == "table1":
        return cmd_table1(args.delay, args.sample_t, args.output)

    return cmd_oracle_check(args.config, args.theta0, args.delay, args.init,
                            args.tmax, args.modes, args.half_width)


if __name__ == "__main__":
    sys.exit(main())
