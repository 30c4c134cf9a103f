"""Command-line front end.

Examples
--------
Spectrum sweep for a plot of the soft mode (plot +-w_- from the single
``wminus_*`` columns)::

    cranking spectrum --omega-x 3 --omega-y 2 --omega-min 0 --omega-max 4 --steps 400

Exit codes: 0 success, 1 computational error (error class on stderr),
2 usage error. The environment variable ``CRANK_SEED`` is reserved; no
command draws random numbers.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import bogoliubov, dynamics, ep_analysis, linalg
from .errors import CrankingError, EPTooClose, NoGrowth
from .model import (
    ModelParams,
    build_quadratic_form,
    eigenmodes,
    instability_interval,
    map_couplings,
    routhian_energy,
)

COMMANDS = (
    "spectrum", "couplings", "bogoliubov", "commutators", "ep-locate",
    "ep-scaling", "ep-encircle", "diabolic", "evolve", "growth",
)
SPECTRUM_FIELDS = ("Omega", "wplus_re", "wplus_im", "wminus_re", "wminus_im")


class UsageError(Exception):
    exit_code = 2


@dataclass
class RunConfig:
    command: str
    params: ModelParams
    sweep: Optional[tuple] = None  # (omega_min, omega_max, steps)
    format: str = "csv"
    out: Optional[str] = None
    options: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SweepRow:
    Omega: float
    wplus_re: float
    wplus_im: float
    wminus_re: float
    wminus_im: float


# --- argument parsing ---------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")

    def exit(self, status=0, message=None):
        if status:
            raise UsageError(message or "")
        if message:
            sys.stderr.write(message)
        raise SystemExit(status)


def _positive(x):
    try:
        v = float(x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {x!r}")
    if not math.isfinite(v) or v <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {x}")
    return v


def _finite(x):
    try:
        v = float(x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {x!r}")
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite, got {x}")
    return v


def _int_at_least(n):
    def conv(x):
        try:
            v = int(x)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {x!r}")
        if v < n:
            raise argparse.ArgumentTypeError(f"must be >= {n}, got {v}")
        return v
    return conv


def _float_list(x):
    try:
        vals = [float(t) for t in x.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {x!r}")
    if not vals or not all(math.isfinite(v) and v > 0 for v in vals):
        raise argparse.ArgumentTypeError("expected positive finite numbers")
    return vals


def _state(x):
    try:
        vals = [float(t) for t in x.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated state: {x!r}")
    if len(vals) != 4 or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError("state needs four finite values p_x,p_y,x,y")
    return vals


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--omega-x", type=_positive, default=3.0)
    common.add_argument("--omega-y", type=_positive, default=2.0)
    common.add_argument("--Omega", type=_finite, default=0.0, help="cranking frequency")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--out", default=None, help="output path (default stdout)")

    sweep = _Parser(add_help=False)
    sweep.add_argument("--omega-min", type=_finite, default=None)
    sweep.add_argument("--omega-max", type=_finite, default=None)
    sweep.add_argument("--steps", type=_int_at_least(2), default=None)

    parser = _Parser(prog="cranking", description="Cranked oscillator spectra and exceptional points")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("spectrum", parents=[common, sweep], help="w_+ and w_- versus Omega")
    sub.add_parser("couplings", parents=[common, sweep], help="boson couplings g_1, g_2")
    sub.add_parser("bogoliubov", parents=[common], help="normalised transform u, v")
    sub.add_parser("commutators", parents=[common, sweep], help="quasi-boson commutators")
    sub.add_parser("ep-locate", parents=[common], help="bisect the critical frequencies")

    sc = sub.add_parser("ep-scaling", parents=[common], help="near-EP power-law fits")
    sc.add_argument("--center", type=_positive, default=None)
    sc.add_argument("--quantity", choices=("component_norm", "overlap"), default="component_norm")
    sc.add_argument("--radii", type=_float_list, default=None)
    sc.add_argument("--side", choices=("stable", "unstable"), default="stable")

    en = sub.add_parser("ep-encircle", parents=[common], help="loop around a critical point")
    en.add_argument("--center", type=_positive, default=None)
    en.add_argument("--radius", type=_positive, default=None)
    en.add_argument("--n-steps", type=_int_at_least(64), default=256)
    en.add_argument("--loops", type=_int_at_least(1), default=1)
    en.add_argument("--direction", choices=("ccw", "cw"), default="ccw")

    di = sub.add_parser("diabolic", parents=[common], help="EP versus genuine degeneracy")
    di.add_argument("--omega", type=_positive, default=2.0)

    ev = sub.add_parser("evolve", parents=[common], help="classical phase-space flow")
    ev.add_argument("--state", type=_state, default=[1.0, 0.0, 0.0, 0.0])
    ev.add_argument("--t", type=_finite, default=1.0)
    ev.add_argument("--method", choices=("propagator", "rk4"), default="propagator")
    ev.add_argument("--dt", type=_positive, default=None)

    gr = sub.add_parser("growth", parents=[common], help="runaway rate inside the window")
    gr.add_argument("--state", type=_state, default=[1.0, 1.0, 1.0, 1.0])
    gr.add_argument("--t-max", type=_positive, default=None)
    return parser


def parse_args(argv) -> RunConfig:
    """Validate ``argv`` into a :class:`RunConfig`; raises :class:`UsageError`."""
    ns = _build_parser().parse_args(list(argv))
    opts = vars(ns).copy()
    command = opts.pop("command")
    wx, wy, W = opts.pop("omega_x"), opts.pop("omega_y"), opts.pop("Omega")
    fmt = opts.pop("format")
    out = opts.pop("out")

    sweep = None
    if "steps" in opts:
        lo, hi, steps = opts.pop("omega_min"), opts.pop("omega_max"), opts.pop("steps")
        given = [v is not None for v in (lo, hi, steps)]
        if any(given) and not all(given):
            raise UsageError("--omega-min, --omega-max and --steps must be given together")
        if all(given):
            if not lo < hi:
                raise UsageError(f"--omega-min ({lo}) must be below --omega-max ({hi})")
            sweep = (lo, hi, steps)

    if command == "diabolic":
        w = opts["omega"]
        wx = wy = w
        if W == 0.0:
            W = w
    if fmt is None:
        fmt = "csv" if command in ("spectrum", "couplings", "evolve") or sweep else "json"
    return RunConfig(command, ModelParams(wx, wy, W), sweep, fmt, out, opts)


# --- output -------------------------------------------------------------


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v) + 0.0, ".17g")
    return str(v)


def write_table(rows, fmt, sink) -> None:
    """Write ``rows`` (dataclasses or dicts sharing keys) as CSV or JSON."""
    if not rows:
        raise ValueError("no rows to write")
    dicts = [asdict(r) if hasattr(r, "__dataclass_fields__") else dict(r) for r in rows]
    keys = list(dicts[0])
    if fmt == "csv":
        w = csv.writer(sink, lineterminator="\n")
        w.writerow(keys)
        for d in dicts:
            w.writerow([_fmt(d[k]) for k in keys])
    elif fmt == "json":
        sink.write(json.dumps(dicts, indent=1))
        sink.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return {"re": x.real.tolist(), "im": x.imag.tolist()}
        return x.tolist()
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            continue
        else:
            out[key] = v
    return out


def write_report(report: dict, fmt, sink) -> None:
    obj = _jsonable(report)
    if fmt == "json":
        sink.write(json.dumps(obj, indent=1))
        sink.write("\n")
    else:
        write_table([_flatten(obj)], "csv", sink)


# --- commands -----------------------------------------------------------


def _grid(sweep):
    lo, hi, steps = sweep
    return [float(v) for v in np.linspace(lo, hi, steps)]


def spectrum_row(omega_x, omega_y, Omega) -> SweepRow:
    wp, wm = eigenmodes(ModelParams(omega_x, omega_y, Omega))
    return SweepRow(float(Omega), wp.real, wp.imag, wm.real, wm.imag)


def _cmd_spectrum(cfg):
    p = cfg.params
    grid = _grid(cfg.sweep) if cfg.sweep else [p.Omega.real]
    return [spectrum_row(p.omega_x, p.omega_y, W) for W in grid], True


def _cmd_couplings(cfg):
    p = cfg.params
    grid = _grid(cfg.sweep) if cfg.sweep else [p.Omega.real]
    rows = []
    for W in grid:
        c = map_couplings(p.omega_x, p.omega_y, W)
        rows.append({"Omega": W, "omega_1": c.omega_1, "omega_2": c.omega_2,
                     "g_1": c.g_1, "g_2": c.g_2})
    return rows, True


def _cmd_bogoliubov(cfg):
    t = bogoliubov.build_transform(cfg.params)
    return {
        "omega_x": cfg.params.omega_x,
        "omega_y": cfg.params.omega_y,
        "Omega": cfg.params.Omega.real,
        "continued_normalization": t.continued,
        "eigenvalues": list(t.eigenvalues),
        "u": t.u,
        "v": t.v,
        "normalization_deviation": bogoliubov.verify_normalization(t),
        "left_from_right_deviation": linalg.max_norm(bogoliubov.left_from_right(t.u) - t.v),
        "inverse_deviation": linalg.max_norm(t.v @ t.u - np.eye(4)),
    }, False


def _commutator_report(p):
    t = bogoliubov.build_transform(p)
    rep = bogoliubov.check_bosonic(p)
    rep["C"] = bogoliubov.commutator_matrix(t)
    return rep


def _cmd_commutators(cfg):
    p = cfg.params
    if not cfg.sweep:
        rep = _commutator_report(p)
        return dict(Omega=p.Omega.real, **rep), False
    rows = []
    for W in _grid(cfg.sweep):
        try:
            rep = bogoliubov.check_bosonic(p.with_Omega(W))
        except EPTooClose:
            # no transform at a critical grid point; the row says so explicitly
            rows.append({"Omega": W, "status": "EPTooClose", "is_bosonic": None,
                         "c23_re": None, "c23_im": None, "c14_re": None, "c14_im": None})
            continue
        rows.append({"Omega": W, "status": "ok", "is_bosonic": rep["is_bosonic"],
                     "c23_re": rep["c23"].real, "c23_im": rep["c23"].imag,
                     "c14_re": rep["c14"].real, "c14_im": rep["c14"].imag})
    return rows, True


def _cmd_ep_locate(cfg):
    p = cfg.params
    locs = ep_analysis.locate_eps(p.omega_x, p.omega_y)
    return {"omega_x": p.omega_x, "omega_y": p.omega_y,
            "eps": [asdict(e) for e in locs]}, False


def _default_center(p):
    return instability_interval(p)[0]


def _cmd_ep_scaling(cfg):
    p, o = cfg.params, cfg.options
    center = o["center"] if o["center"] is not None else _default_center(p)
    radii = o["radii"] if o["radii"] is not None else list(np.logspace(-3, -6, 10))
    fit = ep_analysis.scaling_exponent(p.omega_x, p.omega_y, center, o["quantity"], radii, o["side"])
    return asdict(fit), False


def _cmd_ep_encircle(cfg):
    p, o = cfg.params, cfg.options
    center = o["center"] if o["center"] is not None else _default_center(p)
    rep = ep_analysis.encircle_ep(p.omega_x, p.omega_y, center, o["radius"],
                                  o["n_steps"], o["direction"], o["loops"])
    d = asdict(rep)
    d["phase_angle_deg"] = math.degrees(math.atan2(rep.phase_factor.imag, rep.phase_factor.real))
    return d, False


def _cmd_diabolic(cfg):
    p = cfg.params
    rep = ep_analysis.diabolic_check(p.omega_x, p.Omega.real, omega_y=p.omega_y)
    return dict(omega=p.omega_x, Omega=p.Omega.real, **rep), False


def _cmd_evolve(cfg):
    p, o = cfg.params, cfg.options
    if o["method"] == "rk4":
        s = dynamics.evolve_rk4(p, o["state"], o["t"], o["dt"])
    else:
        s = dynamics.evolve(p, o["state"], o["t"])
    h = build_quadratic_form(p)
    row = {"t": o["t"], "p_x": s[0], "p_y": s[1], "x": s[2], "y": s[3],
           "energy": routhian_energy(s, h),
           "energy_initial": routhian_energy(o["state"], h)}
    return [row], True


def _cmd_growth(cfg):
    p, o = cfg.params, cfg.options
    rate = dynamics.unstable_rate(p)
    t_max = o["t_max"]
    if t_max is None:
        t_max = 20.0 / rate if rate > 0 else 50.0
    report = {"Omega": p.Omega.real, "t_max": t_max, "expected_rate": rate}
    try:
        report["slope"] = dynamics.growth_rate(p, o["state"], t_max)
        report["no_growth"] = False
    except NoGrowth as err:
        report["slope"] = err.slope
        report["no_growth"] = True
        err.report = report
        raise
    return report, False


DISPATCH = {
    "spectrum": _cmd_spectrum,
    "couplings": _cmd_couplings,
    "bogoliubov": _cmd_bogoliubov,
    "commutators": _cmd_commutators,
    "ep-locate": _cmd_ep_locate,
    "ep-scaling": _cmd_ep_scaling,
    "ep-encircle": _cmd_ep_encircle,
    "diabolic": _cmd_diabolic,
    "evolve": _cmd_evolve,
    "growth": _cmd_growth,
}


def _emit(cfg, result, is_table):
    buf = io.StringIO()
    if is_table:
        write_table(result, cfg.format, buf)
    else:
        write_report(result, cfg.format, buf)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def run(cfg: RunConfig) -> int:
    try:
        result, is_table = DISPATCH[cfg.command](cfg)
    except CrankingError as err:
        report = getattr(err, "report", None)
        if report is not None:
            _emit(cfg, report, False)
        sys.stderr.write(f"{type(err).__name__}: {err}\n")
        return 1
    try:
        _emit(cfg, result, is_table)
    except OSError as err:
        sys.stderr.write(f"IOError: {err}\n")
        return 1
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except UsageError as err:
        sys.stderr.write(f"{err}\n")
        return 2
    except ValueError as err:
        sys.stderr.write(f"cranking: error: {err}\n")
        return 2
    return run(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
