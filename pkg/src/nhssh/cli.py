"""Command-line driver for sweeps and figure-data reproduction.

Each invocation runs exactly one task and writes one CSV (RFC-4180, with a
``#`` comment block carrying the physics parameters), one JSON sidecar with
the fully resolved configuration, and, unless ``--no-plot`` is given, one
PNG figure next to the CSV.  Re-feeding a sidecar via ``--config``
reproduces the CSV byte for byte; flags given on the command line override
file values.  Grid syntax is ``start:stop:count`` with both endpoints
included.

Exit codes: 0 success, 2 configuration error, 3 numeric failure (the
failing parameter point is named on standard error).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import numpy as np

from . import __version__
from .errors import NhsshError, NoPeaksFound, OnCriticalLine
from .lattice import (
    Boundary,
    ModelParams,
    MomentumGrid,
    bulk_spectrum,
    obc_spectrum,
    surrogate_band_distance,
)
from .topology import classify_phase
from .thermo import delta_derivative_scan, fit_central_charge_cv, itc_scan, thermo_curve
from .entanglement import ee_scaling_fit, entanglement_result

TASKS = ("spectrum", "phase-diagram", "thermo", "ee", "ee-scaling", "derivatives", "itc")

_PHASE_LABELS = ["TrivialProtected", "TopoProtected", "TopoBroken", "TrivialBroken"]


class ConfigError(Exception):
    pass


class PointFailure(Exception):
    """Numeric failure tagged with the parameter point that produced it."""

    def __init__(self, point: str, cause: Exception):
        super().__init__(f"{type(cause).__name__} at {point}: {cause}")
        self.point = point
        self.cause = cause


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def parse_grid(text: str) -> np.ndarray:
    """Inclusive grid ``start:stop:count`` -> numpy.linspace."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid {text!r}: expected start:stop:count")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"grid {text!r}: {exc}") from None
    if count < 1:
        raise ConfigError(f"grid {text!r}: count must be >= 1")
    if stop < start:
        raise ConfigError(f"grid {text!r}: must be ascending")
    return np.linspace(start, stop, count)


def parse_int_list(text: str) -> list:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"size list {text!r}: {exc}") from None


_DEFAULTS = dict(
    t1=1.0, t2=1.0, delta=0.0, mu=0.0,
    L=120, delta_range=None, t1_range=None, L_list=None,
    T_range=None, beta_range=None, beta_max=None, beta_points=None,
    k_points=None, cut="half", order=2, step=1e-3, temperature=None,
    jobs=0, out=None, config=None, no_plot=False,
)


def _add_common(p: argparse.ArgumentParser) -> None:
    s = argparse.SUPPRESS
    p.add_argument("--t1", type=float, default=s, help="reciprocal intracell hopping")
    p.add_argument("--t2", type=float, default=s, help="intercell hopping (energy unit)")
    p.add_argument("--delta", type=float, default=s, help="non-reciprocal imbalance")
    p.add_argument("--mu", type=float, default=s, help="chemical potential")
    p.add_argument("--L", type=int, default=s, help="number of unit cells (2L sites)")
    p.add_argument("--L-list", dest="L_list", default=s,
                   help="comma-separated unit-cell counts (ee-scaling)")
    p.add_argument("--delta-range", dest="delta_range", default=s,
                   help="delta grid start:stop:count (inclusive)")
    p.add_argument("--t1-range", dest="t1_range", default=s,
                   help="t1 grid start:stop:count (phase-diagram)")
    p.add_argument("--T-range", "--T", dest="T_range", default=s,
                   help="temperature grid start:stop:count")
    p.add_argument("--beta-range", dest="beta_range", default=s,
                   help="inverse-temperature grid start:stop:count")
    p.add_argument("--beta-max", dest="beta_max", type=float, default=s,
                   help="shortcut: beta grid 1:BETA_MAX:BETA_POINTS")
    p.add_argument("--beta-points", dest="beta_points", type=int, default=s)
    p.add_argument("--k-points", dest="k_points", type=int, default=s,
                   help="momentum grid size for bulk references")
    p.add_argument("--cut", choices=("half", "centered"), default=s,
                   help="entanglement block geometry")
    p.add_argument("--order", type=int, default=s, help="derivative order (1 or 2)")
    p.add_argument("--step", type=float, default=s, help="finite-difference step")
    p.add_argument("--temperature", type=float, default=s,
                   help="temperature for the derivative scan (omit for T=0)")
    p.add_argument("--jobs", type=int, default=s,
                   help="worker processes (0 = all cores)")
    p.add_argument("--out", default=s, help="output CSV path")
    p.add_argument("--config", default=s, help="config file: sidecar JSON or key=value")
    p.add_argument("--no-plot", dest="no_plot", action="store_true", default=s,
                   help="skip the PNG figure")


def _load_config_file(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"config line {line!r}: expected key=value")
            key, value = line.split("=", 1)
            data[key.strip().replace("-", "_")] = value.strip()
        return data
    if not isinstance(data, dict):
        raise ConfigError("config JSON must be an object")
    if "config" in data and isinstance(data["config"], dict):
        merged = dict(data["config"])
        if "task" in data:
            merged["task"] = data["task"]
        return merged
    return {k.replace("-", "_"): v for k, v in data.items()}


def _coerce(key: str, value):
    if value is None or key not in _DEFAULTS:
        return value
    ref = _DEFAULTS[key]
    if key in ("delta_range", "t1_range", "T_range", "beta_range", "L_list",
               "out", "config", "cut"):
        return None if value in (None, "") else str(value)
    if isinstance(ref, bool):
        return value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes")
    if isinstance(ref, int) and not isinstance(value, bool):
        return int(value)
    if isinstance(ref, float):
        return float(value)
    if ref is None and key in ("beta_max", "temperature"):
        return float(value)
    if ref is None and key in ("beta_points", "k_points"):
        return int(value)
    return value


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge defaults, config file, and explicit flags (flags win)."""
    supplied = {k: v for k, v in vars(args).items() if k not in ("task", "func")}
    cfg = dict(_DEFAULTS)
    if "config" in supplied:
        file_cfg = _load_config_file(supplied["config"])
        task = file_cfg.pop("task", None)
        if task is not None and task != args.task:
            raise ConfigError(
                f"config file is for task {task!r}, invoked task is {args.task!r}"
            )
        for key, value in file_cfg.items():
            if key not in _DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
            cfg[key] = _coerce(key, value)
    for key, value in supplied.items():
        cfg[key] = _coerce(key, value)
    if cfg["jobs"] in (0, None):
        cfg["jobs"] = os.cpu_count() or 1
    if cfg["jobs"] < 1:
        raise ConfigError(f"--jobs must be positive, got {cfg['jobs']}")
    if cfg["order"] not in (1, 2):
        raise ConfigError(f"--order must be 1 or 2, got {cfg['order']}")
    if cfg["L"] < 2:
        raise ConfigError(f"--L must be >= 2, got {cfg['L']}")
    return cfg


def _params(cfg: dict, **overrides) -> ModelParams:
    kw = dict(
        t1=cfg["t1"], length=cfg["L"], t2=cfg["t2"], delta=cfg["delta"],
        boundary=Boundary.OBC, mu=cfg["mu"],
    )
    kw.update(overrides)
    try:
        return ModelParams(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _point_str(**kw) -> str:
    return "(" + ", ".join(f"{k}={_fmt(v)}" for k, v in kw.items()) + ")"


def _run_map(fn, items, jobs: int):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


# Worker functions live at module scope so process pools can pickle them.

def _phase_worker(item):
    t1, t2, delta = item
    try:
        pt = classify_phase(ModelParams(t1=t1, length=4, t2=t2, delta=delta))
        return (pt.winding, pt.label, pt.protected)
    except OnCriticalLine:
        return ("", "OnCriticalLine", "")
    except NhsshError as exc:
        raise PointFailure(_point_str(t1=t1, t2=t2, delta=delta), exc) from exc


def _ee_worker(item):
    t1, t2, delta, length, mu, cut = item
    try:
        res = entanglement_result(
            ModelParams(t1=t1, length=length, t2=t2, delta=delta, mu=mu), cut
        )
        n_half = int(np.count_nonzero(np.abs(res.xi - 0.5) < 0.01))
        return (res.entropy, n_half)
    except NhsshError as exc:
        raise PointFailure(
            _point_str(t1=t1, t2=t2, delta=delta, L=length, cut=cut), exc
        ) from exc


def _scaling_worker(item):
    t1, t2, delta, length, mu, cut = item
    try:
        res = entanglement_result(
            ModelParams(t1=t1, length=length, t2=t2, delta=delta, mu=mu), cut
        )
        return res.entropy
    except NhsshError as exc:
        raise PointFailure(
            _point_str(t1=t1, t2=t2, delta=delta, L=length, cut=cut), exc
        ) from exc


def _task_spectrum(cfg: dict):
    p = _params(cfg)
    grid = MomentumGrid.uniform(cfg["k_points"]) if cfg["k_points"] else None
    try:
        e_open = obc_spectrum(p)
        e_bulk = bulk_spectrum(p, grid)
        dist = float(np.max(surrogate_band_distance(
            e_open[np.abs(e_open) > 1e-8 * np.max(np.abs(e_open))], p)))
    except NhsshError as exc:
        raise PointFailure(_point_str(t1=p.t1, t2=p.t2, delta=p.delta, L=p.length), exc)
    columns = ["t1", "t2", "delta", "length", "source", "index", "re_e", "im_e"]
    rows = []
    for source, energies in (("open", e_open), ("bulk", e_bulk)):
        for i, e in enumerate(energies):
            rows.append([p.t1, p.t2, p.delta, p.length, source, i, e.real, e.imag])
    results = {"max_band_distance": dist, "n_modes": len(e_open)}

    def figure(path):
        from .plots import fig_spectrum
        return fig_spectrum(e_open, e_bulk, path,
                            f"t1={p.t1} t2={p.t2} delta={p.delta} L={p.length}")

    return columns, rows, results, [], figure


def _task_phase_diagram(cfg: dict):
    if not cfg["t1_range"] or not cfg["delta_range"]:
        raise ConfigError("phase-diagram needs --t1-range and --delta-range")
    t1s = parse_grid(cfg["t1_range"])
    deltas = parse_grid(cfg["delta_range"])
    items = [(float(t1), cfg["t2"], float(d)) for t1 in t1s for d in deltas]
    out = _run_map(_phase_worker, items, cfg["jobs"])
    columns = ["t1", "t2", "delta", "winding", "label", "protected"]
    rows = [
        [t1, t2, d, w, label, prot]
        for (t1, t2, d), (w, label, prot) in zip(items, out)
    ]
    counts: dict = {}
    for _, label, _ in out:
        counts[label] = counts.get(label, 0) + 1
    results = {"label_counts": counts}

    def figure(path):
        from .plots import fig_phase_diagram
        code = {label: i for i, label in enumerate(_PHASE_LABELS)}
        grid = np.array([code.get(label, -1) for (_, label, _) in out])
        return fig_phase_diagram(
            t1s, deltas, grid.reshape(len(t1s), len(deltas)), path,
            _PHASE_LABELS,
        )

    return columns, rows, results, [], figure


def _task_thermo(cfg: dict):
    if not cfg["T_range"]:
        raise ConfigError("thermo needs --T-range")
    temps = parse_grid(cfg["T_range"])
    if temps[0] <= 0:
        raise ConfigError("temperature grid must be strictly positive")
    p = _params(cfg)
    grid = MomentumGrid.uniform(cfg["k_points"]) if cfg["k_points"] else None
    try:
        curve = thermo_curve(p, temps, grid)
    except NhsshError as exc:
        raise PointFailure(_point_str(t1=p.t1, t2=p.t2, delta=p.delta, L=p.length), exc)
    columns = ["t1", "t2", "delta", "length", "temperature",
               "s_bulk", "s_edge", "cv_bulk", "cv_edge"]
    rows = [
        [p.t1, p.t2, p.delta, p.length, T, sb, se, cb, ce]
        for T, sb, se, cb, ce in zip(
            curve.temperatures, curve.s_bulk, curve.s_edge,
            curve.cv_bulk, curve.cv_edge)
    ]
    results = {}
    report = []
    in_window = (temps >= 0.02) & (temps <= 0.1)
    if np.count_nonzero(in_window) >= 5:
        fit = fit_central_charge_cv(curve)
        results["central_charge_fit"] = {
            "slope": fit.slope, "central_charge": fit.central_charge,
            "residual": fit.residual, "n_points": fit.n_points,
        }
        report.append(f"central_charge={fit.central_charge:.4f} "
                      f"(cv/T slope {fit.slope:.4f} over [0.02, 0.1])")

    def figure(path):
        from .plots import fig_thermo
        return fig_thermo(curve.temperatures, curve.s_bulk, curve.s_edge,
                          curve.cv_bulk, path,
                          f"t1={p.t1} t2={p.t2} delta={p.delta} L={p.length}")

    return columns, rows, results, report, figure


def _task_ee(cfg: dict):
    if cfg["delta_range"]:
        deltas = parse_grid(cfg["delta_range"])
    else:
        deltas = np.array([cfg["delta"]])
    items = [
        (cfg["t1"], cfg["t2"], float(d), cfg["L"], cfg["mu"], cfg["cut"])
        for d in deltas
    ]
    out = _run_map(_ee_worker, items, cfg["jobs"])
    columns = ["t1", "t2", "delta", "length", "cut", "entropy", "n_xi_near_half"]
    rows = [
        [t1, t2, d, L, cut, s, n]
        for (t1, t2, d, L, mu, cut), (s, n) in zip(items, out)
    ]
    results = {"max_entropy": float(max(s for s, _ in out))}

    def figure(path):
        from .plots import fig_ee
        return fig_ee(deltas, np.array([s for s, _ in out]), path,
                      f"t1={cfg['t1']} L={cfg['L']} cut={cfg['cut']}")

    return columns, rows, results, [], figure


def _task_ee_scaling(cfg: dict):
    if not cfg["L_list"]:
        raise ConfigError("ee-scaling needs --L-list")
    lengths = parse_int_list(cfg["L_list"])
    items = [
        (cfg["t1"], cfg["t2"], cfg["delta"], int(L), cfg["mu"], cfg["cut"])
        for L in sorted(lengths)
    ]
    entropies = _run_map(_scaling_worker, items, cfg["jobs"])
    lengths_arr = np.array([it[3] for it in items], dtype=int)
    ent_arr = np.array(entropies)
    x = np.log(lengths_arr.astype(float))
    slope, intercept = np.polyfit(x, ent_arr, 1)
    points = 1 if cfg["cut"] == "half" else 2
    charge = 6.0 * slope / points
    residual = float(np.sqrt(np.mean((ent_arr - slope * x - intercept) ** 2)))
    columns = ["t1", "t2", "delta", "length", "cut", "entropy"]
    rows = [
        [cfg["t1"], cfg["t2"], cfg["delta"], int(L), cfg["cut"], s]
        for L, s in zip(lengths_arr, ent_arr)
    ]
    results = {"slope": float(slope), "intercept": float(intercept),
               "central_charge": float(charge), "residual": residual}
    report = [f"slope={slope:.4f} central_charge={charge:.4f} residual={residual:.2e}"]

    def figure(path):
        from .plots import fig_ee_scaling
        return fig_ee_scaling(lengths_arr, ent_arr, float(slope), float(intercept),
                              path, f"t1={cfg['t1']} delta={cfg['delta']} cut={cfg['cut']}")

    return columns, rows, results, report, figure


def _task_derivatives(cfg: dict):
    if not cfg["delta_range"]:
        raise ConfigError("derivatives needs --delta-range")
    deltas = parse_grid(cfg["delta_range"])
    p = _params(cfg)
    try:
        scan = delta_derivative_scan(
            p, deltas, order=cfg["order"], step=cfg["step"],
            temperature=cfg["temperature"],
        )
    except NhsshError as exc:
        raise PointFailure(
            _point_str(t1=p.t1, t2=p.t2, L=p.length,
                       delta_range=cfg["delta_range"], step=cfg["step"]),
            exc,
        )
    columns = ["t1", "t2", "delta", "length", "order", "step",
               "d_bulk_per_site", "d_edge"]
    rows = [
        [p.t1, p.t2, d, p.length, scan.order, scan.step, db, de]
        for d, db, de in zip(scan.deltas, scan.d_bulk_per_site, scan.d_edge)
    ]
    jump = np.abs(np.diff(scan.d_edge))
    loc = float(0.5 * (deltas[np.argmax(jump)] + deltas[np.argmax(jump) + 1]))
    results = {"max_edge_jump": float(np.max(jump)), "max_edge_jump_at": loc}

    def figure(path):
        from .plots import fig_derivatives
        return fig_derivatives(scan.deltas, scan.d_bulk_per_site, scan.d_edge,
                               scan.order, path,
                               f"t1={p.t1} L={p.length} order={scan.order}")

    return columns, rows, results, [], figure


def _task_itc(cfg: dict):
    if cfg["beta_range"]:
        betas = parse_grid(cfg["beta_range"])
    elif cfg["beta_max"]:
        betas = parse_grid(f"1:{cfg['beta_max']}:{cfg['beta_points'] or 1000}")
    else:
        raise ConfigError("itc needs --beta-range or --beta-max/--beta-points")
    if betas[0] <= 0:
        raise ConfigError("beta grid must be strictly positive")
    p = _params(cfg)
    grid = MomentumGrid.uniform(cfg["k_points"]) if cfg["k_points"] else None
    report = []
    try:
        rep = itc_scan(p, betas, grid)
        cv = rep.cv
        results = {
            "peak_betas": [float(b) for b in rep.peak_betas],
            "measured_period": rep.period_measured,
            "predicted_period": rep.period_expected,
        }
        predicted = "none" if rep.period_expected is None else f"{rep.period_expected:.4g}"
        report.append(f"measured_period={rep.period_measured:.4g} predicted={predicted}")
        peak_betas = rep.peak_betas
    except NoPeaksFound:
        from .thermo import heat_capacity
        e_ref = bulk_spectrum(p, grid)
        cv = np.array([heat_capacity(e_ref, 1.0 / b, p.mu) for b in betas]) / p.length
        results = {"peak_betas": [], "measured_period": None, "predicted_period": None}
        report.append("no_peaks_detected")
        peak_betas = np.array([])
    except NhsshError as exc:
        raise PointFailure(_point_str(t1=p.t1, t2=p.t2, delta=p.delta, L=p.length), exc)
    columns = ["t1", "t2", "delta", "length", "beta", "cv"]
    rows = [[p.t1, p.t2, p.delta, p.length, b, c] for b, c in zip(betas, cv)]

    def figure(path):
        from .plots import fig_itc
        return fig_itc(betas, cv, peak_betas, path,
                       f"t1={p.t1} delta={p.delta} L={p.length}")

    return columns, rows, results, report, figure


_TASK_FNS = {
    "spectrum": _task_spectrum,
    "phase-diagram": _task_phase_diagram,
    "thermo": _task_thermo,
    "ee": _task_ee,
    "ee-scaling": _task_ee_scaling,
    "derivatives": _task_derivatives,
    "itc": _task_itc,
}

_PHYSICS_KEYS = ("t1", "t2", "delta", "mu", "L", "L_list", "delta_range",
                 "t1_range", "T_range", "beta_range", "beta_max", "beta_points",
                 "k_points", "cut", "order", "step", "temperature")


def _write_csv(path: str, task: str, cfg: dict, columns: list, rows: list) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# nhssh {task} v{__version__}\n")
        relevant = [k for k in _PHYSICS_KEYS if cfg.get(k) not in (None, "")]
        fh.write("# " + " ".join(f"{k}={cfg[k]}" for k in relevant) + "\n")
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _write_sidecar(path: str, task: str, cfg: dict, results: dict,
                   wall_time: float) -> None:
    payload = {
        "task": task,
        "version": __version__,
        "config": {k: v for k, v in cfg.items() if k != "config"},
        "wall_time_s": round(wall_time, 3),
        "results": results,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nhssh",
        description=(
            "Thermodynamics, topology, and entanglement sweeps for reciprocal "
            "and non-reciprocal SSH chains. Grids use start:stop:count with "
            "both endpoints included."
        ),
    )
    parser.add_argument("--version", action="version", version=f"nhssh {__version__}")
    sub = parser.add_subparsers(dest="task", required=True)
    descriptions = {
        "spectrum": "open-chain vs bulk-reference eigenvalues at one parameter point",
        "phase-diagram": "winding and phase label over a (t1, delta) grid",
        "thermo": "entropy and heat capacity over a temperature sweep",
        "ee": "entanglement entropy over a delta sweep",
        "ee-scaling": "entanglement entropy over system sizes, with log fit",
        "derivatives": "finite-difference grand-potential derivatives over delta",
        "itc": "heat capacity over inverse temperature, with spike detection",
    }
    for task in TASKS:
        p = sub.add_parser(task, help=descriptions[task])
        _add_common(p)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        task_fn = _TASK_FNS[args.task]
        t0 = time.monotonic()
        columns, rows, results, report, figure = task_fn(cfg)
        out = cfg["out"] or f"nhssh_{args.task.replace('-', '_')}.csv"
        _write_csv(out, args.task, cfg, columns, rows)
        fig_path = None
        if not cfg["no_plot"]:
            fig_path = figure(os.path.splitext(out)[0] + ".png")
        results["figure"] = fig_path
        _write_sidecar(out + ".json", args.task, cfg, results, time.monotonic() - t0)
        for line in report:
            print(line)
        print(f"wrote {out}" + (f" and {fig_path}" if fig_path else ""))
        return 0
    except ConfigError as exc:
        print(f"nhssh: config error: {exc}", file=sys.stderr)
        return 2
    except PointFailure as exc:
        print(f"nhssh: numeric failure: {exc}", file=sys.stderr)
        return 3
    except NhsshError as exc:
        print(f"nhssh: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
