"""Command-line interface.

Exit codes
----------
0 success, 1 unexpected failure, 2 invalid configuration, 3 singular system,
4 no analytic counterpart, 5 no net cooling, 6 zero transduction gain,
7 optimum on a search boundary, 8 no backaction cancellation found.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, analytic, dressed, engine, sweep
from .errors import (
    BoundaryError,
    NoAnalyticCounterpartError,
    NoCancellationError,
    NoNetCoolingError,
    SingularityError,
    TransducerError,
    ValidationError,
    ZeroGainError,
)
from .model import (
    DriveConfig,
    MechanicalOscillator,
    ModeLadder,
    SystemConfig,
    derive_params,
    make_grid,
    zpf_reference,
)

EXIT_CODES = (
    (ValidationError, 2),
    (SingularityError, 3),
    (NoAnalyticCounterpartError, 4),
    (NoNetCoolingError, 5),
    (ZeroGainError, 6),
    (BoundaryError, 7),
    (NoCancellationError, 8),
)

SCHEMA = {
    "mechanics": {"omega_m": True, "gamma_m": True, "mass_eff": True},
    "ladder": {"detunings": True, "kappa_ext": True, "kappa_0": False},
    "drive": {"power": True, "omega_0": True, "pull": True},
    "run": {
        "theta": False,
        "reservoir_mode": False,
        "grid_min": False,
        "grid_max": False,
        "grid_points": False,
        "grid_spacing": False,
        "frequency_unit": False,
    },
    "dressed": {"g_c": False, "omega_deg": False},
}
OPTIONAL_SECTIONS = ("run", "dressed")

CSV_HEADER = ("omega_rad_s", "S_imp", "S_ba_referred", "S_cross_sym", "S_total", "S_total_over_zpf")


def fmt(x: float) -> str:
    return "%.17g" % x


def jsonable(obj):
    """Plain JSON types with non-finite floats mapped to null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(float(obj.real)), jsonable(float(obj.imag))]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def dump_json(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


# ---------------------------------------------------------------- config


class LoadedConfig:
    def __init__(self, system: SystemConfig, grid_spec: dict, dressed_opts: dict, digest: str, path: str):
        self.system = system
        self.grid_spec = grid_spec
        self.dressed = dressed_opts
        self.digest = digest
        self.path = path


def _float(section, key, text, problems):
    try:
        v = float(text)
    except ValueError:
        problems.append(f"[{section}] {key}: not a number: {text!r}")
        return None
    return v


def load_config(path, overrides: "dict | None" = None) -> LoadedConfig:
    """Parse and validate a scenario file, reporting every problem found."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ValidationError(f"config: cannot read {path!r}: {exc.strerror}") from None
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(raw.decode("utf-8"), source=str(path))
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ValidationError(f"config: cannot parse {path!r}: {exc}") from None

    problems: list[str] = []
    values: dict[str, dict] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            problems.append(f"[{section}]: unknown section")
            continue
        for key in parser[section]:
            if key not in SCHEMA[section]:
                problems.append(f"[{section}] {key}: unknown key")
    for section, keys in SCHEMA.items():
        present = parser.has_section(section)
        if not present and section not in OPTIONAL_SECTIONS:
            problems.append(f"[{section}]: missing section")
        sec = parser[section] if present else {}
        values[section] = {}
        for key, required in keys.items():
            if key in sec:
                values[section][key] = sec[key].strip()
            elif required:
                problems.append(f"[{section}] {key}: missing required key")

    run = values["run"]
    for key, val in (overrides or {}).items():
        if val is not None:
            run[key] = str(val)
    unit = run.get("frequency_unit", "rad_s")
    if unit != "rad_s":
        problems.append(f"[run] frequency_unit: only 'rad_s' is accepted, got {unit!r}")

    num = {}
    for section in ("mechanics", "ladder", "drive", "dressed"):
        for key, text in values[section].items():
            if key != "detunings":
                num[key] = _float(section, key, text, problems)
    det = None
    if "detunings" in values["ladder"]:
        parts = [p.strip() for p in values["ladder"]["detunings"].split(",") if p.strip()]
        det = [_float("ladder", "detunings", p, problems) for p in parts]
        if not parts:
            problems.append("[ladder] detunings: empty list")
    theta = _float("run", "theta", run["theta"], problems) if "theta" in run else math.pi / 2
    points = None
    if "grid_points" in run:
        try:
            points = int(run["grid_points"])
        except ValueError:
            problems.append(f"[run] grid_points: not an integer: {run['grid_points']!r}")
    gmin = _float("run", "grid_min", run["grid_min"], problems) if "grid_min" in run else None
    gmax = _float("run", "grid_max", run["grid_max"], problems) if "grid_max" in run else None
    if problems:
        raise ValidationError(problems)

    def build(label, fn):
        try:
            return fn()
        except ValidationError as exc:
            problems.extend(f"[{label}] {p}" for p in exc.problems)
            return None

    osc = build("mechanics", lambda: MechanicalOscillator(num["omega_m"], num["gamma_m"], num["mass_eff"]))
    ladder = build("ladder", lambda: ModeLadder(tuple(det), num["kappa_ext"], num.get("kappa_0", 0.0) or 0.0))
    drive = build("drive", lambda: DriveConfig(num["power"], num["omega_0"], num["pull"]))
    grid_spec = None
    if osc is not None:
        grid_spec = {
            "grid_min": -2.0 * osc.omega_m if gmin is None else gmin,
            "grid_max": 2.0 * osc.omega_m if gmax is None else gmax,
            "grid_points": 2001 if points is None else points,
            "grid_spacing": run.get("grid_spacing", "linear"),
        }
    grid = build("run", lambda: make_grid(grid_spec["grid_min"], grid_spec["grid_max"],
                                          grid_spec["grid_points"], grid_spec["grid_spacing"])) if grid_spec else None
    system = None
    if not problems:
        system = build("run", lambda: SystemConfig(osc, ladder, drive, theta,
                                                   run.get("reservoir_mode", "shared_quantum"), grid))
    if problems:
        raise ValidationError(problems)
    dressed_opts = {k: num[k] for k in ("g_c", "omega_deg") if k in num}
    return LoadedConfig(system, grid_spec, dressed_opts, hashlib.sha256(raw).hexdigest(), str(path))


def resolved_config(cfg: LoadedConfig) -> dict:
    s = cfg.system
    d = derive_params(s)
    osc, lad, drv = s.oscillator, s.ladder, s.drive
    return {
        "mechanics": {"omega_m": osc.omega_m, "gamma_m": osc.gamma_m, "mass_eff": osc.mass_eff},
        "ladder": {"detunings": list(lad.detunings), "kappa_ext": lad.kappa_ext, "kappa_0": lad.kappa_0},
        "drive": {"power": drv.power, "omega_0": drv.omega_0, "pull": drv.pull},
        "run": {"theta": s.theta, "reservoir_mode": s.reservoir_mode.value, "frequency_unit": "rad_s",
                **cfg.grid_spec},
        "derived": {"x0": d.x0, "kappa_tot": d.kappa_tot, "eta_c": d.eta_c, "s_in": d.s_in,
                    "alpha_bar": complex(d.alpha_bar), "g_m": d.g_m},
    }


def manifest(cfg: LoadedConfig, command: str, options: dict) -> dict:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch and epoch.strip().isdigit() else int(time.time())
    return {
        "tool": "mmtransducer",
        "version": __version__,
        "command": command,
        "options": options,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t)),
        "input_sha256": cfg.digest,
        "resolved_config": resolved_config(cfg),
    }


# ---------------------------------------------------------------- outputs


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _paths(out: str) -> tuple[Path, Path, Path]:
    p = Path(out)
    base = p.with_suffix("") if p.suffix else p
    return p, base.with_name(base.name + ".summary.json"), base.with_name(base.name + ".manifest.json")


def emit(args, cfg, command, options, table=None, summary=None):
    """Write outputs next to --out, or print them when no --out is given."""
    if args.out is None:
        if table is not None:
            sys.stdout.write(table)
        if summary is not None:
            (sys.stderr if table is not None else sys.stdout).write(dump_json(summary))
        return
    main_path, summary_path, manifest_path = _paths(args.out)
    main_path.parent.mkdir(parents=True, exist_ok=True)
    if table is not None:
        main_path.write_bytes(table.encode("utf-8"))
        if summary is not None:
            summary_path.write_bytes(dump_json(summary).encode("utf-8"))
    else:
        main_path.write_bytes(dump_json(summary).encode("utf-8"))
    manifest_path.write_bytes(dump_json(manifest(cfg, command, options)).encode("utf-8"))


# ---------------------------------------------------------------- commands


def budget_rows(config: SystemConfig, omega: np.ndarray, threads: int = 1) -> np.ndarray:
    """Rows (Ω, S_imp, S_ba_referred, S_cross_sym, S_total, S_total/zpf)."""
    threads = max(1, int(threads))

    def block(w):
        nb = engine.noise_budget(config, w, include_cross=True)
        total = nb.total
        zpf = zpf_reference(config.oscillator, config.oscillator.omega_m)
        return np.column_stack([w, nb.imprecision, nb.backaction, nb.cross, total, total / zpf])

    if threads == 1 or omega.size < 2 * threads:
        return block(omega)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.vstack(list(pool.map(block, np.array_split(omega, threads))))


def cmd_spectrum(args, cfg: LoadedConfig) -> int:
    s = cfg.system
    rows = budget_rows(s, s.omega, args.threads)
    wm = s.oscillator.omega_m
    marks = {"omega_m": wm, "minus_omega_m": -wm, "half_omega_m": wm / 2, "zero": 0.0}
    pts = budget_rows(s, np.array(list(marks.values())))
    summary = {
        "zpf_reference": float(zpf_reference(s.oscillator, wm)),
        "points": {name: dict(zip(CSV_HEADER, row)) for name, row in zip(marks, pts)},
    }
    emit(args, cfg, "spectrum", {}, csv_text(CSV_HEADER, rows), summary)
    return 0


def _scheme(ladder: ModeLadder, omega_m: float) -> analytic.SchemeKind:
    d = np.array(ladder.detunings)
    tol = 1e-12 * omega_m
    canon = {
        analytic.SchemeKind.SINGLE: [0.0],
        analytic.SchemeKind.DUAL: [0.0, omega_m],
        analytic.SchemeKind.TRIPLE: [-omega_m, 0.0, omega_m],
    }
    for kind, target in canon.items():
        if d.size == len(target) and np.all(np.abs(np.sort(d) - np.array(target)) <= tol):
            return kind
    raise NoAnalyticCounterpartError(
        f"ladder {list(ladder.detunings)} is not a canonical single, dual or triple scheme"
    )


def _max_rel(a, b) -> float:
    return float(np.max(np.abs(a / b - 1.0)))


def compare_report(config: SystemConfig) -> dict:
    """Analytic-vs-engine deviations for the canonical schemes."""
    wm = config.oscillator.omega_m
    kind = _scheme(config.ladder, wm)
    d = derive_params(config)
    k = d.kappa_tot
    w = config.omega
    checks = {}
    mode = config.reservoir_mode.value
    if kind is analytic.SchemeKind.DUAL:
        sff = engine.backaction_spectrum(config, w)
        peak = float(np.max(sff))
        i = int(np.argmin(sff))
        step = float(np.max(np.diff(w))) if w.size > 1 else math.inf
        located = abs(w[i] - wm / 2) <= step
        half = float(engine.backaction_spectrum(config, wm / 2)) / peak
        zero = {"grid_argmin": float(w[i]), "expected": wm / 2, "grid_step": step,
                "relative_value_at_expected": half}
        if mode == "shared_quantum":
            ref = analytic.dual_sff(d.x0, d.g_m, k, w, wm)
            keep = ref > 1e-6 * np.max(ref)
            dev = _max_rel(sff[keep] / engine.backaction_spectrum(config, wm),
                           ref[keep] / analytic.dual_sff(d.x0, d.g_m, k, wm, wm))
            checks["dual_sff_shape"] = {"max_rel_deviation": dev, "tolerance": 1e-6, "pass": dev < 1e-6}
            checks["zero_crossing"] = {**zero, "expected_present": True,
                                       "pass": bool(located and half <= 1e-10)}
        else:
            # without cross-damping the dip at Ω_m/2 stays finite; absent means above
            # the cancellation threshold used by the detuning search
            checks["zero_crossing"] = {**zero, "expected_present": False, "pass": bool(half >= 1e-8)}
    else:
        imp = engine.imprecision_spectrum(config, w, d)
        imp0 = engine.imprecision_spectrum(config, 0.0, d)
        if kind is analytic.SchemeKind.TRIPLE:
            keep = np.abs(np.abs(w) - wm / math.sqrt(3.0)) > 1e-3 * wm
            ref = analytic.triple_bracket(k, w[keep], wm)
            name = "triple_sxx_shape"
        else:
            keep = np.ones(w.size, bool)
            ref = analytic.single_sxx(k, 1.0, 1.0, 1.0, w) / analytic.single_sxx(k, 1.0, 1.0, 1.0, 0.0)
            name = "single_sxx_shape"
        dev = _max_rel(imp[keep] / imp0, ref)
        checks[name] = {"max_rel_deviation": dev, "tolerance": 1e-6, "pass": dev < 1e-6,
                        "points": int(np.count_nonzero(keep))}
    if kind is not analytic.SchemeKind.DUAL and config.theta == math.pi / 2 and mode == "shared_quantum":
        sxx = engine.imprecision_spectrum(config, w, d, symmetrized=True)
        sff = engine.backaction_spectrum(config, w, d, symmetrized=True)
        prod = np.sqrt(sxx * sff)
        dev = _max_rel(prod, analytic.heisenberg_product(d.eta_c))
        checks["heisenberg_product"] = {"max_rel_deviation": dev, "tolerance": 1e-6, "pass": dev < 1e-6}
    return {"scheme": kind.value, "reservoir_mode": mode, "checks": checks,
            "pass": all(c["pass"] for c in checks.values())}


def cmd_compare(args, cfg: LoadedConfig) -> int:
    emit(args, cfg, "compare", {}, summary=compare_report(cfg.system))
    return 0


def cmd_cool(args, cfg: LoadedConfig) -> int:
    s = cfg.system
    d = derive_params(s)
    wm = s.oscillator.omega_m
    n_engine = engine.cooling_occupancy(s, d)
    n_formula = analytic.dual_cooling_limit(d.kappa_tot, wm)
    summary = {
        "n_f_engine": n_engine,
        "n_f_formula": n_formula,
        "relative_deviation": n_engine / n_formula - 1.0,
        "stated_limits": analytic.stated_limits(d.g_m, d.kappa_tot, wm),
    }
    emit(args, cfg, "cool", {}, summary=summary)
    return 0


def cmd_sweep(args, cfg: LoadedConfig) -> int:
    s = cfg.system
    spec = sweep.SweepSpec(s, args.axis, args.min, args.max, args.points, args.spacing, args.objective)
    res = sweep.run_sweep(spec, threads=args.threads)
    rows = np.column_stack([res.axis_values, res.values])
    summary = {
        "axis": res.axis,
        "objective": spec.objective.value,
        "argmin": res.argmin,
        "min_value": res.min_value,
        "bracket_width": res.bracket_width,
        "at_boundary": res.at_boundary,
        "gaps": list(res.gaps),
    }
    if args.strict and res.at_boundary:
        raise BoundaryError("sweep minimum lies on the range boundary", res.argmin, res.min_value)
    if spec.axis is sweep.Axis.POWER and spec.objective is sweep.Objective.TOTAL_NOISE_AT_OMEGA_M:
        try:
            p = sweep.find_p_sql(s, p_range=(args.min, args.max))
            summary["p_sql"] = {"p_sql": p.p_sql, "min_normalized_noise": p.min_normalized_noise,
                                "g_m": p.g_m, "bracket_width": p.bracket_width}
        except BoundaryError as exc:
            if args.strict:
                raise
            summary["p_sql"] = {"error": str(exc)}
    if spec.axis is sweep.Axis.DETUNING and spec.objective is sweep.Objective.BACKACTION_AT_MINUS_OMEGA_M:
        try:
            c = sweep.find_cancellation_detuning(s, window=(args.min, args.max))
            summary["cancellation"] = {"found": True, "offset": c.offset, "relative_value": c.relative_value}
        except NoCancellationError as exc:
            if args.strict:
                raise
            summary["cancellation"] = {"found": False, "offset": exc.best.offset,
                                       "relative_value": exc.best.relative_value}
    options = {"axis": res.axis, "min": args.min, "max": args.max, "points": args.points,
               "spacing": args.spacing, "objective": spec.objective.value, "strict": args.strict}
    emit(args, cfg, "sweep", options, csv_text((res.axis, spec.objective.value), rows), summary)
    return 0


def cmd_dressed(args, cfg: LoadedConfig) -> int:
    s = cfg.system
    wm = s.oscillator.omega_m
    gc_req = dressed.required_gc(wm)
    g_c = args.g_c if args.g_c is not None else cfg.dressed.get("g_c", gc_req)
    omega_deg = cfg.dressed.get("omega_deg", s.drive.omega_0)
    t = dressed.CoupledTriplet(omega_deg, g_c, kappa_tot=s.ladder.kappa_tot)
    modes = dressed.normal_modes(t)
    ind = dressed.induced_multimode_coupling(t)
    cmp = dressed.compare_reference_basis(t)
    summary = {
        "omega_deg": omega_deg,
        "g_c": g_c,
        "required_gc": gc_req,
        "strong_coupling": t.strong_coupling,
        "eigenfrequencies": modes.eigenfrequencies,
        "shifts": modes.shifts,
        "spacings": modes.spacings,
        "basis_change": modes.basis_change,
        "coupling_weights": ind.weights,
        "coupling_weight_magnitudes": np.abs(ind.weights),
        "equal_magnitude": ind.equal_magnitude,
        "reference_basis_mismatch": cmp["mismatch"],
        "reference_basis_rows": cmp["rows"],
    }
    emit(args, cfg, "dressed", {"g_c": g_c}, summary=summary)
    return 0


COMMANDS = {
    "spectrum": cmd_spectrum,
    "compare": cmd_compare,
    "cool": cmd_cool,
    "sweep": cmd_sweep,
    "dressed": cmd_dressed,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="scenario file (INI, frequencies in rad/s)")
    common.add_argument("--out", help="output path; summary and manifest are written beside it")
    common.add_argument("--threads", type=int, default=1, help="worker threads (results are thread-invariant)")
    common.add_argument("--grid-min", type=float)
    common.add_argument("--grid-max", type=float)
    common.add_argument("--grid-points", type=int)
    common.add_argument("--grid-spacing", choices=("linear", "logarithmic"))

    p = argparse.ArgumentParser(prog="mmtransducer", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="noise budget on the frequency grid (CSV)")
    sub.add_parser("compare", parents=[common], help="closed forms vs numerical engine (JSON)")
    sub.add_parser("cool", parents=[common], help="sideband-cooling occupancy (JSON)")
    sw = sub.add_parser("sweep", parents=[common], help="one-dimensional parameter scan (CSV)")
    sw.add_argument("--axis", required=True, choices=[a.value for a in sweep.Axis])
    sw.add_argument("--min", type=float, required=True)
    sw.add_argument("--max", type=float, required=True)
    sw.add_argument("--points", type=int, default=41)
    sw.add_argument("--spacing", choices=("linear", "logarithmic"), default="linear")
    sw.add_argument("--objective", default="total_noise_at_omega_m", choices=[o.value for o in sweep.Objective])
    sw.add_argument("--strict", action="store_true",
                    help="treat boundary optima and missing cancellation as errors")
    dr = sub.add_parser("dressed", parents=[common], help="normal modes of a coupled triplet (JSON)")
    dr.add_argument("--g-c", type=float, help="hopping rate (rad/s); default makes spacing = omega_m")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "grid_min": args.grid_min,
        "grid_max": args.grid_max,
        "grid_points": args.grid_points,
        "grid_spacing": args.grid_spacing,
    }
    try:
        if args.threads < 1:
            raise ValidationError(f"--threads: must be >= 1, got {args.threads}")
        cfg = load_config(args.config, overrides)
        return COMMANDS[args.command](args, cfg)
    except TransducerError as exc:
        for cls, code in EXIT_CODES:
            if isinstance(exc, cls):
                break
        else:
            code = 1
        if isinstance(exc, ValidationError):
            for line in exc.problems:
                print(f"error: {line}", file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
