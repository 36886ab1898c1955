"""Parameter scans and one-dimensional optimisations.

All searches are bracketed golden-section searches on smooth objectives;
a minimum found on the edge of its range is an error, never a clamped value.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .errors import BoundaryError, NoCancellationError, TransducerError, ValidationError
from .model import DriveConfig, SystemConfig, derive_params, power_for_coupling, zpf_reference

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class GoldenResult:
    x: float
    fx: float
    lo: float
    hi: float
    evaluations: int

    @property
    def width(self) -> float:
        return self.hi - self.lo


def golden_section(f, lo: float, hi: float, tol: float, max_iter: int = 500) -> GoldenResult:
    """Minimise a unimodal ``f`` on [lo, hi] until hi - lo <= tol."""
    a, b = min(lo, hi), max(lo, hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    n = 2
    while b - a > tol and n < max_iter:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        n += 1
    x, fx = (c, fc) if fc <= fd else (d, fd)
    return GoldenResult(x, fx, a, b, n)


# ---------------------------------------------------------------- SQL power


def with_power(config: SystemConfig, power: float) -> SystemConfig:
    d = config.drive
    return config.replace(drive=DriveConfig(power, d.omega_0, d.pull))


def normalized_total_noise(config: SystemConfig, omega=None, include_cross=False) -> float:
    """Symmetrized total noise at ``omega`` (default Ω_m) over ħ|χ0(Ω_m)|."""
    wm = config.oscillator.omega_m
    w = wm if omega is None else omega
    total = engine.total_noise_spectrum(config, float(w), include_cross=include_cross)
    return float(total / zpf_reference(config.oscillator, wm))


@dataclass(frozen=True)
class PSqlResult:
    p_sql: float
    min_normalized_noise: float
    g_m: float
    bracket_width: float  # final width in ln P
    evaluations: int


def _sql_power_estimate(config: SystemConfig) -> float:
    # S_imp ∝ 1/P and S_ba ∝ P exactly, so one evaluation fixes the scale
    ref = config if config.drive.power > 0 else with_power(config, 1e-3)
    nb = engine.noise_budget(ref, config.oscillator.omega_m)
    return ref.drive.power * math.sqrt(float(nb.imprecision[0] / nb.backaction[0]))


def find_p_sql(config: SystemConfig, p_range=None, rel_width: float = 1e-6,
               include_cross: bool = False) -> PSqlResult:
    """Input power minimising the symmetrized total noise at Ω_m.

    Golden-section search over ln P; ``rel_width`` is the final bracket width
    in ln P (the relative width of the power bracket).
    """
    if config.drive.pull == 0:
        raise ValidationError("pull: zero frequency pull gives no optomechanical coupling")
    if p_range is None:
        p_star = _sql_power_estimate(config)
        p_range = (p_star * 1e-3, p_star * 1e3)
    lo, hi = math.log(p_range[0]), math.log(p_range[1])
    if not lo < hi:
        raise ValidationError("p_range: need 0 < p_min < p_max")

    def objective(u):
        return normalized_total_noise(with_power(config, math.exp(u)), include_cross=include_cross)

    res = golden_section(objective, lo, hi, rel_width)
    edge = 2.0 * rel_width
    if res.x - lo <= edge or hi - res.x <= edge or objective(lo) <= res.fx or objective(hi) <= res.fx:
        raise BoundaryError("SQL power search hit the edge of the power range",
                            math.exp(res.x), res.fx)
    p = math.exp(res.x)
    return PSqlResult(p, res.fx, derive_params(with_power(config, p)).g_m, res.width, res.evaluations + 2)


# ---------------------------------------------------------------- generic sweeps


class Axis(enum.Enum):
    POWER = "power"
    KAPPA = "kappa"
    DETUNING = "detuning"
    THETA = "theta"


class Objective(enum.Enum):
    TOTAL_NOISE_AT_OMEGA_M = "total_noise_at_omega_m"
    BACKACTION_AT_MINUS_OMEGA_M = "backaction_at_minus_omega_m"
    OCCUPANCY = "occupancy"


def _parse_enum(cls, value):
    if isinstance(value, cls):
        return value
    try:
        return cls(str(value).lower())
    except ValueError:
        raise ValidationError(f"{cls.__name__.lower()}: unknown value {value!r}") from None


@dataclass(frozen=True)
class SweepSpec:
    base: SystemConfig
    axis: Axis
    min: float
    max: float
    points: int
    spacing: str = "linear"
    objective: Objective = Objective.TOTAL_NOISE_AT_OMEGA_M

    def __post_init__(self):
        object.__setattr__(self, "axis", _parse_enum(Axis, self.axis))
        object.__setattr__(self, "objective", _parse_enum(Objective, self.objective))
        problems = []
        if not self.min < self.max:
            problems.append(f"range: need min < max, got {self.min!r}, {self.max!r}")
        if self.points < 3:
            problems.append(f"points: need at least 3, got {self.points!r}")
        if self.spacing not in ("linear", "logarithmic"):
            problems.append(f"spacing: expected 'linear' or 'logarithmic', got {self.spacing!r}")
        elif self.spacing == "logarithmic" and self.min <= 0:
            problems.append("range: logarithmic spacing needs min > 0")
        if problems:
            raise ValidationError(problems)

    def values(self) -> np.ndarray:
        if self.spacing == "linear":
            return np.linspace(self.min, self.max, self.points)
        return np.geomspace(self.min, self.max, self.points)


@dataclass(frozen=True)
class SweepResult:
    axis: str
    axis_values: np.ndarray
    values: np.ndarray
    argmin: float
    min_value: float
    bracket_width: float
    at_boundary: bool
    gaps: tuple = ()
    columns: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)


def apply_axis(base: SystemConfig, axis: Axis, x: float) -> SystemConfig:
    if axis is Axis.POWER:
        return with_power(base, x)
    if axis is Axis.KAPPA:
        return base.replace(ladder=base.ladder.with_kappa_tot(x))
    if axis is Axis.DETUNING:
        return base.replace(ladder=base.ladder.shifted(x))
    return base.replace(theta=x)


def evaluate_objective(config: SystemConfig, objective: Objective) -> float:
    if objective is Objective.TOTAL_NOISE_AT_OMEGA_M:
        return normalized_total_noise(config)
    if objective is Objective.BACKACTION_AT_MINUS_OMEGA_M:
        return float(engine.backaction_spectrum(config, -config.oscillator.omega_m))
    return engine.cooling_occupancy(config)


def _point(spec: SweepSpec, x: float) -> float:
    try:
        return evaluate_objective(apply_axis(spec.base, spec.axis, float(x)), spec.objective)
    except (TransducerError, ArithmeticError):
        return math.nan


def run_sweep(spec: SweepSpec, threads: int = 1, refine: bool = True) -> SweepResult:
    """Evaluate the objective on the axis grid, then refine an interior minimum.

    Points where the engine raises are recorded as gaps (NaN).
    """
    xs = spec.values()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            ys = np.array(list(pool.map(lambda x: _point(spec, x), xs)))
    else:
        ys = np.array([_point(spec, x) for x in xs])
    gaps = tuple(int(i) for i in np.flatnonzero(~np.isfinite(ys)))
    if len(gaps) == len(xs):
        raise TransducerError("sweep: objective failed at every point")
    i = int(np.nanargmin(ys))
    at_boundary = i in (0, len(xs) - 1)
    argmin, min_value = float(xs[i]), float(ys[i])
    width = float(xs[min(i + 1, len(xs) - 1)] - xs[max(i - 1, 0)])
    if refine and not at_boundary and np.isfinite(ys[i - 1]) and np.isfinite(ys[i + 1]):
        log = spec.spacing == "logarithmic"
        to_u = math.log if log else float
        from_u = math.exp if log else float
        lo, hi = to_u(xs[i - 1]), to_u(xs[i + 1])
        res = golden_section(lambda u: _point(spec, from_u(u)), lo, hi, 1e-6 * (hi - lo))
        if res.fx <= min_value:
            argmin, min_value = from_u(res.x), res.fx
        width = from_u(res.hi) - from_u(res.lo)
    return SweepResult(spec.axis.value, xs, ys, argmin, min_value, width, at_boundary, gaps)


def _monotone_direction(v: np.ndarray) -> str:
    d = np.diff(v[np.isfinite(v)])
    if d.size and np.all(d > 0):
        return "increasing"
    if d.size and np.all(d < 0):
        return "decreasing"
    return "non-monotone"


def kappa_minima_trace(config: SystemConfig, kappa_min: float, kappa_max: float,
                       points: int = 9, spacing: str = "logarithmic", threads: int = 1) -> SweepResult:
    """SQL power and minimum noise as a function of total linewidth κ.

    Loss channels are rescaled at fixed η_c. ``values`` holds the minimum
    normalized noise and ``columns['p_sql']`` the optimal power.
    """
    spec = SweepSpec(config, Axis.KAPPA, kappa_min, kappa_max, points, spacing)
    ks = spec.values()

    def one(k):
        try:
            r = find_p_sql(apply_axis(config, Axis.KAPPA, float(k)))
            return r.p_sql, r.min_normalized_noise
        except TransducerError:
            return math.nan, math.nan

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, ks))
    else:
        rows = [one(k) for k in ks]
    p = np.array([r[0] for r in rows])
    noise = np.array([r[1] for r in rows])
    gaps = tuple(int(i) for i in np.flatnonzero(~np.isfinite(p)))
    i = int(np.nanargmin(noise))
    return SweepResult(
        axis="kappa",
        axis_values=ks,
        values=noise,
        argmin=float(ks[i]),
        min_value=float(noise[i]),
        bracket_width=float("nan"),
        at_boundary=i in (0, len(ks) - 1),
        gaps=gaps,
        columns={"p_sql": p},
        notes={"p_sql_vs_kappa": _monotone_direction(p)},
    )


# ---------------------------------------------------------------- cancellation


@dataclass(frozen=True)
class CancellationResult:
    offset: float  # added to every detuning (rad/s)
    value: float  # S_FF at the target, N²·s
    relative_value: float  # value / spectrum peak
    peak: float
    target: float


def _force_peak(config: SystemConfig, span: float, points: int = 801) -> float:
    d = np.asarray(config.ladder.detunings)
    lo, hi = min(d.min(), 0.0) - span, max(d.max(), 0.0) + span
    w = np.unique(np.concatenate([np.linspace(lo, hi, points), d, -d]))
    return float(np.max(engine.backaction_spectrum(config, w)))


def find_cancellation_detuning(config: SystemConfig, target: "float | None" = None,
                               window: "tuple[float, float] | None" = None,
                               points: int = 241, threshold: float = 1e-8) -> CancellationResult:
    """Global drive offset that nulls the backaction force at ``target``.

    Default target is -Ω_m. Default window keeps the upper resonance within
    ±3Ω_m of the drive.
    """
    wm = config.oscillator.omega_m
    target = -wm if target is None else float(target)
    if window is None:
        upper = max(config.ladder.detunings)
        window = (-3.0 * wm - upper, 3.0 * wm - upper)

    def relative(off):
        cfg = config.replace(ladder=config.ladder.shifted(off))
        value = float(engine.backaction_spectrum(cfg, target))
        peak = _force_peak(cfg, 2.0 * wm)
        return value / peak, value, peak

    offsets = np.linspace(window[0], window[1], points)
    rel = np.array([relative(o)[0] for o in offsets])
    i = int(np.argmin(rel))
    lo = offsets[max(i - 1, 0)]
    hi = offsets[min(i + 1, points - 1)]
    res = golden_section(lambda o: relative(o)[0], lo, hi, 1e-12 * wm)
    off = res.x if res.fx <= rel[i] else float(offsets[i])
    r, value, peak = relative(off)
    best = CancellationResult(float(off), value, r, peak, target)
    if not r < threshold:
        raise NoCancellationError(best)
    return best


# ---------------------------------------------------------------- readout angle


@dataclass(frozen=True)
class ThetaResult:
    theta_opt: float
    value: float


def optimize_theta(config: SystemConfig, omega: float, tol: float = 1e-10) -> ThetaResult:
    """Homodyne angle minimising the symmetrized imprecision at ``omega``."""
    derived = derive_params(config)

    def f(th):
        return float(engine.imprecision_spectrum(config.replace(theta=th), omega, derived, symmetrized=True))

    eps = 1e-6
    res = golden_section(f, eps, math.pi - eps, tol)
    return ThetaResult(res.x, res.fx)


__all__ = [
    "golden_section",
    "find_p_sql",
    "kappa_minima_trace",
    "find_cancellation_detuning",
    "optimize_theta",
    "run_sweep",
    "SweepSpec",
    "SweepResult",
    "Axis",
    "Objective",
    "power_for_coupling",
]
