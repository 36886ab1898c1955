"""Physical parameters of a multimode optomechanical transducer.

All public inputs are SI with angular frequencies in rad/s. The value types
are frozen dataclasses that validate on construction and report every
violated invariant at once.

Fourier convention: f(t) = ∫ f[Ω] exp(-iΩt) dΩ/2π, so d/dt -> -iΩ and the
bare susceptibility has a positive imaginary part at +Ω_m.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.constants import hbar

from .errors import ValidationError

__all__ = [
    "hbar",
    "ReservoirMode",
    "Unit",
    "MechanicalOscillator",
    "ModeLadder",
    "DriveConfig",
    "SystemConfig",
    "SpectrumTrace",
    "DerivedParams",
    "derive_params",
    "mechanical_susceptibility",
    "zpf_reference",
    "power_for_coupling",
    "make_grid",
]


class ReservoirMode(enum.Enum):
    """How the cavity modes share their loss channels.

    SHARED_QUANTUM keeps the reservoir-induced cross damping and one noise
    pair per loss channel. SHARED_NO_CROSS drops the cross damping but keeps
    the shared noise (the classical interference model). INDEPENDENT gives
    every mode its own damping and its own noise pairs.
    """

    SHARED_QUANTUM = "shared_quantum"
    SHARED_NO_CROSS = "shared_no_cross"
    INDEPENDENT = "independent"

    @classmethod
    def parse(cls, text: "str | ReservoirMode") -> "ReservoirMode":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("-", "_")
        aliases = {
            "sharedquantum": cls.SHARED_QUANTUM,
            "sharednocross": cls.SHARED_NO_CROSS,
        }
        if key in aliases:
            return aliases[key]
        for member in cls:
            if member.value == key:
                return member
        names = ", ".join(m.value for m in cls)
        raise ValidationError(f"reservoir_mode: unknown value {text!r} (expected one of {names})")


class Unit(enum.Enum):
    DISPLACEMENT_PSD = "m^2 s"
    FORCE_PSD = "N^2 s"
    QUADRATURE_PSD = "1"
    NORMALIZED_TO_ZPF = "zpf"


def _finite(name, value, problems):
    if not math.isfinite(value):
        problems.append(f"{name}: must be finite, got {value!r}")
        return False
    return True


@dataclass(frozen=True)
class MechanicalOscillator:
    """Classical damped harmonic oscillator.

    Attributes
    ----------
    omega_m : float
        Resonance angular frequency (rad/s).
    gamma_m : float
        Energy damping rate (rad/s); must stay below ``omega_m``.
    mass_eff : float
        Effective mass (kg).
    """

    omega_m: float
    gamma_m: float
    mass_eff: float

    def __post_init__(self):
        for name in ("omega_m", "gamma_m", "mass_eff"):
            object.__setattr__(self, name, float(getattr(self, name)))
        problems = self.problems()
        if problems:
            raise ValidationError(problems)

    def problems(self) -> list[str]:
        out: list[str] = []
        ok = all(_finite(n, getattr(self, n), out) for n in ("omega_m", "gamma_m", "mass_eff"))
        if not ok:
            return out
        if self.omega_m <= 0:
            out.append(f"omega_m: must be > 0, got {self.omega_m!r}")
        if self.mass_eff <= 0:
            out.append(f"mass_eff: must be > 0, got {self.mass_eff!r}")
        if self.gamma_m < 0:
            out.append(f"gamma_m: must be >= 0, got {self.gamma_m!r}")
        elif self.omega_m > 0 and self.gamma_m >= self.omega_m:
            out.append(
                f"gamma_m: oscillator must be underdamped (gamma_m < omega_m), "
                f"got gamma_m={self.gamma_m!r} >= omega_m={self.omega_m!r}"
            )
        return out

    @property
    def x0(self) -> float:
        """Zero-point motion sqrt(ħ / (2 m_eff Ω_m)) in metres."""
        return math.sqrt(hbar / (2.0 * self.mass_eff * self.omega_m))


@dataclass(frozen=True)
class ModeLadder:
    """Cavity modes sharing one drive, with uniform loss rates.

    ``detunings`` are (mode frequency - drive frequency) in rad/s, in the
    global frame rotating at the drive.
    """

    detunings: tuple[float, ...]
    kappa_ext: float
    kappa_0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "detunings", tuple(float(d) for d in self.detunings))
        object.__setattr__(self, "kappa_ext", float(self.kappa_ext))
        object.__setattr__(self, "kappa_0", float(self.kappa_0))
        problems = self.problems()
        if problems:
            raise ValidationError(problems)

    def problems(self) -> list[str]:
        out: list[str] = []
        if len(self.detunings) < 1:
            out.append("detunings: at least one cavity mode is required")
        for i, d in enumerate(self.detunings):
            _finite(f"detunings[{i}]", d, out)
        if len(set(self.detunings)) != len(self.detunings):
            out.append("detunings: mode detunings must be distinct")
        if _finite("kappa_ext", self.kappa_ext, out) and self.kappa_ext <= 0:
            out.append(f"kappa_ext: must be > 0, got {self.kappa_ext!r}")
        if _finite("kappa_0", self.kappa_0, out) and self.kappa_0 < 0:
            out.append(f"kappa_0: must be >= 0, got {self.kappa_0!r}")
        return out

    @classmethod
    def single(cls, kappa_ext, kappa_0=0.0):
        return cls((0.0,), kappa_ext, kappa_0)

    @classmethod
    def dual(cls, spacing, kappa_ext, kappa_0=0.0):
        """Driven mode plus one mode ``spacing`` above it."""
        return cls((0.0, spacing), kappa_ext, kappa_0)

    @classmethod
    def triple(cls, spacing, kappa_ext, kappa_0=0.0):
        return cls((-spacing, 0.0, spacing), kappa_ext, kappa_0)

    @property
    def n_modes(self) -> int:
        return len(self.detunings)

    @property
    def kappa_tot(self) -> float:
        return self.kappa_ext + self.kappa_0

    @property
    def eta_c(self) -> float:
        # overcoupling fraction; -> 1 for a lossless (kappa_0 = 0) cavity
        return self.kappa_ext / self.kappa_tot

    def shifted(self, offset: float) -> "ModeLadder":
        """Same ladder with the drive moved down by ``offset`` (all detunings + offset)."""
        return ModeLadder(tuple(d + offset for d in self.detunings), self.kappa_ext, self.kappa_0)

    def with_kappa_tot(self, kappa_tot: float) -> "ModeLadder":
        """Rescale both loss channels to a new total rate at fixed eta_c."""
        s = kappa_tot / self.kappa_tot
        return ModeLadder(self.detunings, self.kappa_ext * s, self.kappa_0 * s)


@dataclass(frozen=True)
class DriveConfig:
    """Coherent drive on the external port.

    Attributes
    ----------
    power : float
        Input power (W).
    omega_0 : float
        Carrier angular frequency (rad/s).
    pull : float
        Frequency pull G = dω0/dx (rad/s per m).
    """

    power: float
    omega_0: float
    pull: float

    def __post_init__(self):
        for name in ("power", "omega_0", "pull"):
            object.__setattr__(self, name, float(getattr(self, name)))
        problems = self.problems()
        if problems:
            raise ValidationError(problems)

    def problems(self) -> list[str]:
        out: list[str] = []
        if _finite("power", self.power, out) and self.power < 0:
            out.append(f"power: must be >= 0, got {self.power!r}")
        if _finite("omega_0", self.omega_0, out) and self.omega_0 <= 0:
            out.append(f"omega_0: must be > 0, got {self.omega_0!r}")
        _finite("pull", self.pull, out)
        return out

    @property
    def s_in(self) -> float:
        """Input photon-flux amplitude sqrt(P / ħω0) in sqrt(1/s)."""
        return math.sqrt(self.power / (hbar * self.omega_0))


@dataclass(frozen=True)
class SystemConfig:
    """A complete scenario: mechanics, cavity, drive, readout and grid."""

    oscillator: MechanicalOscillator
    ladder: ModeLadder
    drive: DriveConfig
    theta: float = math.pi / 2
    reservoir_mode: ReservoirMode = ReservoirMode.SHARED_QUANTUM
    grid: tuple[float, ...] = field(default=(), repr=False)
    thermal_occupation: "float | None" = None

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "reservoir_mode", ReservoirMode.parse(self.reservoir_mode))
        object.__setattr__(self, "grid", tuple(float(w) for w in self.grid))
        if self.thermal_occupation is not None:
            object.__setattr__(self, "thermal_occupation", float(self.thermal_occupation))
        problems = self.problems()
        if problems:
            raise ValidationError(problems)

    def problems(self) -> list[str]:
        out: list[str] = []
        if not (0.0 < self.theta < math.pi):
            out.append(f"theta: homodyne angle must lie in (0, pi), got {self.theta!r}")
        g = np.asarray(self.grid, dtype=float)
        if g.size and not np.all(np.isfinite(g)):
            out.append("grid: all frequencies must be finite")
        elif g.size > 1 and not np.all(np.diff(g) > 0):
            out.append("grid: frequencies must be strictly increasing")
        n = self.thermal_occupation
        if n is not None and not (math.isfinite(n) and n >= 0):
            out.append(f"thermal_occupation: must be a non-negative number, got {n!r}")
        return out

    @property
    def omega(self) -> np.ndarray:
        return np.asarray(self.grid, dtype=float)

    def replace(self, **changes) -> "SystemConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class SpectrumTrace:
    """Spectrum values on a frequency grid."""

    grid: np.ndarray
    values: np.ndarray
    unit: Unit
    symmetrized: bool = False

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        problems = []
        if grid.shape != values.shape or grid.ndim != 1:
            problems.append(
                f"values: length {values.shape} does not match grid length {grid.shape}"
            )
        elif np.any(values < 0):
            problems.append("values: auto-spectra must be non-negative")
        if problems:
            raise ValidationError(problems)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class DerivedParams:
    x0: float
    kappa_tot: float
    eta_c: float
    s_in: float
    alpha_bar: float
    g_m: float


def intracavity_sum(ladder: ModeLadder, s_in: float) -> complex:
    """Classical steady-state Σ_k <a_k> for a drive of amplitude ``s_in``.

    Solves 0 = -iδ_k a_k - (κ_tot/2) Σ_l a_l + sqrt(κ_ext) s_in for all k.
    """
    d = np.asarray(ladder.detunings)
    m = np.full((d.size, d.size), 0.5 * ladder.kappa_tot, dtype=complex)
    m[np.diag_indices(d.size)] += 1j * d
    rhs = np.full(d.size, math.sqrt(ladder.kappa_ext) * s_in, dtype=complex)
    return complex(np.linalg.solve(m, rhs).sum())


def derive_params(config: SystemConfig) -> DerivedParams:
    """Zero-point motion, loss bookkeeping and the linearized coupling g_m.

    The input phase is chosen so that ᾱ = Σ<a_k> is real and non-negative,
    which makes g_m = 2 G x0 ᾱ real. A negative pull only flips the sign
    convention of q and is reported as |g_m|.
    """
    osc, ladder, drive = config.oscillator, config.ladder, config.drive
    x0 = osc.x0
    s_in = drive.s_in
    alpha_bar = abs(intracavity_sum(ladder, s_in)) if s_in > 0 else 0.0
    g_m = abs(2.0 * drive.pull * x0 * alpha_bar)
    return DerivedParams(
        x0=x0,
        kappa_tot=ladder.kappa_tot,
        eta_c=ladder.eta_c,
        s_in=s_in,
        alpha_bar=alpha_bar,
        g_m=g_m,
    )


def power_for_coupling(oscillator, ladder, drive, g_m: float) -> float:
    """Input power that yields coupling rate ``g_m`` (g_m scales as sqrt(P))."""
    if g_m < 0:
        raise ValidationError(f"g_m: must be >= 0, got {g_m!r}")
    if g_m == 0:
        return 0.0
    ref = DriveConfig(1.0, drive.omega_0, drive.pull)
    g_ref = derive_params(SystemConfig(oscillator, ladder, ref)).g_m
    if g_ref == 0:
        raise ValidationError("pull: zero frequency pull gives no optomechanical coupling")
    return (g_m / g_ref) ** 2


def _pole_mask(osc: MechanicalOscillator, omega: np.ndarray) -> np.ndarray:
    if osc.gamma_m > 0:
        return np.zeros(omega.shape, dtype=bool)
    return np.abs(np.abs(omega) - osc.omega_m) <= 1e-12 * osc.omega_m


def mechanical_susceptibility(osc: MechanicalOscillator, omega) -> np.ndarray:
    """Bare susceptibility χ0(Ω) = 1 / (m_eff (Ω_m² - Ω² - iγ_mΩ)) in m/N.

    On an undamped pole the value is complex infinity rather than NaN.
    Scalars in, scalar out.
    """
    w = np.asarray(omega, dtype=float)
    denom = osc.mass_eff * (osc.omega_m**2 - w**2 - 1j * osc.gamma_m * w)
    pole = _pole_mask(osc, w)
    with np.errstate(divide="ignore", invalid="ignore"):
        chi = np.where(pole, complex(np.inf, 0.0), 1.0 / np.where(pole, 1.0, denom))
    return chi[()] if chi.ndim == 0 else chi


def zpf_reference(osc: MechanicalOscillator, omega) -> np.ndarray:
    """Zero-point displacement scale ħ |χ0(Ω)|."""
    chi = mechanical_susceptibility(osc, omega)
    return hbar * np.abs(chi)


def make_grid(grid_min: float, grid_max: float, points: int, spacing: str = "linear") -> tuple:
    """Strictly increasing Fourier grid, linear or logarithmic."""
    problems = []
    if not points >= 2:
        problems.append(f"grid_points: need at least 2 points, got {points!r}")
    if not grid_min < grid_max:
        problems.append(f"grid_min/grid_max: need grid_min < grid_max, got {grid_min!r}, {grid_max!r}")
    if spacing not in ("linear", "logarithmic"):
        problems.append(f"grid_spacing: expected 'linear' or 'logarithmic', got {spacing!r}")
    elif spacing == "logarithmic" and grid_min <= 0:
        problems.append("grid_min: logarithmic grid requires grid_min > 0")
    if problems:
        raise ValidationError(problems)
    if spacing == "linear":
        g = np.linspace(grid_min, grid_max, int(points))
    else:
        g = np.geomspace(grid_min, grid_max, int(points))
    return tuple(float(x) for x in g)


def as_omega_array(omega: "float | Sequence[float] | np.ndarray") -> np.ndarray:
    return np.atleast_1d(np.asarray(omega, dtype=float))
