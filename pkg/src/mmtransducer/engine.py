"""Frequency-domain solution of the linearized multimode Langevin equations.

At each Fourier frequency Ω the quadrature fluctuations of M cavity modes
and the mechanical coordinate solve a (2M+1)-dimensional complex linear
system driven by vacuum noise ports and an external force. Internally the
cavity quadratures are dimensionless (vacuum PSD = 1) and the mechanical
coordinate is q/x0; physical units are applied when spectra are reported.

Two solutions are used:

* closed loop: q is an unknown and radiation pressure acts back on it
  (``output_spectrum``, ``solve_transfer``);
* clamped: q is an external input and the mechanics is held fixed, which is
  the bookkeeping behind the imprecision / backaction / cross split.

Rotation terms are Ẋ_k = +δ_k Y_k and Ẏ_k = -δ_k X_k for a mode at
detuning δ_k = ω_k - ω_drive, which with d/dt -> -iΩ places the response of
a mode above the drive at positive Ω.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import NoNetCoolingError, SingularityError, ValidationError, ZeroGainError
from .model import (
    DerivedParams,
    ReservoirMode,
    SpectrumTrace,
    SystemConfig,
    Unit,
    as_omega_array,
    derive_params,
    hbar,
    mechanical_susceptibility,
)

# one noise pair <X X> = <Y Y> = 1, <X Y> = <Y X>* = i
PAIR_CORRELATION = np.array([[1.0, 1.0j], [-1.0j, 1.0]])


@dataclass(frozen=True)
class StateLayout:
    """Ordering of unknowns: [X_1, Y_1, ..., X_M, Y_M, q]."""

    n_modes: int

    @property
    def dim(self) -> int:
        return 2 * self.n_modes + 1

    @property
    def q(self) -> int:
        return 2 * self.n_modes

    def x(self, k: int) -> int:
        return 2 * k

    def y(self, k: int) -> int:
        return 2 * k + 1

    def label(self, index: int) -> tuple:
        """Inverse map: state index -> ("X", k), ("Y", k) or ("q",)."""
        if index == self.q:
            return ("q",)
        if not 0 <= index < self.q:
            raise IndexError(index)
        return ("XY"[index % 2], index // 2)


@dataclass(frozen=True)
class NoisePort:
    channel: str  # "ext" or "int"
    rate: float
    mode: "int | None" = None  # None: shared by all modes


@dataclass(frozen=True)
class NoisePortSet:
    """Vacuum input pairs (δX_in, δY_in) and the modes they drive."""

    ports: tuple[NoisePort, ...]
    n_modes: int

    @classmethod
    def for_config(cls, config: SystemConfig) -> "NoisePortSet":
        ladder = config.ladder
        channels = [("ext", ladder.kappa_ext)]
        if ladder.kappa_0 > 0:
            channels.append(("int", ladder.kappa_0))
        ports = []
        for name, rate in channels:
            if config.reservoir_mode is ReservoirMode.INDEPENDENT:
                ports.extend(NoisePort(name, rate, k) for k in range(ladder.n_modes))
            else:
                ports.append(NoisePort(name, rate))
        return cls(tuple(ports), ladder.n_modes)

    @property
    def n_inputs(self) -> int:
        return 2 * len(self.ports)

    def pair_correlations(self) -> list[np.ndarray]:
        return [PAIR_CORRELATION.copy() for _ in self.ports]

    def correlation_matrix(self) -> np.ndarray:
        c = np.zeros((self.n_inputs, self.n_inputs), dtype=complex)
        for p in range(len(self.ports)):
            c[2 * p:2 * p + 2, 2 * p:2 * p + 2] = PAIR_CORRELATION
        return c

    def injection(self, layout: StateLayout) -> np.ndarray:
        """Real (dim x n_inputs) matrix: sqrt(rate) into each driven quadrature."""
        b = np.zeros((layout.dim, self.n_inputs))
        for p, port in enumerate(self.ports):
            modes = range(self.n_modes) if port.mode is None else (port.mode,)
            amp = math.sqrt(port.rate)
            for k in modes:
                b[layout.x(k), 2 * p] = amp
                b[layout.y(k), 2 * p + 1] = amp
        return b


class _Setup:
    """Per-config constants shared by all frequency points."""

    def __init__(self, config: SystemConfig, derived: "DerivedParams | None" = None):
        self.config = config
        self.derived = derived if derived is not None else derive_params(config)
        self.layout = StateLayout(config.ladder.n_modes)
        self.ports = NoisePortSet.for_config(config)
        self.g = self.derived.g_m
        self.x0 = self.derived.x0

    @cached_property
    def base_matrix(self) -> np.ndarray:
        """Frequency-independent part of (-iΩ - dynamics), mechanical row excluded."""
        cfg, lay, g = self.config, self.layout, self.g
        M = lay.n_modes
        a = np.zeros((lay.dim, lay.dim))
        half = 0.5 * cfg.ladder.kappa_tot
        cross = cfg.reservoir_mode is ReservoirMode.SHARED_QUANTUM
        for k, delta in enumerate(cfg.ladder.detunings):
            a[lay.x(k), lay.y(k)] = -delta
            a[lay.y(k), lay.x(k)] = delta
            for l in range(M):
                if cross or l == k:
                    a[lay.x(k), lay.x(l)] += half
                    a[lay.y(k), lay.y(l)] += half
            a[lay.y(k), lay.q] = -g
        # mechanical row, divided by omega_m to keep entries at rate scale
        for l in range(M):
            a[lay.q, lay.x(l)] = -g
        return a

    def matrices(self, omega: np.ndarray) -> np.ndarray:
        osc = self.config.oscillator
        lay = self.layout
        a = np.broadcast_to(self.base_matrix, (omega.size,) + self.base_matrix.shape).astype(complex)
        idx = np.arange(lay.q)
        a[:, idx, idx] += -1j * omega[:, None]
        a[:, lay.q, lay.q] = (osc.omega_m**2 - omega**2 - 1j * osc.gamma_m * omega) / osc.omega_m
        return a

    @cached_property
    def force_column(self) -> np.ndarray:
        """State response source for a 1 N external force."""
        osc = self.config.oscillator
        b = np.zeros(self.layout.dim)
        b[self.layout.q] = 1.0 / (osc.mass_eff * self.x0 * osc.omega_m)
        return b

    @cached_property
    def detection(self) -> tuple[np.ndarray, np.ndarray]:
        """Output row on the state and direct reflection on the inputs.

        X_θ^out = sqrt(κ_ext) Σ_k (cosθ X_k + sinθ Y_k) - X_θ^in on the external
        port. With independent ports the M per-mode outputs are combined with
        weight 1/sqrt(M).
        """
        cfg, lay = self.config, self.layout
        c, s = math.cos(cfg.theta), math.sin(cfg.theta)
        M = lay.n_modes
        norm = 1.0 / math.sqrt(M) if cfg.reservoir_mode is ReservoirMode.INDEPENDENT else 1.0
        row = np.zeros(lay.dim)
        amp = norm * math.sqrt(cfg.ladder.kappa_ext)
        for k in range(M):
            row[lay.x(k)] = amp * c
            row[lay.y(k)] = amp * s
        refl = np.zeros(self.ports.n_inputs)
        for p, port in enumerate(self.ports.ports):
            if port.channel == "ext":
                refl[2 * p] = -norm * c
                refl[2 * p + 1] = -norm * s
        return row, refl


def _check_info(info, omega, what="singular system matrix"):
    bad = info != 0
    if np.any(bad):
        raise SingularityError(omega[bad], what)


def _project(row: np.ndarray, sol: np.ndarray) -> np.ndarray:
    # explicit reduction: per-frequency result independent of batch size
    return np.sum(row[None, :, None] * sol, axis=1)


def _quadform(r: np.ndarray) -> np.ndarray:
    """Σ_pairs r C r^† for port responses r of shape (N, 2P); exactly >= 0."""
    # C = v v^† with v = (1, -i)
    pairs = r[:, 0::2] - 1j * r[:, 1::2]
    return np.sum(pairs.real**2 + pairs.imag**2, axis=1)


@dataclass(frozen=True)
class ClampedSolution:
    """Optical response with the mechanics held fixed."""

    omega: np.ndarray
    noise_output: np.ndarray  # (N, P) detected quadrature per noise input
    gain: np.ndarray  # (N,) detected quadrature per unit q/x0
    force: np.ndarray  # (N, P) radiation-pressure force (N) per noise input
    x0: float
    g_m: float


def _clamped(setup: _Setup, omega: np.ndarray) -> ClampedSolution:
    lay = setup.layout
    n_opt = lay.q
    a = setup.matrices(omega)[:, :n_opt, :n_opt]
    rhs = np.zeros((n_opt, setup.ports.n_inputs + 1))
    rhs[:, :-1] = setup.ports.injection(lay)[:n_opt]
    rhs[:, -1] = -setup.base_matrix[:n_opt, lay.q]  # g on every Y_k
    sol, info = kernels.solve_batched(a, np.broadcast_to(rhs, (omega.size,) + rhs.shape))
    _check_info(info, omega)
    row, refl = setup.detection
    out = _project(row[:n_opt], sol)
    sum_x = sol[:, 0:n_opt:2, :].sum(axis=1)
    scale = hbar * setup.g / (2.0 * setup.x0)
    return ClampedSolution(
        omega=omega,
        noise_output=out[:, :-1] + refl,
        gain=out[:, -1],
        force=scale * sum_x[:, :-1],
        x0=setup.x0,
        g_m=setup.g,
    )


@dataclass(frozen=True)
class TransferSolution:
    """Closed-loop transfer functions at a set of frequencies.

    ``state`` maps the stacked inputs [noise ports..., force (N)] to the state
    vector [X_1, Y_1, ..., q/x0]; ``output`` maps the same inputs to the
    detected quadrature X_θ^out.
    """

    omega: np.ndarray
    layout: StateLayout
    ports: NoisePortSet
    state: np.ndarray  # (N, dim, P+1)
    output: np.ndarray  # (N, P+1)
    clamped: ClampedSolution

    @property
    def force_to_displacement(self) -> np.ndarray:
        """Effective susceptibility q[Ω]/F[Ω] in m/N including backaction."""
        return self.clamped.x0 * self.state[:, self.layout.q, -1]


def _setup(config, derived=None) -> _Setup:
    return _Setup(config, derived)


def build_system_matrix(config: SystemConfig, omega, derived=None) -> np.ndarray:
    """Assembled (2M+1)x(2M+1) matrix (-iΩ - dynamics) at each Ω.

    The mechanical row is (Ω_m² - Ω² - iγ_mΩ)/Ω_m · q/x0 - g_m Σ_l X_l, i.e. the
    equation of motion driven by the radiation-pressure force divided by Ω_m.
    Returns shape (N, dim, dim), or (dim, dim) for scalar ``omega``.
    """
    w = np.asarray(omega, dtype=float)
    a = _setup(config, derived).matrices(np.atleast_1d(w))
    return a[0] if w.ndim == 0 else a


def solve_transfer(config: SystemConfig, omega, derived=None) -> TransferSolution:
    w = as_omega_array(omega)
    setup = _setup(config, derived)
    lay = setup.layout
    osc = config.oscillator
    if osc.gamma_m == 0 and setup.g == 0:
        near = np.abs(np.abs(w) - osc.omega_m) <= 1e-12 * osc.omega_m
        if near.any():
            raise SingularityError(w[near], "undamped mechanical pole")
    rhs = np.concatenate([setup.ports.injection(lay), setup.force_column[:, None]], axis=1)
    state, info = kernels.solve_batched(
        setup.matrices(w), np.broadcast_to(rhs, (w.size,) + rhs.shape)
    )
    _check_info(info, w)
    if not np.all(np.isfinite(state)):
        raise SingularityError(w[~np.all(np.isfinite(state), axis=(1, 2))])
    row, refl = setup.detection
    output = _project(row, state)
    output[:, :-1] += refl
    return TransferSolution(w, lay, setup.ports, state, output, _clamped(setup, w))


def thermal_force_psd(config: SystemConfig) -> float:
    """Symmetrized white thermal force PSD m γ ħ Ω_m (2 n_th + 1), in N²·s."""
    n = config.thermal_occupation
    if n is None:
        return 0.0
    osc = config.oscillator
    return osc.mass_eff * osc.gamma_m * hbar * osc.omega_m * (2.0 * n + 1.0)


def _scalar_out(omega, values):
    return values[0] if np.ndim(omega) == 0 else values


def output_spectrum(config: SystemConfig, omega, derived=None):
    """Detected quadrature PSD (two-sided, unsymmetrized; vacuum = 1).

    The mechanics responds self-consistently to radiation pressure and, when
    ``thermal_occupation`` is set, to a thermal Langevin force.
    """
    sol = solve_transfer(config, omega, derived)
    s = _quadform(sol.output[:, :-1])
    s_th = thermal_force_psd(config)
    if s_th:
        f = sol.output[:, -1]
        s = s + (f.real**2 + f.imag**2) * s_th
    return _scalar_out(omega, s)


def _referred(sol: ClampedSolution) -> np.ndarray:
    zero = sol.gain == 0
    if sol.g_m == 0 or np.any(zero):
        raise ZeroGainError(sol.omega if sol.g_m == 0 else sol.omega[zero])
    return sol.noise_output / sol.gain[:, None]


def _clamped_for(config, omega, derived):
    return _clamped(_setup(config, derived), as_omega_array(omega))


def imprecision_spectrum(config: SystemConfig, omega, derived=None, symmetrized=False):
    """Shot-noise floor referred to displacement, in m²·s.

    The clamped output noise divided by |∂X_out/∂q|². ``symmetrized`` averages
    the values at ±Ω.
    """
    w = as_omega_array(omega)
    if symmetrized:
        s = 0.5 * (imprecision_spectrum(config, w, derived) + imprecision_spectrum(config, -w, derived))
        return _scalar_out(omega, s)
    sol = _clamped_for(config, w, derived)
    s = sol.x0**2 * _quadform(_referred(sol))
    return _scalar_out(omega, s)


def backaction_spectrum(config: SystemConfig, omega, derived=None, symmetrized=False):
    """Radiation-pressure force PSD (ħ g_m / 2x0)² S_ΣX, in N²·s."""
    w = as_omega_array(omega)
    if symmetrized:
        s = 0.5 * (backaction_spectrum(config, w, derived) + backaction_spectrum(config, -w, derived))
        return _scalar_out(omega, s)
    sol = _clamped_for(config, w, derived)
    return _scalar_out(omega, _quadform(sol.force))


def cross_spectrum(config: SystemConfig, omega, derived=None, symmetrized=False):
    """Imprecision-backaction cross PSD S_xF(Ω), in m·N·s.

    Uses the ordering-symmetrized (anticommutator) port correlation, the one
    that enters the measured noise; the antisymmetric commutator part is the
    constant -iħ/2 and carries no measurable power. ``symmetrized`` averages
    ±Ω, which leaves Re S_xF.
    """
    w = as_omega_array(omega)
    if symmetrized:
        s = 0.5 * (cross_spectrum(config, w, derived) + cross_spectrum(config, -w, derived))
        return _scalar_out(omega, s)
    sol = _clamped_for(config, w, derived)
    x = sol.x0 * _referred(sol)
    s = np.sum(x * np.conj(sol.force), axis=1)
    return _scalar_out(omega, s)


@dataclass(frozen=True)
class NoiseBudget:
    """Symmetrized displacement-noise contributions on a grid, in m²·s."""

    omega: np.ndarray
    imprecision: np.ndarray
    backaction: np.ndarray  # |χ0|² S̄_FF
    cross: np.ndarray  # mean over ±Ω of 2 Re(χ0* S_xF)
    thermal: np.ndarray
    include_cross: bool

    @property
    def total(self) -> np.ndarray:
        t = self.imprecision + self.backaction + self.thermal
        return t + self.cross if self.include_cross else t


def noise_budget(config: SystemConfig, omega, derived=None, include_cross=False) -> NoiseBudget:
    w = as_omega_array(omega)
    setup = _setup(config, derived)
    both = np.concatenate([w, -w])
    sol = _clamped(setup, both)
    ref = _referred(sol)
    imp = sol.x0**2 * _quadform(ref)
    sff = _quadform(sol.force)
    sxf = np.sum(sol.x0 * ref * np.conj(sol.force), axis=1)
    chi = mechanical_susceptibility(config.oscillator, both)
    chi2 = chi.real**2 + chi.imag**2
    n = w.size
    half = lambda v: 0.5 * (v[:n] + v[n:])  # noqa: E731
    cross = half(2.0 * np.real(np.conj(chi) * sxf))
    thermal = chi2[:n] * thermal_force_psd(config)
    return NoiseBudget(w, half(imp), chi2[:n] * half(sff), cross, thermal, include_cross)


def total_noise_spectrum(config: SystemConfig, omega, derived=None, include_cross=False):
    """Symmetrized S̄_imp + |χ0|² S̄_FF (+ cross, + thermal), in m²·s."""
    return _scalar_out(omega, noise_budget(config, omega, derived, include_cross).total)


def symmetrize(trace: SpectrumTrace) -> SpectrumTrace:
    """Even part (S(Ω) + S(-Ω))/2 of a trace on a grid symmetric about 0."""
    g = trace.grid
    tol = 1e-12 * max(float(np.max(np.abs(g))), 1.0) if g.size else 0.0
    if g.size == 0 or np.max(np.abs(g + g[::-1])) > tol:
        raise ValidationError("grid: symmetrization requires a grid symmetric about 0")
    return SpectrumTrace(g, 0.5 * (trace.values + trace.values[::-1]), trace.unit, True)


def cooling_occupancy(config: SystemConfig, derived=None) -> float:
    """Final phonon number from the force-spectrum sideband asymmetry.

    n_f / (n_f + 1) = S_FF(-Ω_m) / S_FF(+Ω_m).
    """
    wm = config.oscillator.omega_m
    s_minus, s_plus = backaction_spectrum(config, np.array([-wm, wm]), derived)
    if not s_plus > 0:
        raise NoNetCoolingError(math.inf if s_minus > 0 else 1.0)
    r = s_minus / s_plus
    if r >= 1.0 - 1e-12:
        raise NoNetCoolingError(r)
    return r / (1.0 - r)


_QUANTITIES = {
    "output": (output_spectrum, Unit.QUADRATURE_PSD),
    "imprecision": (imprecision_spectrum, Unit.DISPLACEMENT_PSD),
    "backaction": (backaction_spectrum, Unit.FORCE_PSD),
    "total": (total_noise_spectrum, Unit.DISPLACEMENT_PSD),
}


def evaluate_grid(func, config: SystemConfig, omega=None, threads: int = 1, **kwargs) -> np.ndarray:
    """Evaluate ``func(config, chunk, **kwargs)`` over contiguous grid chunks.

    Each frequency is computed independently, so the result is bit-identical
    for any ``threads``.
    """
    w = config.omega if omega is None else as_omega_array(omega)
    threads = max(1, int(threads))
    if threads == 1 or w.size < 2 * threads:
        return np.asarray(func(config, w, **kwargs))
    chunks = np.array_split(w, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda c: np.asarray(func(config, c, **kwargs)), chunks))
    return np.concatenate(parts)


def spectrum_trace(config: SystemConfig, quantity: str = "total", threads: int = 1, **kwargs) -> SpectrumTrace:
    """One of output/imprecision/backaction/total on ``config.grid``."""
    func, unit = _QUANTITIES[quantity]
    values = evaluate_grid(func, config, threads=threads, **kwargs)
    sym = quantity == "total" or bool(kwargs.get("symmetrized", False))
    return SpectrumTrace(config.omega, values, unit, sym)
