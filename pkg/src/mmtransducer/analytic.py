"""Closed-form spectra for the single-, dual- and triple-mode schemes.

These are literal evaluations of the reference closed forms and serve as
oracle targets for :mod:`mmtransducer.engine`. Prefactors are kept
verbatim; see the notes on ``triple_sxx`` for how they relate to the
numerical model.
"""
from __future__ import annotations

import enum

import numpy as np

from .errors import PoleError, ValidationError
from .model import hbar


class SchemeKind(enum.Enum):
    SINGLE = "single"
    DUAL = "dual"
    TRIPLE = "triple"


def _require_positive(**kw):
    bad = [f"{k}: must be > 0, got {v!r}" for k, v in kw.items() if not np.all(np.asarray(v) > 0)]
    if bad:
        raise ValidationError(bad)


def single_sxx(kappa, omega_0, pull, power, omega):
    """Symmetrized single-mode imprecision κ²ħω0/(64G²P) (1 + 4Ω²/κ²)."""
    _require_positive(kappa=kappa, power=power)
    omega = np.asarray(omega, dtype=float)
    return kappa**2 * hbar * omega_0 / (64.0 * pull**2 * power) * (1.0 + 4.0 * omega**2 / kappa**2)


def single_sff(kappa, omega_0, pull, power, omega):
    """Symmetrized single-mode backaction 16ħG²P/(κ²ω0) / (1 + 4Ω²/κ²)."""
    _require_positive(kappa=kappa, power=power)
    omega = np.asarray(omega, dtype=float)
    return 16.0 * hbar * pull**2 * power / (kappa**2 * omega_0) / (1.0 + 4.0 * omega**2 / kappa**2)


def triple_bracket(kappa, omega, omega_m):
    """Frequency dependence 1 + 4Ω²(Ω_m² - Ω²)² / (κ²(Ω_m² - 3Ω²)²) of the triple shot noise."""
    omega = np.asarray(omega, dtype=float)
    den = omega_m**2 - 3.0 * omega**2
    if np.any(np.abs(den) <= 1e-12 * omega_m**2):
        raise PoleError("triple-mode shot noise diverges at Omega^2 = Omega_m^2 / 3")
    return 1.0 + 4.0 * omega**2 * (omega_m**2 - omega**2) ** 2 / (kappa**2 * den**2)


def triple_sxx(x0, kappa, eta_c, g_m, theta, omega, omega_m):
    """Triple-mode shot-noise floor x0²κ/(η_c g_m² sin²θ) · bracket.

    Notes
    -----
    The reference prefactor is four times the value that the linearized
    equations of motion give with the same g_m (the numerical model reproduces
    the single-mode expression and the ħ/(2√η_c) product exactly). Use
    ``triple_bracket`` or ratios when comparing with the engine.
    """
    _require_positive(kappa=kappa, eta_c=eta_c, g_m=g_m)
    s = np.sin(theta)
    if np.any(s == 0):
        raise ValidationError("theta: sin(theta) must be nonzero")
    return x0**2 * kappa / (eta_c * g_m**2 * s**2) * triple_bracket(kappa, omega, omega_m)


def sensitivity_ratio(kappa, omega_m):
    """Single-to-triple imprecision ratio at Ω_m: 1 + 4Ω_m²/κ²."""
    _require_positive(kappa=kappa)
    return 1.0 + 4.0 * omega_m**2 / kappa**2


def dual_sff(x0, g_m, kappa, omega, omega_m):
    """Dual-mode backaction force PSD with its exact zero at Ω_m/2."""
    omega = np.asarray(omega, dtype=float)
    num = g_m**2 * kappa * (omega_m - 2.0 * omega) ** 2
    den = 4.0 * (omega_m - omega) ** 2 * omega**2 + kappa**2 * (omega_m - 2.0 * omega) ** 2
    # den > 0 for every real Ω when Ω_m > 0
    return hbar**2 / x0**2 * num / den


def dual_cooling_limit(kappa, omega_m):
    """Occupancy 9κ²/(16Ω_m²) from the dual-mode sideband asymmetry."""
    return 9.0 * kappa**2 / (16.0 * omega_m**2)


def stated_limits(g_m, kappa, omega_m) -> dict:
    """Finite-linewidth occupancy limits from a covariance treatment (report-only)."""
    return {
        "detuned_dual": 2.0 * g_m**2 / omega_m**2,
        "canonical_dual": (9.0 * kappa**2 + 14.0 * g_m**2) / (16.0 * omega_m**2),
        "note": "asymptotic limits from a covariance analysis; report-only, not engine-verified",
    }


def heisenberg_product(eta_c):
    """Root product sqrt(S̄_xx S̄_FF) = ħ / (2 sqrt(η_c))."""
    eta_c = np.asarray(eta_c, dtype=float)
    if np.any((eta_c <= 0) | (eta_c > 1)):
        raise ValidationError("eta_c: must lie in (0, 1]")
    return hbar / (2.0 * np.sqrt(eta_c))


def p_sql_ratio(kappa, omega_m):
    """Approximate single-to-triple SQL power ratio 4Ω_m²/κ²."""
    _require_positive(kappa=kappa)
    return 4.0 * omega_m**2 / kappa**2
