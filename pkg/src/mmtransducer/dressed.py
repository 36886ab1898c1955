"""Three degenerate resonators coupled in series.

The chain a - b - c with hopping g_c splits into dressed modes at
ω0 - √2 g_c, ω0, ω0 + √2 g_c. Only c couples to the mechanics, so the
mechanical interaction seen by the dressed modes is weighted by c's
components in the dressed basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# tabulated reference dressed-state rows, ordered (a_0, a_-, a_+)
REFERENCE_DRESSED_ROWS = np.array(
    [
        [0.0, -1.0, 1.0],
        [-1.0 / math.sqrt(2.0), 0.5, 0.5],
        [1.0 / math.sqrt(2.0), 0.5, 0.5],
    ]
)


@dataclass(frozen=True)
class CoupledTriplet:
    omega_deg: float
    g_c: float
    mechanically_coupled_index: int = 2
    kappa_tot: "float | None" = None

    def __post_init__(self):
        problems = []
        if not (math.isfinite(self.omega_deg) and math.isfinite(self.g_c)):
            problems.append("omega_deg/g_c: must be finite")
        elif self.g_c < 0:
            problems.append(f"g_c: must be >= 0, got {self.g_c!r}")
        if self.mechanically_coupled_index not in (0, 1, 2):
            problems.append("mechanically_coupled_index: must be 0, 1 or 2")
        if problems:
            raise ValidationError(problems)

    @property
    def strong_coupling(self) -> "bool | None":
        """g_c > κ_tot, or None when no loss rate is attached."""
        if self.kappa_tot is None:
            return None
        return self.g_c > self.kappa_tot


def coupling_matrix(t: CoupledTriplet) -> np.ndarray:
    """Bare-basis (a, b, c) frequency matrix of the series chain."""
    h = np.diag([t.omega_deg] * 3).astype(float)
    h[0, 1] = h[1, 0] = t.g_c
    h[1, 2] = h[2, 1] = t.g_c
    return h


@dataclass(frozen=True)
class NormalModes:
    eigenfrequencies: np.ndarray  # ascending: ω-, ω0, ω+
    basis_change: np.ndarray  # rows are dressed modes in the bare basis
    shifts: np.ndarray  # eigenfrequencies - omega_deg, without cancellation error

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(self.shifts)


def _fix_sign(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    for x in v:
        if abs(x) > tol:
            return v if x > 0 else -v
    return v


def normal_modes(t: CoupledTriplet) -> NormalModes:
    if t.g_c == 0:
        return NormalModes(np.full(3, float(t.omega_deg)), np.eye(3), np.zeros(3))
    # diagonalise the hopping part only; the degenerate diagonal just shifts
    hop = coupling_matrix(t) - t.omega_deg * np.eye(3)
    vals, vecs = np.linalg.eigh(hop / t.g_c)
    order = np.argsort(vals)
    basis = np.array([_fix_sign(vecs[:, i]) for i in order])
    shifts = t.g_c * vals[order]
    return NormalModes(t.omega_deg + shifts, basis, shifts)


@dataclass(frozen=True)
class InducedCoupling:
    weights: np.ndarray  # component of the coupled bare mode on each dressed mode
    coupling: np.ndarray  # G w_j w_k, the induced multimode pull matrix
    equal_magnitude: bool


def induced_multimode_coupling(t: CoupledTriplet, pull: float = 1.0) -> InducedCoupling:
    """Express the mechanically coupled bare mode in the dressed basis.

    With bare = Bᵀ · dressed (B orthogonal), the weights are column
    ``mechanically_coupled_index`` of B, and c†c becomes
    Σ_jk w_j w_k a_j† a_k.
    """
    b = normal_modes(t).basis_change
    w = np.linalg.inv(b).T[:, t.mechanically_coupled_index]
    mags = np.abs(w)
    equal = bool(np.allclose(mags, mags[0], rtol=1e-9, atol=0.0))
    return InducedCoupling(w, pull * np.outer(w, w), equal)


def required_gc(omega_m: float) -> float:
    """Hopping rate that makes adjacent dressed modes Ω_m apart."""
    if omega_m < 0:
        raise ValidationError("omega_m: must be >= 0")
    return omega_m / math.sqrt(2.0)


def compare_reference_basis(t: CoupledTriplet, tol: float = 1e-9) -> dict:
    """Check the reference dressed-state rows against the computed eigenvectors.

    A reference row matches if it is (up to normalisation) an eigenvector of the
    coupling matrix. Residuals are in units of g_c.
    """
    hop = coupling_matrix(t) - t.omega_deg * np.eye(3)
    scale = t.g_c if t.g_c > 0 else 1.0
    rows = []
    for row in REFERENCE_DRESSED_ROWS:
        v = row / np.linalg.norm(row)
        hv = hop @ v / scale
        lam = float(v @ hv)
        resid = float(np.linalg.norm(hv - lam * v))
        rows.append({"row": row.tolist(), "shift_over_gc": lam, "residual": resid,
                     "is_eigenvector": resid <= tol})
    return {"mismatch": not all(r["is_eigenvector"] for r in rows), "rows": rows}
