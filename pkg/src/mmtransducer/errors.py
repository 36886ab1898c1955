"""Exception types raised by the transducer toolkit.

Each error that the command line maps to a distinct exit code has its own
class so callers can dispatch on type rather than on message text.
"""


class TransducerError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(TransducerError, ValueError):
    """One or more parameter invariants are violated.

    ``problems`` holds every violated invariant, not just the first.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class SingularityError(TransducerError, ArithmeticError):
    """The frequency-domain linear system is singular at one or more Ω."""

    def __init__(self, omegas, message="singular system matrix"):
        self.omegas = [float(w) for w in omegas]
        listed = ", ".join(repr(w) for w in self.omegas[:8])
        if len(self.omegas) > 8:
            listed += ", ..."
        super().__init__(f"{message} at Omega = [{listed}] rad/s")


class ZeroGainError(TransducerError, ZeroDivisionError):
    """Displacement-to-output transduction gain vanishes, so no referral."""

    def __init__(self, omegas):
        self.omegas = [float(w) for w in omegas]
        listed = ", ".join(repr(w) for w in self.omegas[:8])
        super().__init__(f"zero transduction gain at Omega = [{listed}] rad/s")


class PoleError(TransducerError, ArithmeticError):
    """A closed-form expression is evaluated on its pole."""


class NoNetCoolingError(TransducerError):
    """Force spectrum does not favour phonon removal (r >= 1)."""

    def __init__(self, ratio):
        self.ratio = float(ratio)
        kind = "amplification" if self.ratio > 1 else "no sideband asymmetry"
        super().__init__(
            f"no net cooling: S_FF(-Omega_m)/S_FF(+Omega_m) = {self.ratio!r} ({kind})"
        )


class BoundaryError(TransducerError):
    """An optimum sits on the edge of the search range."""

    def __init__(self, message, best_x=None, best_value=None):
        self.best_x = best_x
        self.best_value = best_value
        super().__init__(message)


class NoCancellationError(TransducerError):
    """A detuning search found no sub-threshold backaction minimum."""

    def __init__(self, best):
        self.best = best
        super().__init__(
            "no cancellation found; best candidate offset "
            f"{best.offset!r} rad/s with relative value {best.relative_value!r}"
        )


class NoAnalyticCounterpartError(TransducerError):
    """The mode ladder is not one of the canonical single/dual/triple schemes."""
