import math
import sys

import numpy as np
import pytest

from mmtransducer import DriveConfig, MechanicalOscillator, ModeLadder, SystemConfig, power_for_coupling

OMEGA_M = 2 * math.pi * 10e6
OMEGA_0 = 2 * math.pi * 194e12
PULL = 1e19


def oscillator(gamma_ratio=1e-3):
    return MechanicalOscillator(OMEGA_M, OMEGA_M * gamma_ratio, 1e-11)


def make_config(ladder, g_m=None, power=1e-9, theta=math.pi / 2, mode="shared_quantum", grid=(), **kw):
    """Scenario with either a target coupling g_m or a fixed input power."""
    osc = kw.pop("osc", None) or oscillator()
    drive = DriveConfig(power, OMEGA_0, PULL)
    if g_m is not None:
        drive = DriveConfig(power_for_coupling(osc, ladder, drive, g_m), OMEGA_0, PULL)
    return SystemConfig(osc, ladder, drive, theta, mode, grid, **kw)


def single(kappa, kappa_0=0.0):
    return ModeLadder.single(kappa - kappa_0, kappa_0)


def dual(kappa, spacing=OMEGA_M, kappa_0=0.0):
    return ModeLadder.dual(spacing, kappa - kappa_0, kappa_0)


def triple(kappa, kappa_0=0.0):
    return ModeLadder.triple(OMEGA_M, kappa - kappa_0, kappa_0)


@pytest.fixture
def grid():
    return np.linspace(-2 * OMEGA_M, 2 * OMEGA_M, 401)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results, key=lambda s: int(s.split(":")[0])):
        terminalreporter.write_line(results[key])
