import math

import numpy as np
import pytest

from mmtransducer import analytic
from mmtransducer.errors import PoleError, ValidationError
from mmtransducer.model import hbar

WM = 1.0
X0, G = 2e-15, 0.05


def test_single_mode_product_is_half_hbar():
    for kappa, p, w in [(0.1, 1e-6, 0.0), (3.0, 2e-3, 1.7), (0.01, 1.0, -5.0)]:
        prod = analytic.single_sxx(kappa, 1e15, 1e19, p, w) * analytic.single_sff(kappa, 1e15, 1e19, p, w)
        assert prod == pytest.approx((hbar / 2) ** 2, rel=1e-14)


def test_single_mode_scalings():
    args = (0.2, 1e15, 1e19)
    assert analytic.single_sxx(*args, 1e-3, 0.1) == pytest.approx(2 * analytic.single_sxx(*args, 1e-3, 0.0))
    assert analytic.single_sxx(*args, 4e-3, 0.3) == pytest.approx(analytic.single_sxx(*args, 1e-3, 0.3) / 4)
    assert analytic.single_sff(*args, 4e-3, 0.3) == pytest.approx(4 * analytic.single_sff(*args, 1e-3, 0.3))
    with pytest.raises(ValidationError):
        analytic.single_sxx(0.2, 1e15, 1e19, 0.0, 0.0)


def test_triple_sxx():
    base = X0**2 * 0.1 / (0.9 * G**2)
    assert analytic.triple_sxx(X0, 0.1, 0.9, G, math.pi / 2, 0.0, WM) == pytest.approx(base, rel=1e-14)
    assert analytic.triple_sxx(X0, 0.1, 0.9, G, math.pi / 2, WM, WM) == pytest.approx(base, rel=1e-14)
    th = np.linspace(0.1, math.pi - 0.1, 201)
    vals = analytic.triple_sxx(X0, 0.1, 0.9, G, th, 0.4, WM)
    assert th[np.argmin(vals)] == pytest.approx(math.pi / 2)
    q = analytic.triple_sxx(X0, 0.1, 0.9, G, math.pi / 4, 0.4, WM)
    assert q * math.sin(math.pi / 4) ** 2 == pytest.approx(analytic.triple_sxx(X0, 0.1, 0.9, G, math.pi / 2, 0.4, WM))
    with pytest.raises(PoleError):
        analytic.triple_bracket(0.1, WM / math.sqrt(3.0), WM)
    with pytest.raises(ValidationError):
        analytic.triple_sxx(X0, 0.1, 0.9, G, 0.0, 0.4, WM)


def test_sensitivity_and_power_ratios():
    assert analytic.sensitivity_ratio(0.1, 1.0) == pytest.approx(401.0, rel=1e-14)
    assert analytic.sensitivity_ratio(2.0, 1.0) == 2.0
    assert analytic.sensitivity_ratio(1e9, 1.0) == pytest.approx(1.0)
    assert analytic.p_sql_ratio(2.0, 1.0) == 1.0
    assert analytic.p_sql_ratio(0.1, 1.0) == pytest.approx(400.0)
    for k in (0.03, 0.5, 4.0):
        assert analytic.p_sql_ratio(k, 1.0) == pytest.approx(analytic.sensitivity_ratio(k, 1.0) - 1)


def test_dual_sff_values():
    k = 0.1
    scale = hbar**2 * G**2 / X0**2
    assert analytic.dual_sff(X0, G, k, WM / 2, WM) == 0.0
    assert analytic.dual_sff(X0, G, k, WM, WM) == pytest.approx(scale / k, rel=1e-14)
    assert analytic.dual_sff(X0, G, k, -WM, WM) == pytest.approx(9 * scale * k / (16 + 9 * k**2), rel=1e-14)


def test_dual_factor_nine_limit():
    for k in (1e-3, 1e-5):
        v = analytic.dual_sff(X0, G, k, -WM, WM) * 16 / (9 * k * hbar**2 * G**2 / X0**2)
        assert v == pytest.approx(1.0, rel=2 * k**2)


def test_cooling_limits():
    assert analytic.dual_cooling_limit(0.1, 1.0) == pytest.approx(9 / 1600)
    lim = analytic.stated_limits(0.0, 0.1, 1.0)
    assert lim["canonical_dual"] == pytest.approx(analytic.dual_cooling_limit(0.1, 1.0))
    assert analytic.stated_limits(0.05, 0.1, 1.0)["detuned_dual"] == pytest.approx(0.1**2 / 2)


def test_heisenberg_product():
    assert analytic.heisenberg_product(1.0) == pytest.approx(hbar / 2)
    assert analytic.heisenberg_product(0.25) == pytest.approx(hbar)
    assert np.all(np.diff(analytic.heisenberg_product(np.linspace(0.1, 1, 10))) < 0)
    with pytest.raises(ValidationError):
        analytic.heisenberg_product(0.0)
