import math

import numpy as np
import pytest

from mmtransducer import engine, sweep
from mmtransducer.errors import BoundaryError, NoCancellationError, ValidationError

from conftest import OMEGA_M, dual, make_config, single, triple

K = OMEGA_M / 10


def test_golden_section_quadratic():
    r = sweep.golden_section(lambda x: (x - 0.3) ** 2, -1.0, 2.0, 1e-9)
    assert r.x == pytest.approx(0.3, abs=1e-8)
    assert r.width <= 1e-9 and r.lo <= 0.3 <= r.hi


def test_p_sql_reaches_bound():
    r = sweep.find_p_sql(make_config(triple(K)))
    assert r.min_normalized_noise == pytest.approx(1.0, abs=1e-4)
    assert r.bracket_width <= 1e-6


def test_p_sql_independent_of_start_power():
    a = sweep.find_p_sql(make_config(triple(K), power=1e-12))
    b = sweep.find_p_sql(make_config(triple(K), power=1e-3))
    assert a.min_normalized_noise == pytest.approx(b.min_normalized_noise, rel=1e-6)
    assert a.p_sql == pytest.approx(b.p_sql, rel=1e-5)


def test_p_sql_boundary():
    cfg = make_config(triple(K))
    p = sweep.find_p_sql(cfg).p_sql
    with pytest.raises(BoundaryError):
        sweep.find_p_sql(cfg, p_range=(p * 2, p * 100))


def test_single_mode_p_sql_follows_linewidth():
    # P_sql ∝ κ² + 4Ω_m² for a resonant single mode
    lo = sweep.find_p_sql(make_config(single(OMEGA_M / 10))).p_sql
    hi = sweep.find_p_sql(make_config(single(OMEGA_M))).p_sql
    assert lo / hi == pytest.approx((0.01 + 4) / (1 + 4), rel=0.05)


def test_kappa_trace_direction():
    tr = sweep.kappa_minima_trace(make_config(triple(K)), OMEGA_M / 100, OMEGA_M, 5)
    assert tr.notes["p_sql_vs_kappa"] == "increasing"
    assert not tr.gaps
    np.testing.assert_allclose(tr.values, 1.0, atol=1e-4)


def test_run_sweep_values_equal_direct_calls():
    cfg = make_config(triple(K))
    p = sweep.find_p_sql(cfg).p_sql
    spec = sweep.SweepSpec(cfg, "power", p / 100, p * 100, 21, "logarithmic")
    res = sweep.run_sweep(spec, threads=4)
    for x, y in zip(res.axis_values[::5], res.values[::5]):
        assert y == sweep.normalized_total_noise(sweep.with_power(cfg, x))
    assert not res.at_boundary
    assert res.argmin == pytest.approx(p, rel=1e-4)
    assert res.values.tobytes() == sweep.run_sweep(spec, threads=1).values.tobytes()


def test_run_sweep_boundary_flag_and_gaps():
    cfg = make_config(dual(K), g_m=K / 20)
    spec = sweep.SweepSpec(cfg, "theta", 0.2, 1.0, 5, objective="occupancy")
    assert sweep.run_sweep(spec).values.size == 5
    cfg1 = make_config(single(K), g_m=K / 20)
    res = sweep.run_sweep(sweep.SweepSpec(cfg1, "detuning", -0.5 * OMEGA_M, 0.5 * OMEGA_M, 5, objective="occupancy"))
    assert len(res.gaps) >= 3  # zero and negative offsets give no net cooling
    mono = sweep.run_sweep(sweep.SweepSpec(cfg1, "power", 1e-9, 1e-6, 4, "logarithmic",
                                           "backaction_at_minus_omega_m"))
    assert mono.at_boundary and mono.argmin == 1e-9


def test_sweep_spec_validation():
    cfg = make_config(triple(K))
    with pytest.raises(ValidationError) as exc:
        sweep.SweepSpec(cfg, "power", 1.0, 0.5, 2, "cubic")
    assert len(exc.value.problems) == 3
    with pytest.raises(ValidationError):
        sweep.SweepSpec(cfg, "mass", 0.0, 1.0, 5)


def test_cancellation_at_half_omega_m_for_baseline_dual():
    cfg = make_config(dual(K), g_m=K / 20)
    r = sweep.find_cancellation_detuning(cfg, target=OMEGA_M / 2)
    assert abs(r.offset) < 1e-6 * OMEGA_M
    assert r.relative_value < 1e-8
    # at -Ω_m the baseline ladder interferes constructively instead
    assert engine.backaction_spectrum(cfg, -OMEGA_M) > 0


def test_cancellation_for_wide_spacing():
    cfg = make_config(dual(K, spacing=4 * OMEGA_M), g_m=K / 20)
    r = sweep.find_cancellation_detuning(cfg)
    assert r.relative_value < 1e-8
    # zero sits midway between the modes
    assert r.offset == pytest.approx(-3 * OMEGA_M, rel=1e-6)


def test_no_cancellation_for_independent_modes():
    cfg = make_config(dual(K, spacing=4 * OMEGA_M), g_m=K / 20, mode="independent")
    with pytest.raises(NoCancellationError) as exc:
        sweep.find_cancellation_detuning(cfg)
    assert exc.value.best.relative_value > 1e-8


@pytest.mark.parametrize("omega", [0.0, 0.3 * OMEGA_M, OMEGA_M, 1.7 * OMEGA_M])
def test_optimal_theta_is_phase_quadrature(omega):
    cfg = make_config(triple(K), g_m=K / 20)
    r = sweep.optimize_theta(cfg, omega)
    assert r.theta_opt == pytest.approx(math.pi / 2, abs=1e-6)
    f = lambda th: engine.imprecision_spectrum(cfg.replace(theta=th), omega, symmetrized=True)  # noqa: E731
    assert f(0.4) == pytest.approx(f(math.pi - 0.4), rel=1e-9)


def test_schemes_agree_for_broad_cavity():
    k = 20 * OMEGA_M
    rs = sweep.find_p_sql(make_config(single(k)))
    rt = sweep.find_p_sql(make_config(triple(k)))
    assert rs.p_sql / rt.p_sql == pytest.approx(1.0, rel=0.10)
