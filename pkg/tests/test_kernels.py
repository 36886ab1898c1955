import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmtransducer import _pykernels, kernels

BACKENDS = [_pykernels.solve_batched]
try:
    from mmtransducer import _ckernels

    BACKENDS.append(_ckernels.solve_batched)
except ImportError:  # pragma: no cover - extension not built
    _ckernels = None


def random_system(seed, n=5, batch=7, rhs=3):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(batch, n, n)) + 1j * rng.normal(size=(batch, n, n))
    b = rng.normal(size=(batch, n, rhs)) + 1j * rng.normal(size=(batch, n, rhs))
    return a, b


@pytest.mark.parametrize("solve", BACKENDS)
def test_matches_numpy(solve):
    a, b = random_system(0)
    x, info = solve(a, b)
    assert not info.any()
    np.testing.assert_allclose(x, np.linalg.solve(a, b), rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("solve", BACKENDS)
def test_reports_singular_column(solve):
    a, b = random_system(1, n=3, batch=2)
    a[1, :, 2] = a[1, :, 0] + a[1, :, 1]
    a[1, :, 1] = 0.0
    x, info = solve(a, b)
    assert info[0] == 0 and info[1] != 0


@pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")
@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 11), st.integers(1, 9))
def test_backends_agree_bitwise(seed, n, batch):
    a, b = random_system(seed, n=n, batch=batch)
    xc, ic = _ckernels.solve_batched(a, b)
    xp, ip = _pykernels.solve_batched(a, b)
    np.testing.assert_array_equal(ic, ip)
    np.testing.assert_allclose(xc, xp, rtol=1e-12, atol=1e-13)


@pytest.mark.parametrize("solve", BACKENDS)
def test_result_independent_of_batch_composition(solve):
    a, b = random_system(2, batch=9)
    whole, _ = solve(a, b)
    parts = np.concatenate([solve(a[i:i + 3], b[i:i + 3])[0] for i in range(0, 9, 3)])
    np.testing.assert_array_equal(whole, parts)


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
