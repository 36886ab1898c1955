"""Pure-Python/numpy fallback for the compiled kernels.

Vectorised over the batch axis; the per-system arithmetic follows the same
order as the Cython version so both backends agree to rounding.
"""
import numpy as np


def solve_batched(a, b):
    """Solve a[i] @ x[i] = b[i] for a stack of square complex systems.

    Returns ``(x, info)``; ``info[i]`` is 0 on success and the 1-based pivot
    column that vanished when system ``i`` is singular.
    """
    a = np.array(a, dtype=np.complex128, copy=True)
    b = np.array(b, dtype=np.complex128, copy=True)
    if a.ndim != 3 or a.shape[1] != a.shape[2] or b.shape[:2] != a.shape[:2]:
        raise ValueError("solve_batched: incompatible shapes")
    nb, n, _ = a.shape
    info = np.zeros(nb, dtype=np.intp)
    rows = np.arange(nb)

    for col in range(n):
        sub = a[:, col:, col]
        p = col + np.argmax(sub.real**2 + sub.imag**2, axis=1)
        swap = p != col
        if swap.any():
            r = rows[swap]
            a[r, col], a[r, p[swap]] = a[r, p[swap]], a[r, col].copy()
            b[r, col], b[r, p[swap]] = b[r, p[swap]], b[r, col].copy()
        piv = a[:, col, col]
        bad = (piv.real == 0.0) & (piv.imag == 0.0)
        info[bad & (info == 0)] = col + 1
        inv = 1.0 / np.where(bad, 1.0, piv)
        f = a[:, col + 1:, col] * inv[:, None]
        f[bad] = 0.0
        a[:, col + 1:, col:] -= f[:, :, None] * a[:, None, col, col:]
        b[:, col + 1:, :] -= f[:, :, None] * b[:, None, col, :]

    x = b
    for col in range(n - 1, -1, -1):
        acc = x[:, col, :].copy()
        for row in range(col + 1, n):
            acc = acc - a[:, col, row, None] * x[:, row, :]
        piv = a[:, col, col]
        x[:, col, :] = acc * (1.0 / np.where(piv == 0, 1.0, piv))[:, None]
    return x, info
