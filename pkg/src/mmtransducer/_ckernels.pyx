# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batched solver for the small per-frequency linear systems.

Same elimination order as ``_pykernels.solve_batched``: partial pivoting on
squared modulus, reciprocal pivot, row-by-row back substitution.
"""
import numpy as np

cdef inline double _abs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef Py_ssize_t _solve_one(double complex[:, ::1] a, double complex[:, ::1] b) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t k = b.shape[1]
    cdef Py_ssize_t col, row, j, p
    cdef double best, mag
    cdef double complex tmp, inv, f
    cdef Py_ssize_t info = 0

    for col in range(n):
        p = col
        best = _abs2(a[col, col])
        for row in range(col + 1, n):
            mag = _abs2(a[row, col])
            if mag > best:
                best = mag
                p = row
        if p != col:
            for j in range(n):
                tmp = a[col, j]
                a[col, j] = a[p, j]
                a[p, j] = tmp
            for j in range(k):
                tmp = b[col, j]
                b[col, j] = b[p, j]
                b[p, j] = tmp
        if best == 0.0:
            if info == 0:
                info = col + 1
            continue
        inv = 1.0 / a[col, col]
        for row in range(col + 1, n):
            f = a[row, col] * inv
            if f.real == 0.0 and f.imag == 0.0:
                continue
            for j in range(col, n):
                a[row, j] = a[row, j] - f * a[col, j]
            for j in range(k):
                b[row, j] = b[row, j] - f * b[col, j]

    if info != 0:
        return info

    for col in range(n - 1, -1, -1):
        inv = 1.0 / a[col, col]
        for j in range(k):
            tmp = b[col, j]
            for row in range(col + 1, n):
                tmp = tmp - a[col, row] * b[row, j]
            b[col, j] = tmp * inv
    return 0


def solve_batched(a, b):
    """Solve a[i] @ x[i] = b[i] for a stack of square complex systems.

    Returns ``(x, info)``; ``info[i]`` is 0 on success and the 1-based pivot
    column that vanished when system ``i`` is singular.
    """
    cdef double complex[:, :, ::1] aw = np.array(a, dtype=np.complex128, order="C", copy=True)
    cdef double complex[:, :, ::1] bw = np.array(b, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t nb = aw.shape[0]
    cdef Py_ssize_t t
    info_arr = np.zeros(nb, dtype=np.intp)
    cdef Py_ssize_t[::1] info = info_arr
    if aw.shape[1] != aw.shape[2] or bw.shape[0] != nb or bw.shape[1] != aw.shape[1]:
        raise ValueError("solve_batched: incompatible shapes")
    with nogil:
        for t in range(nb):
            info[t] = _solve_one(aw[t], bw[t])
    return np.asarray(bw), info_arr
