# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Same surface as `_pykern`: C-contiguous float64 2-D arrays in, new arrays
out. matmul goes straight to BLAS dgemm; the elementwise/row kernels are
plain typed loops.
"""

import numpy as np

from libc.math cimport exp as c_exp, log as c_log
from scipy.linalg.cython_blas cimport dgemm


def matmul(a, b, trans_a=False, trans_b=False):
    cdef double[:, ::1] av = a
    cdef double[:, ::1] bv = b
    cdef int ta = 1 if trans_a else 0
    cdef int tb = 1 if trans_b else 0
    cdef int m = av.shape[1] if ta else av.shape[0]
    cdef int k = av.shape[0] if ta else av.shape[1]
    cdef int kb = bv.shape[1] if tb else bv.shape[0]
    cdef int n = bv.shape[0] if tb else bv.shape[1]
    if k != kb:
        raise ValueError("inner dimensions disagree")
    out = np.zeros((m, n), dtype=np.float64)
    if m == 0 or n == 0 or k == 0:
        return out
    cdef double[:, ::1] cv = out
    cdef double one = 1.0, zero = 0.0
    cdef int lda = av.shape[1]
    cdef int ldb = bv.shape[1]
    cdef int ldc = n
    # Row-major product via the transposed column-major identity
    # C^T = op(B)^T op(A)^T, so B is passed first with swapped trans flags.
    cdef char ca = b'T' if ta else b'N'
    cdef char cb = b'T' if tb else b'N'
    with nogil:
        dgemm(&cb, &ca, &n, &m, &k, &one,
              &bv[0, 0], &ldb, &av[0, 0], &lda, &zero, &cv[0, 0], &ldc)
    return out


def softmax_rows(z):
    cdef double[:, ::1] zv = z
    cdef Py_ssize_t m = zv.shape[0], c = zv.shape[1]
    out = np.empty((m, c), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, j
    cdef double hi, s
    with nogil:
        for i in range(m):
            hi = zv[i, 0]
            for j in range(1, c):
                if zv[i, j] > hi:
                    hi = zv[i, j]
            s = 0.0
            for j in range(c):
                ov[i, j] = c_exp(zv[i, j] - hi)
                s += ov[i, j]
            for j in range(c):
                ov[i, j] /= s
    return out


def softmax_rows_grad(p, g):
    cdef double[:, ::1] pv = p
    cdef double[:, ::1] gv = g
    cdef Py_ssize_t m = pv.shape[0], c = pv.shape[1]
    out = np.empty((m, c), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, j
    cdef double inner
    with nogil:
        for i in range(m):
            inner = 0.0
            for j in range(c):
                inner += gv[i, j] * pv[i, j]
            for j in range(c):
                ov[i, j] = pv[i, j] * (gv[i, j] - inner)
    return out


def relu(x):
    cdef double[:, ::1] xv = x
    cdef Py_ssize_t m = xv.shape[0], c = xv.shape[1]
    out = np.empty((m, c), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(m):
            for j in range(c):
                ov[i, j] = xv[i, j] if xv[i, j] > 0.0 else 0.0
    return out


def relu_grad(x, g):
    cdef double[:, ::1] xv = x
    cdef double[:, ::1] gv = g
    cdef Py_ssize_t m = xv.shape[0], c = xv.shape[1]
    out = np.empty((m, c), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(m):
            for j in range(c):
                ov[i, j] = gv[i, j] if xv[i, j] > 0.0 else 0.0
    return out


def log_clamped(x, double floor, double ceil):
    cdef double[:, ::1] xv = x
    cdef Py_ssize_t m = xv.shape[0], c = xv.shape[1]
    out = np.empty((m, c), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, j
    cdef double v
    with nogil:
        for i in range(m):
            for j in range(c):
                v = xv[i, j]
                if v < floor:
                    v = floor
                elif v > ceil:
                    v = ceil
                ov[i, j] = c_log(v)
    return out


def log_clamped_grad(x, g, double floor, double ceil):
    cdef double[:, ::1] xv = x
    cdef double[:, ::1] gv = g
    cdef Py_ssize_t m = xv.shape[0], c = xv.shape[1]
    out = np.empty((m, c), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(m):
            for j in range(c):
                if floor < xv[i, j] < ceil:
                    ov[i, j] = gv[i, j] / xv[i, j]
                else:
                    ov[i, j] = 0.0
    return out
