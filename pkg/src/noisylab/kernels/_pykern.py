"""Numpy implementations of the hot kernels.

This is the fallback backend; `noisylab.kernels._ckern` provides the same
functions compiled with Cython. Both operate on C-contiguous float64 2-D
arrays and must agree to floating-point roundoff (the parity tests in
tests/test_kernels.py enforce this).
"""

import numpy as np


def matmul(a, b, trans_a=False, trans_b=False):
    if trans_a:
        a = a.T
    if trans_b:
        b = b.T
    return np.ascontiguousarray(a @ b)


def softmax_rows(z):
    # Row-max subtraction keeps exp() in range for arbitrary logits.
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_rows_grad(p, g):
    # dL/dz = p * (g - sum_j g_j p_j) for p = softmax(z), g = dL/dp.
    inner = (g * p).sum(axis=1, keepdims=True)
    return p * (g - inner)


def relu(x):
    return np.maximum(x, 0.0)


def relu_grad(x, g):
    return np.where(x > 0.0, g, 0.0)


def log_clamped(x, floor, ceil):
    return np.log(np.clip(x, floor, ceil))


def log_clamped_grad(x, g, floor, ceil):
    # Clamped coordinates are flat, so they receive zero gradient.
    inside = (x > floor) & (x < ceil)
    return np.where(inside, g / np.where(inside, x, 1.0), 0.0)
