"""Shared helpers for the test suite."""

import numpy as np

from noisylab import autodiff as ad


def tape_loss(build):
    """Wrap a Tensor -> scalar Tensor builder as a grad_check-able closure.

    Returns loss_fn(params) -> (value, grad) where grad is d(loss)/d(params)
    computed by tape replay.
    """

    def loss_fn(p):
        tape = ad.GradTape()
        leaf = ad.Tensor(p, tape)
        out = build(leaf)
        tape.backward(out)
        grad = leaf.grad if leaf.grad is not None else np.zeros_like(np.asarray(p, float))
        return out.item(), grad

    return loss_fn


def random_simplex_rows(rng, m, c):
    """Strictly positive row-stochastic matrix."""
    raw = rng.uniform(0.1, 1.0, size=(m, c))
    return raw / raw.sum(axis=1, keepdims=True)
