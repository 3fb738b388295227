"""Central-difference gradient oracle.

Used by the test suites to validate every differentiable operation and the
full model backward pass against an implementation-independent reference.
"""

import numpy as np

from .errors import DeterminismError, ShapeError


def central_difference(loss_fn, params, epsilon=1e-5):
    """Numeric gradient of a scalar function via central differences.

    loss_fn receives an array shaped like params and returns the loss as a
    float (any second return value is ignored).
    """
    params = np.asarray(params, dtype=np.float64)
    grad = np.empty_like(params)
    for idx in np.ndindex(params.shape):
        bumped = params.copy()
        bumped[idx] = params[idx] + epsilon
        f_plus = _scalar(loss_fn(bumped))
        bumped[idx] = params[idx] - epsilon
        f_minus = _scalar(loss_fn(bumped))
        grad[idx] = (f_plus - f_minus) / (2.0 * epsilon)
    return grad


def grad_check(loss_fn, params, epsilon=1e-5):
    """Max relative disagreement between analytic and numeric gradients.

    loss_fn(params) must return (loss_value, grad_array). It is evaluated
    twice at the unperturbed point; any difference means the function is not
    deterministic and the check would be meaningless, so that raises.
    The per-coordinate relative error is
    |analytic - numeric| / max(1, |analytic|, |numeric|).
    """
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    params = np.asarray(params, dtype=np.float64)
    value_a, analytic = loss_fn(params)
    value_b, _ = loss_fn(params)
    if _scalar(value_a) != _scalar(value_b):
        raise DeterminismError(
            f"loss_fn returned {value_a!r} then {value_b!r} at the same point"
        )
    analytic = np.asarray(analytic, dtype=np.float64)
    if analytic.shape != params.shape:
        raise ShapeError(
            f"gradient shape {analytic.shape} != parameter shape {params.shape}"
        )
    numeric = central_difference(lambda p: loss_fn(p)[0], params, epsilon)
    denom = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
    rel = np.abs(analytic - numeric) / denom
    return float(rel.max()) if rel.size else 0.0


def _scalar(value):
    if isinstance(value, tuple):
        value = value[0]
    arr = np.asarray(value, dtype=np.float64)
    if arr.size != 1:
        raise ShapeError(f"loss must be scalar, got shape {arr.shape}")
    return float(arr.reshape(()))
