"""Dense-matrix primitives with tape-based reverse-mode differentiation.

Everything is a 2-D float64 matrix (a scalar is 1x1, a row vector 1xk).
Operations involving at least one tape-bound `Tensor` append a backward
closure to that tape; `GradTape.backward` replays the closures in strict
reverse order of recording, accumulating gradients into every tape-bound
operand. Tensors built without a tape are constants and receive no gradient.

The heavy lifting (matmul, softmax, relu, clamped log) is delegated to
`noisylab.kernels`, which picks the compiled backend when available.
"""

import numpy as np

from . import kernels
from .errors import DegenerateInputError, NonFiniteError, ShapeError


def as_matrix(data):
    """Coerce to a C-contiguous float64 2-D array, rejecting other ranks."""
    arr = np.ascontiguousarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {arr.shape}")
    return arr


class GradTape:
    """Ordered record of primitive operations for reverse-mode replay."""

    __slots__ = ("_ops",)

    def __init__(self):
        self._ops = []

    def __len__(self):
        return len(self._ops)

    def record(self, backward_fn):
        self._ops.append(backward_fn)

    def backward(self, loss):
        """Seed d(loss)/d(loss) = 1 and replay the tape back to the leaves."""
        if not isinstance(loss, Tensor) or loss.data.shape != (1, 1):
            raise ShapeError("backward() needs a 1x1 scalar Tensor")
        if loss.tape is not self:
            raise ValueError("loss was not recorded on this tape")
        loss.grad = np.ones((1, 1))
        for fn in reversed(self._ops):
            fn()


class Tensor:
    """A matrix plus its gradient slot and (optional) owning tape."""

    __slots__ = ("data", "grad", "tape")

    def __init__(self, data, tape=None):
        self.data = as_matrix(data)
        if not np.all(np.isfinite(self.data)):
            raise NonFiniteError("matrix contains NaN or Inf")
        self.grad = None
        self.tape = tape

    @property
    def shape(self):
        return self.data.shape

    def item(self):
        if self.data.size != 1:
            raise ShapeError(f"item() on non-scalar shape {self.data.shape}")
        return float(self.data[0, 0])

    def __repr__(self):
        tag = "tracked" if self.tape is not None else "const"
        return f"Tensor({self.data!r}, {tag})"

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)


def _coerce(x):
    if isinstance(x, Tensor):
        return x
    if isinstance(x, (int, float, np.floating, np.integer)):
        return Tensor(np.array([[float(x)]]))
    return Tensor(x)


def _tape_of(*tensors):
    tape = None
    for t in tensors:
        if t.tape is None:
            continue
        if tape is None:
            tape = t.tape
        elif tape is not t.tape:
            raise ValueError("operands were recorded on different tapes")
    return tape


def _accum(t, g):
    """Add g into t.grad, skipping constants (no tape, no gradient)."""
    if t.tape is None:
        return
    if t.grad is None:
        t.grad = np.ascontiguousarray(g)
    else:
        t.grad = t.grad + g


def _unbroadcast(g, shape):
    """Reduce a broadcasted gradient back to the operand's shape."""
    if g.shape == shape:
        return g
    if shape[0] == 1 and g.shape[0] != 1:
        g = g.sum(axis=0, keepdims=True)
    if shape[1] == 1 and g.shape[1] != 1:
        g = g.sum(axis=1, keepdims=True)
    if g.shape != shape:
        raise ShapeError(f"cannot reduce gradient {g.shape} to {shape}")
    return g


def _binary(a, b, value, grad_a, grad_b):
    a, b = _coerce(a), _coerce(b)
    tape = _tape_of(a, b)
    out = Tensor(value(a.data, b.data), tape)
    if tape is not None:
        def _bw():
            g = out.grad
            if g is None:
                return
            _accum(a, _unbroadcast(grad_a(g, a.data, b.data), a.data.shape))
            _accum(b, _unbroadcast(grad_b(g, a.data, b.data), b.data.shape))
        tape.record(_bw)
    return out


def add(a, b):
    return _binary(a, b, lambda x, y: x + y,
                   lambda g, x, y: g,
                   lambda g, x, y: g)


def sub(a, b):
    return _binary(a, b, lambda x, y: x - y,
                   lambda g, x, y: g,
                   lambda g, x, y: -g)


def mul(a, b):
    return _binary(a, b, lambda x, y: x * y,
                   lambda g, x, y: g * y,
                   lambda g, x, y: g * x)


def div(a, b):
    return _binary(a, b, lambda x, y: x / y,
                   lambda g, x, y: g / y,
                   lambda g, x, y: -g * x / (y * y))


def neg(a):
    a = _coerce(a)
    out = Tensor(-a.data, a.tape)
    if a.tape is not None:
        def _bw():
            if out.grad is not None:
                _accum(a, -out.grad)
        a.tape.record(_bw)
    return out


def matmul(a, b):
    a, b = _coerce(a), _coerce(b)
    if a.data.shape[1] != b.data.shape[0]:
        raise ShapeError(
            f"matmul dimension mismatch: {a.data.shape} x {b.data.shape}"
        )
    tape = _tape_of(a, b)
    out = Tensor(kernels.matmul(a.data, b.data), tape)
    if tape is not None:
        def _bw():
            g = out.grad
            if g is None:
                return
            g = np.ascontiguousarray(g)
            _accum(a, kernels.matmul(g, b.data, trans_b=True))
            _accum(b, kernels.matmul(a.data, g, trans_a=True))
        tape.record(_bw)
    return out


def transpose(a):
    a = _coerce(a)
    out = Tensor(a.data.T, a.tape)
    if a.tape is not None:
        def _bw():
            if out.grad is not None:
                _accum(a, np.ascontiguousarray(out.grad.T))
        a.tape.record(_bw)
    return out


def relu(a):
    a = _coerce(a)
    out = Tensor(kernels.relu(a.data), a.tape)
    if a.tape is not None:
        def _bw():
            g = out.grad
            if g is None:
                return
            _accum(a, kernels.relu_grad(a.data, np.ascontiguousarray(g)))
        a.tape.record(_bw)
    return out


def softmax_rows(a):
    """Row-wise softmax, stabilized by row-max subtraction."""
    a = _coerce(a)
    out = Tensor(kernels.softmax_rows(a.data), a.tape)
    if a.tape is not None:
        def _bw():
            g = out.grad
            if g is None:
                return
            _accum(a, kernels.softmax_rows_grad(out.data, np.ascontiguousarray(g)))
        a.tape.record(_bw)
    return out


def log_clamped(a, floor=1e-12, ceil=np.inf):
    """log of the input clamped into [floor, ceil].

    Probability arguments use ceil=1. Clamped coordinates sit on a flat
    piece of the function and therefore get zero gradient.
    """
    a = _coerce(a)
    out = Tensor(kernels.log_clamped(a.data, float(floor), float(ceil)), a.tape)
    if a.tape is not None:
        def _bw():
            g = out.grad
            if g is None:
                return
            _accum(a, kernels.log_clamped_grad(
                a.data, np.ascontiguousarray(g), float(floor), float(ceil)))
        a.tape.record(_bw)
    return out


def exp(a):
    a = _coerce(a)
    out = Tensor(np.exp(a.data), a.tape)
    if a.tape is not None:
        def _bw():
            if out.grad is not None:
                _accum(a, out.grad * out.data)
        a.tape.record(_bw)
    return out


def sqrt(a):
    a = _coerce(a)
    out = Tensor(np.sqrt(a.data), a.tape)
    if a.tape is not None:
        def _bw():
            if out.grad is not None:
                _accum(a, out.grad * (0.5 / out.data))
        a.tape.record(_bw)
    return out


def sum_all(a):
    """Sum of every entry, as a 1x1 matrix."""
    a = _coerce(a)
    out = Tensor(a.data.sum(keepdims=True).reshape(1, 1), a.tape)
    if a.tape is not None:
        def _bw():
            g = out.grad
            if g is None:
                return
            _accum(a, np.full(a.data.shape, g[0, 0]))
        a.tape.record(_bw)
    return out


def row_sum(a):
    """Per-row sum: (m, k) -> (m, 1)."""
    a = _coerce(a)
    out = Tensor(a.data.sum(axis=1, keepdims=True), a.tape)
    if a.tape is not None:
        def _bw():
            g = out.grad
            if g is None:
                return
            _accum(a, np.broadcast_to(g, a.data.shape).copy())
        a.tape.record(_bw)
    return out


def col_sum(a):
    """Per-column sum: (m, k) -> (1, k)."""
    a = _coerce(a)
    out = Tensor(a.data.sum(axis=0, keepdims=True), a.tape)
    if a.tape is not None:
        def _bw():
            g = out.grad
            if g is None:
                return
            _accum(a, np.broadcast_to(g, a.data.shape).copy())
        a.tape.record(_bw)
    return out


def diag_part(a):
    """Main diagonal of a square matrix, as an (m, 1) column."""
    a = _coerce(a)
    m, n = a.data.shape
    if m != n:
        raise ShapeError(f"diag_part needs a square matrix, got {a.data.shape}")
    out = Tensor(np.diagonal(a.data).reshape(m, 1), a.tape)
    if a.tape is not None:
        def _bw():
            g = out.grad
            if g is None:
                return
            scatter = np.zeros((m, m))
            idx = np.arange(m)
            scatter[idx, idx] = g[:, 0]
            _accum(a, scatter)
        a.tape.record(_bw)
    return out


def cosine_sim(u, v):
    """Cosine similarity of two nonzero vectors (plain float, no tape)."""
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ShapeError(f"vector lengths differ: {u.shape[0]} vs {v.shape[0]}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DegenerateInputError("cosine similarity of a zero-norm vector")
    return float(u @ v / (nu * nv))
