"""Dense 2-D float32 tensors with reverse-mode differentiation.

A Tensor wraps a contiguous row-major float32 matrix plus an optional
gradient buffer. Operations record nodes onto an explicit Tape; calling
``backward`` on a scalar loss sweeps the tape in reverse topological order
and accumulates gradients additively into every reachable tensor that
requires them. Passing ``tape=None`` to any op runs it in inference mode
(no recording, no gradients).

The tape is single-use: a second backward without ``reset()`` raises. Each
tape is single-threaded; independent tapes may run on separate threads.
"""

import itertools

import numpy as np

from . import kernels
from .basis import BasisKind, grid_spec

# elementwise kinds trainable through apply_unary (tan/dog are benchmark/basis
# only, silu has its own op)
UNARY_OP_KINDS = ("relu", "sin", "cos", "arctan", "tanh")

_ids = itertools.count()


class ShapeError(ValueError):
    """Operand shapes do not satisfy the operation's contract."""


class TapeError(RuntimeError):
    """Backward called on an exhausted tape or on a non-tape tensor."""


class UnsupportedKindError(ValueError):
    """Basis kind not usable with this operation."""


class LabelError(ValueError):
    """Class label outside [0, C)."""


class Tensor:
    """2-D float32 matrix with an optional grad buffer of the same shape."""

    __slots__ = ("data", "grad", "requires_grad", "node_id")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float32)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(1, -1)
        elif arr.ndim != 2:
            raise ShapeError(f"tensors are 2-D, got shape {arr.shape}")
        self.data = np.ascontiguousarray(arr)
        self.grad = None
        self.requires_grad = requires_grad
        self.node_id = None  # index of the producing tape node, None for leaves

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a scalar, got shape {self.shape}")
        return float(self.data[0, 0])

    def zero_grad(self):
        self.grad = None

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


class _Node:
    __slots__ = ("output", "inputs", "backward_fn")

    def __init__(self, output, inputs, backward_fn):
        self.output = output
        self.inputs = inputs
        self.backward_fn = backward_fn


class Tape:
    """Ordered record of operations; inputs of every node precede it."""

    def __init__(self):
        self._nodes = []
        self._spent = False

    def __len__(self):
        return len(self._nodes)

    def record(self, output: Tensor, inputs, backward_fn) -> Tensor:
        output.node_id = len(self._nodes)
        output.requires_grad = any(t.requires_grad for t in inputs)
        self._nodes.append(_Node(output, tuple(inputs), backward_fn))
        return output

    def backward(self, loss: Tensor):
        """Reverse sweep from a scalar loss; grads accumulate additively."""
        if self._spent:
            raise TapeError("tape already swept; call reset() first")
        if loss.data.shape != (1, 1):
            raise TapeError(f"loss must be a scalar, got shape {loss.shape}")
        if loss.node_id is None or self._nodes[loss.node_id].output is not loss:
            raise TapeError("loss was not produced on this tape")
        self._spent = True
        loss.grad = np.ones((1, 1), dtype=np.float32)
        for node in reversed(self._nodes):
            dout = node.output.grad
            if dout is None:
                continue
            for t, g in zip(node.inputs, node.backward_fn(dout)):
                if g is not None and t.requires_grad:
                    t._accumulate(g)

    def reset(self):
        """Clear recorded nodes so the tape can be reused."""
        self._nodes.clear()
        self._spent = False


def backward(tape: Tape, loss: Tensor):
    """Populate grads of every tensor with requires_grad reachable from loss."""
    tape.backward(loss)


def _emit(tape, out, inputs, backward_fn):
    if tape is not None:
        tape.record(out, inputs, backward_fn)
    return out


def matmul(tape, a: Tensor, b: Tensor) -> Tensor:
    """Matrix product [m x k] @ [k x n] -> [m x n]."""
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dimensions disagree: {a.shape} @ {b.shape}")
    out = Tensor(a.data @ b.data)

    def bwd(dout):
        da = dout @ b.data.T if a.requires_grad else None
        db = a.data.T @ dout if b.requires_grad else None
        return da, db

    return _emit(tape, out, (a, b), bwd)


def apply_unary(tape, kind, x: Tensor) -> Tensor:
    """Elementwise basis function; backward uses the analytic derivative."""
    name = kind.name if isinstance(kind, BasisKind) else kind
    if name not in UNARY_OP_KINDS:
        raise UnsupportedKindError(
            f"apply_unary supports {UNARY_OP_KINDS}, got {name!r}"
        )
    out = Tensor(kernels.unary_values(name, x.data))

    def bwd(dout):
        return (dout * kernels.unary_derivs(name, x.data),)

    return _emit(tape, out, (x,), bwd)


def silu(tape, x: Tensor) -> Tensor:
    """x * sigmoid(x), the base-branch activation of the spline models."""
    out = Tensor(kernels.unary_values("silu", x.data))

    def bwd(dout):
        return (dout * kernels.unary_derivs("silu", x.data),)

    return _emit(tape, out, (x,), bwd)


def elementwise(tape, op: str, a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum or Hadamard product of same-shape tensors."""
    if a.shape != b.shape:
        raise ShapeError(f"elementwise {op} needs equal shapes: {a.shape} vs {b.shape}")
    if op == "add":
        out = Tensor(a.data + b.data)

        def bwd(dout):
            return dout, dout

    elif op == "mul":
        out = Tensor(a.data * b.data)

        def bwd(dout):
            return dout * b.data, dout * a.data

    else:
        raise ValueError(f"elementwise op must be 'add' or 'mul', got {op!r}")
    return _emit(tape, out, (a, b), bwd)


def layer_norm(tape, x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Per-row normalization to zero mean / unit variance, then affine."""
    d = x.shape[1]
    if d == 0:
        raise ShapeError("layer_norm on empty rows")
    if gamma.shape != (1, d) or beta.shape != (1, d):
        raise ShapeError(
            f"affine params must be [1 x {d}], got {gamma.shape} and {beta.shape}"
        )
    mu = x.data.mean(axis=1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(var + np.float32(eps))
    y = xc * inv
    out = Tensor(y * gamma.data + beta.data)

    def bwd(dout):
        dgamma = (dout * y).sum(axis=0, keepdims=True) if gamma.requires_grad else None
        dbeta = dout.sum(axis=0, keepdims=True) if beta.requires_grad else None
        dx = None
        if x.requires_grad:
            dy = dout * gamma.data
            dx = inv * (
                dy
                - dy.mean(axis=1, keepdims=True)
                - y * (dy * y).mean(axis=1, keepdims=True)
            )
        return dx, dgamma, dbeta

    return _emit(tape, out, (x, gamma, beta), bwd)


def softmax_cross_entropy(tape, logits: Tensor, labels) -> Tensor:
    """Mean over rows of -log softmax(logits)[label]; returns a 1x1 tensor."""
    labels = np.asarray(labels, dtype=np.int64).ravel()
    m, c = logits.shape
    if labels.shape[0] != m:
        raise ShapeError(f"{m} rows of logits but {labels.shape[0]} labels")
    bad = np.nonzero((labels < 0) | (labels >= c))[0]
    if bad.size:
        i = int(bad[0])
        raise LabelError(f"label {int(labels[i])} at index {i} outside [0, {c})")
    # softmax in float64 so near-zero losses keep their value
    z = logits.data.astype(np.float64)
    z -= z.max(axis=1, keepdims=True)
    ez = np.exp(z)
    probs = ez / ez.sum(axis=1, keepdims=True)
    logp = z - np.log(ez.sum(axis=1, keepdims=True))
    loss = -logp[np.arange(m), labels].mean()
    out = Tensor(np.asarray([[loss]]))

    def bwd(dout):
        if not logits.requires_grad:
            return (None,)
        g = probs.astype(np.float32)
        g[np.arange(m), labels] -= 1.0
        return (g * (dout[0, 0] / np.float32(m)),)

    return _emit(tape, out, (logits,), bwd)


def sum_all(tape, x: Tensor) -> Tensor:
    """Sum of all elements as a 1x1 tensor."""
    out = Tensor(np.asarray([[x.data.sum(dtype=np.float64)]]))

    def bwd(dout):
        return (np.full_like(x.data, dout[0, 0]),)

    return _emit(tape, out, (x,), bwd)


def basis_expand(tape, x: Tensor, kind: BasisKind) -> Tensor:
    """Expand each entry of [m x d] to its basis vector, giving [m x d*nb].

    Column block i*nb..(i+1)*nb-1 holds the nb basis values of input
    feature i, matching the row layout of the spline weight matrices.
    """
    if kind.is_elementwise:
        raise UnsupportedKindError(f"basis_expand needs a grid kind, got {kind.name!r}")
    spec = grid_spec(kind)
    m, d = x.shape
    nb = kind.num_basis
    flat = x.data.ravel().astype(np.float64)
    if kind.name == "bspline":
        vals = kernels.bspline_values(flat, spec.centers, kind.spline_order)
    else:
        vals = kernels.rbf_values(flat, spec.centers, spec.bandwidth)
    out = Tensor(vals.reshape(m, d * nb).astype(np.float32))

    def bwd(dout):
        if not x.requires_grad:
            return (None,)
        if kind.name == "bspline":
            derivs = kernels.bspline_derivs(flat, spec.centers, kind.spline_order)
        else:
            derivs = kernels.rbf_derivs(flat, spec.centers, spec.bandwidth)
        dx = (dout.reshape(m * d, nb) * derivs).sum(axis=1)
        return (dx.reshape(m, d).astype(np.float32),)

    return _emit(tape, out, (x,), bwd)


def repeat_rows(tape, s: Tensor, k: int) -> Tensor:
    """Repeat each row k times: [r x c] -> [r*k x c].

    Lets a per-feature scaler multiply a spline weight matrix whose rows
    come in blocks of k basis functions per feature.
    """
    out = Tensor(np.repeat(s.data, k, axis=0))
    r, c = s.shape

    def bwd(dout):
        return (dout.reshape(r, k, c).sum(axis=1),)

    return _emit(tape, out, (s,), bwd)
