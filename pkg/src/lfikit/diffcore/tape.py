"""Reverse-mode automatic differentiation over numpy arrays.

Deliberately not a general tensor graph: the operator set is fixed to what
the conditional-density losses need (affine maps, tanh, exp, log,
log-sum-exp, squares, triangular/PD solves and log-determinants).
All values are float64 ndarrays.
"""

from __future__ import annotations

import numpy as np

from ..errors import NumericError

_CHECK_FINITE = False


def set_check_finite(enabled: bool) -> None:
    """Enable per-operation finiteness checks (slow; meant for tests)."""
    global _CHECK_FINITE
    _CHECK_FINITE = bool(enabled)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `grad` down to `shape` (reverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Node:
    """One value in the recorded computation, with its adjoint slot."""

    __slots__ = ("value", "parents", "backward_fn", "requires_grad", "grad", "op")

    # keep numpy from consuming mixed ndarray/Node expressions elementwise;
    # binary ops then fall back to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, value, parents=(), backward_fn=None, requires_grad=False, op="leaf"):
        self.value = np.asarray(value, dtype=np.float64)
        self.parents = parents
        self.backward_fn = backward_fn
        self.requires_grad = requires_grad
        self.grad = None
        self.op = op
        if _CHECK_FINITE and not np.all(np.isfinite(self.value)):
            raise NumericError(f"non-finite value produced by op '{op}'")

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    # -- operator overloads ------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __rsub__(self, other):
        return add(mul(self, -1.0), other)

    def __truediv__(self, other):
        if isinstance(other, Node):
            return mul(self, powi(other, -1))
        return mul(self, 1.0 / np.asarray(other, dtype=np.float64))

    def __rtruediv__(self, other):
        return mul(powi(self, -1), other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __getitem__(self, idx):
        return take(self, idx)


def as_node(x) -> Node:
    if isinstance(x, Node):
        return x
    return Node(np.asarray(x, dtype=np.float64), op="const")


def leaf(value: np.ndarray) -> Node:
    """A differentiable input (parameter) node."""
    return Node(np.asarray(value, dtype=np.float64), requires_grad=True, op="param")


def _make(value, parents, backward_fn, op):
    req = any(p.requires_grad for p in parents)
    return Node(value, tuple(parents), backward_fn if req else None,
                requires_grad=req, op=op)


def value_of(x):
    """Underlying ndarray of a Node, or the input unchanged."""
    return x.value if isinstance(x, Node) else x


def is_node(x) -> bool:
    return isinstance(x, Node)


# -- elementwise -----------------------------------------------------------


def add(a, b):
    if not (isinstance(a, Node) or isinstance(b, Node)):
        return np.add(a, b)
    a, b = as_node(a), as_node(b)
    out = a.value + b.value

    def bwd(g, a=a, b=b):
        if a.requires_grad:
            _accum(a, _unbroadcast(g, a.value.shape))
        if b.requires_grad:
            _accum(b, _unbroadcast(g, b.value.shape))

    return _make(out, (a, b), bwd, "add")


def mul(a, b):
    if not (isinstance(a, Node) or isinstance(b, Node)):
        return np.multiply(a, b)
    a, b = as_node(a), as_node(b)
    out = a.value * b.value

    def bwd(g, a=a, b=b):
        if a.requires_grad:
            _accum(a, _unbroadcast(g * b.value, a.value.shape))
        if b.requires_grad:
            _accum(b, _unbroadcast(g * a.value, b.value.shape))

    return _make(out, (a, b), bwd, "mul")


def powi(a, n: int):
    """Integer power (n = -1 and 2 are the supported uses)."""
    if not isinstance(a, Node):
        return np.power(a, n)
    out = np.power(a.value, n)

    def bwd(g, a=a, n=n):
        _accum(a, g * n * np.power(a.value, n - 1))

    return _make(out, (a,), bwd, f"pow{n}")


def square(a):
    if not isinstance(a, Node):
        return np.square(a)
    out = np.square(a.value)

    def bwd(g, a=a):
        _accum(a, g * 2.0 * a.value)

    return _make(out, (a,), bwd, "square")


def exp(a):
    if not isinstance(a, Node):
        return np.exp(a)
    out = np.exp(a.value)

    def bwd(g, a=a, out=out):
        _accum(a, g * out)

    return _make(out, (a,), bwd, "exp")


def log(a):
    if not isinstance(a, Node):
        return np.log(a)
    out = np.log(a.value)

    def bwd(g, a=a):
        _accum(a, g / a.value)

    return _make(out, (a,), bwd, "log")


def tanh(a):
    if not isinstance(a, Node):
        return np.tanh(a)
    out = np.tanh(a.value)

    def bwd(g, a=a, out=out):
        _accum(a, g * (1.0 - out * out))

    return _make(out, (a,), bwd, "tanh")


# -- reductions ------------------------------------------------------------


def sum_(a, axis=None, keepdims=False):
    if not isinstance(a, Node):
        return np.sum(a, axis=axis, keepdims=keepdims)
    out = np.sum(a.value, axis=axis, keepdims=keepdims)

    def bwd(g, a=a, axis=axis, keepdims=keepdims):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        _accum(a, np.broadcast_to(g, a.value.shape).copy())

    return _make(out, (a,), bwd, "sum")


def mean_(a, axis=None, keepdims=False):
    if not isinstance(a, Node):
        return np.mean(a, axis=axis, keepdims=keepdims)
    n = a.value.size if axis is None else np.prod(
        [a.value.shape[ax] for ax in (axis if isinstance(axis, tuple) else (axis,))])
    return mul(sum_(a, axis=axis, keepdims=keepdims), 1.0 / float(n))


def logsumexp(a, axis=-1, keepdims=False):
    """Stable log(sum(exp(a))) along `axis`."""
    if not isinstance(a, Node):
        hi = np.max(a, axis=axis, keepdims=True)
        hi = np.where(np.isfinite(hi), hi, 0.0)
        out = np.log(np.sum(np.exp(a - hi), axis=axis, keepdims=True)) + hi
        return out if keepdims else np.squeeze(out, axis=axis)
    hi = np.max(a.value, axis=axis, keepdims=True)
    hi = np.where(np.isfinite(hi), hi, 0.0)
    ex = np.exp(a.value - hi)
    tot = np.sum(ex, axis=axis, keepdims=True)
    out = np.log(tot) + hi
    softmax = ex / tot

    def bwd(g, a=a, softmax=softmax, axis=axis, keepdims=keepdims):
        g = np.asarray(g)
        if not keepdims:
            g = np.expand_dims(g, axis)
        _accum(a, g * softmax)

    return _make(out if keepdims else np.squeeze(out, axis=axis), (a,), bwd, "logsumexp")


# -- linear algebra ---------------------------------------------------------


def matmul(a, b):
    if not (isinstance(a, Node) or isinstance(b, Node)):
        return np.matmul(a, b)
    a, b = as_node(a), as_node(b)
    if a.ndim < 2 or b.ndim < 2:
        raise NumericError("matmul operands must be at least 2-D")
    out = np.matmul(a.value, b.value)

    def bwd(g, a=a, b=b):
        if a.requires_grad:
            ga = np.matmul(g, np.swapaxes(b.value, -1, -2))
            _accum(a, _unbroadcast(ga, a.value.shape))
        if b.requires_grad:
            gb = np.matmul(np.swapaxes(a.value, -1, -2), g)
            _accum(b, _unbroadcast(gb, b.value.shape))

    return _make(out, (a, b), bwd, "matmul")


def take(a, idx):
    """Indexing/slicing; gradient scatters back with accumulation."""
    if not isinstance(a, Node):
        return a[idx]
    out = a.value[idx]

    def bwd(g, a=a, idx=idx):
        full = np.zeros_like(a.value)
        np.add.at(full, idx, g)
        _accum(a, full)

    return _make(out, (a,), bwd, "take")


def reshape(a, shape):
    if not isinstance(a, Node):
        return np.reshape(a, shape)
    out = np.reshape(a.value, shape)

    def bwd(g, a=a):
        _accum(a, np.reshape(g, a.value.shape))

    return _make(out, (a,), bwd, "reshape")


def swapaxes(a, ax1, ax2):
    if not isinstance(a, Node):
        return np.swapaxes(a, ax1, ax2)
    out = np.swapaxes(a.value, ax1, ax2)

    def bwd(g, a=a, ax1=ax1, ax2=ax2):
        _accum(a, np.swapaxes(g, ax1, ax2))

    return _make(out, (a,), bwd, "swapaxes")


def concat(parts, axis=-1):
    if not any(isinstance(p, Node) for p in parts):
        return np.concatenate(parts, axis=axis)
    parts = [as_node(p) for p in parts]
    out = np.concatenate([p.value for p in parts], axis=axis)
    sizes = [p.value.shape[axis] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def bwd(g, parts=parts, offsets=offsets, axis=axis):
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            if p.requires_grad:
                sl = [slice(None)] * g.ndim
                sl[axis] = slice(lo, hi)
                _accum(p, g[tuple(sl)])

    return _make(out, tuple(parts), bwd, "concat")


def build_tril(diag, lower, n: int):
    """Assemble lower-triangular matrices from diagonal and strict-lower entries.

    diag: (..., n); lower: (..., n*(n-1)/2) in row-major strict-lower order.
    Returns (..., n, n).
    """
    rows, cols = np.tril_indices(n, k=-1)
    drows = np.arange(n)
    if not (isinstance(diag, Node) or isinstance(lower, Node)):
        batch = np.broadcast_shapes(diag.shape[:-1], lower.shape[:-1] if n > 1 else diag.shape[:-1])
        out = np.zeros(batch + (n, n))
        out[..., drows, drows] = diag
        if n > 1:
            out[..., rows, cols] = lower
        return out
    diag, lower = as_node(diag), as_node(lower)
    batch = np.broadcast_shapes(diag.value.shape[:-1],
                                lower.value.shape[:-1] if n > 1 else diag.value.shape[:-1])
    out = np.zeros(batch + (n, n))
    out[..., drows, drows] = diag.value
    if n > 1:
        out[..., rows, cols] = lower.value

    def bwd(g, diag=diag, lower=lower):
        if diag.requires_grad:
            _accum(diag, _unbroadcast(g[..., drows, drows], diag.value.shape))
        if n > 1 and lower.requires_grad:
            _accum(lower, _unbroadcast(g[..., rows, cols], lower.value.shape))

    return _make(out, (diag, lower), bwd, "build_tril")


def tri_solve_lower(L, b):
    """Solve L y = b for lower-triangular L; batched over leading axes.

    L: (..., n, n), b: (..., n). Exact reverse-mode rules for the solve.
    """
    if not (isinstance(L, Node) or isinstance(b, Node)):
        return np.linalg.solve(L, b[..., None])[..., 0]
    L, b = as_node(L), as_node(b)
    y = np.linalg.solve(L.value, b.value[..., None])[..., 0]

    def bwd(g, L=L, b=b, y=y):
        # dL b = g  =>  db = L^{-T} g ; dL = -db y^T
        gb = np.linalg.solve(np.swapaxes(L.value, -1, -2), g[..., None])[..., 0]
        if b.requires_grad:
            _accum(b, _unbroadcast(gb, b.value.shape))
        if L.requires_grad:
            gL = -gb[..., :, None] * y[..., None, :]
            _accum(L, _unbroadcast(gL, L.value.shape))

    return _make(y, (L, b), bwd, "tri_solve_lower")


def matinv(a):
    """Batched matrix inverse."""
    if not isinstance(a, Node):
        return np.linalg.inv(a)
    out = np.linalg.inv(a.value)

    def bwd(g, a=a, out=out):
        outT = np.swapaxes(out, -1, -2)
        _accum(a, -np.matmul(outT, np.matmul(g, outT)))

    return _make(out, (a,), bwd, "matinv")


def posdef_solve(a, b):
    """Solve A y = b for symmetric positive-definite A; b: (..., n)."""
    if not (isinstance(a, Node) or isinstance(b, Node)):
        return np.linalg.solve(a, b[..., None])[..., 0]
    a, b = as_node(a), as_node(b)
    y = np.linalg.solve(a.value, b.value[..., None])[..., 0]

    def bwd(g, a=a, b=b, y=y):
        gb = np.linalg.solve(np.swapaxes(a.value, -1, -2), g[..., None])[..., 0]
        if b.requires_grad:
            _accum(b, _unbroadcast(gb, b.value.shape))
        if a.requires_grad:
            ga = -gb[..., :, None] * y[..., None, :]
            _accum(a, _unbroadcast(ga, a.value.shape))

    return _make(y, (a, b), bwd, "posdef_solve")


def posdef_logdet(a):
    """log det A for symmetric positive-definite A (batched)."""
    if not isinstance(a, Node):
        sign, ld = np.linalg.slogdet(a)
        if np.any(sign <= 0):
            raise NumericError("posdef_logdet: matrix not positive definite")
        return ld
    sign, ld = np.linalg.slogdet(a.value)
    if np.any(sign <= 0):
        raise NumericError("posdef_logdet: matrix not positive definite")

    def bwd(g, a=a):
        inv = np.linalg.inv(a.value)
        _accum(a, g[..., None, None] * np.swapaxes(inv, -1, -2))

    return _make(ld, (a,), bwd, "posdef_logdet")


# -- backward driver ---------------------------------------------------------


def _accum(node: Node, g: np.ndarray) -> None:
    if node.grad is None:
        node.grad = np.zeros_like(node.value)
    node.grad += g


def backward(loss: Node) -> None:
    """Run reverse accumulation from a scalar loss node."""
    if loss.value.shape != ():
        raise NumericError(f"backward expects a scalar, got shape {loss.value.shape}")
    if not np.isfinite(loss.value):
        raise NumericError("loss is non-finite")
    order = []
    visited = set()
    stack = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in visited:
            continue
        if expanded:
            visited.add(id(node))
            order.append(node)
        else:
            stack.append((node, True))
            for p in node.parents:
                if p.requires_grad and id(p) not in visited:
                    stack.append((p, False))
    loss.grad = np.ones_like(loss.value)
    for node in reversed(order):
        if node.backward_fn is not None and node.grad is not None:
            node.backward_fn(node.grad)
