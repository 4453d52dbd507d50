"""Dense float64 tensors with a dynamically built reverse-mode tape.

Only the ops the VAE and the 2D CNN classifier need are provided; there is
no general broadcasting. Every stored value is checked finite at creation,
which covers every op boundary since ops construct new Tensors.
"""

import contextlib

import numpy as np

from . import conv as _conv
from .errors import (
    GraphConsumed,
    NonFiniteValue,
    NonPositiveExtent,
    NotScalar,
    ShapeMismatch,
)

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable tape construction (inference / finite differences)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "_consumed")

    def __init__(self, data, requires_grad=False):
        arr = np.ascontiguousarray(data, dtype=np.float64)
        if not np.isfinite(arr).all():
            raise NonFiniteValue("tensor contains NaN or Inf")
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._parents = ()
        self._backward = None
        self._consumed = False

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def item(self):
        if self.data.size != 1:
            raise NotScalar(f"item() on tensor of shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def detach(self):
        return Tensor(self.data.copy())

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # small sugar; heavy lifting stays in the module-level ops
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return mul(self, other)
        return scale(self, float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return scale(self, -1.0)


def _result(data, parents, backward_fn):
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward_fn
    return out


def _toposort(root):
    order, visited, stack = [], set(), [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited:
                stack.append((p, False))
    return order


def backward(loss):
    """Populate .grad on every requires_grad tensor reachable from `loss`.

    The tape is single-shot: a second backward through the same graph raises
    GraphConsumed. Intermediate buffers are released during the sweep.
    """
    if loss.data.size != 1:
        raise NotScalar(f"backward() needs a scalar loss, got shape {loss.shape}")
    if loss._consumed:
        raise GraphConsumed("backward() already ran on this graph")
    if not loss.requires_grad:
        raise GraphConsumed("loss does not depend on any requires_grad tensor")
    order = _toposort(loss)
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        node._consumed = True
        fn = node._backward
        if fn is None:
            continue
        grads = fn(node.grad)
        for parent, g in zip(node._parents, grads):
            if g is None or not parent.requires_grad:
                continue
            if parent.grad is None:
                parent.grad = np.zeros_like(parent.data)
            parent.grad += g
        node._backward = None
        node._parents = ()
        if node is not loss:
            node.grad = None


# ---------------------------------------------------------------------------
# elementwise / reduction ops


def _same_shape(a, b, what):
    if a.shape != b.shape:
        raise ShapeMismatch(f"{what}: {a.shape} vs {b.shape}")


def add(a, b):
    _same_shape(a, b, "add")
    return _result(a.data + b.data, (a, b), lambda g: (g, g))


def sub(a, b):
    _same_shape(a, b, "sub")
    return _result(a.data - b.data, (a, b), lambda g: (g, -g))


def mul(a, b):
    _same_shape(a, b, "mul")
    return _result(a.data * b.data, (a, b), lambda g: (g * b.data, g * a.data))


def scale(a, c):
    c = float(c)
    return _result(a.data * c, (a,), lambda g: (g * c,))


def add_scalar(a, c):
    return _result(a.data + float(c), (a,), lambda g: (g,))


def exp(a):
    out = np.exp(a.data)
    return _result(out, (a,), lambda g: (g * out,))


def sum_all(a):
    return _result(
        np.array([a.data.sum()]), (a,), lambda g: (np.full_like(a.data, g[0]),)
    )


def mean_all(a):
    n = a.data.size
    return _result(
        np.array([a.data.mean()]), (a,), lambda g: (np.full_like(a.data, g[0] / n),)
    )


def reshape(a, shape):
    shape = tuple(int(s) for s in shape)
    return _result(
        a.data.reshape(shape), (a,), lambda g: (g.reshape(a.data.shape),)
    )


def flatten(a):
    return reshape(a, (a.shape[0], -1) if a.data.ndim > 1 else (-1,))


def concat_channels(parts):
    """Concatenate along axis 1 (the channel axis)."""
    data = np.concatenate([p.data for p in parts], axis=1)
    splits = np.cumsum([p.shape[1] for p in parts])[:-1]

    def bw(g):
        return tuple(np.ascontiguousarray(s) for s in np.split(g, splits, axis=1))

    return _result(data, tuple(parts), bw)


# ---------------------------------------------------------------------------
# activations


def relu(a):
    mask = a.data > 0
    return _result(np.where(mask, a.data, 0.0), (a,), lambda g: (g * mask,))


def sigmoid(a):
    out = 1.0 / (1.0 + np.exp(-a.data))
    return _result(out, (a,), lambda g: (g * out * (1.0 - out),))


def softmax_rows(a):
    if a.data.ndim != 2:
        raise ShapeMismatch(f"softmax needs a rank-2 input, got {a.shape}")
    shifted = a.data - a.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=1, keepdims=True)

    def bw(g):
        dot = (g * out).sum(axis=1, keepdims=True)
        return (out * (g - dot),)

    return _result(out, (a,), bw)


def activations(a, kind):
    """Dispatch by name: relu | sigmoid | softmax (rowwise)."""
    table = {"relu": relu, "sigmoid": sigmoid, "softmax": softmax_rows}
    if kind not in table:
        raise ValueError(f"unknown activation {kind!r}")
    return table[kind](a)


# ---------------------------------------------------------------------------
# linear algebra


def matmul(a, w):
    if a.data.ndim != 2 or w.data.ndim != 2 or a.shape[1] != w.shape[0]:
        raise ShapeMismatch(f"matmul: {a.shape} @ {w.shape}")
    return _result(
        a.data @ w.data, (a, w), lambda g: (g @ w.data.T, a.data.T @ g)
    )


def add_channel_bias(x, b):
    """x (N, C, ...) + b (C,) broadcast over batch and spatial axes."""
    if b.data.ndim != 1 or x.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"bias: {x.shape} + {b.shape}")
    bshape = (1, b.shape[0]) + (1,) * (x.data.ndim - 2)
    axes = (0,) + tuple(range(2, x.data.ndim))

    def bw(g):
        return (g, g.sum(axis=axes))

    return _result(x.data + b.data.reshape(bshape), (x, b), bw)


def dense(x, w, b):
    """out = x @ w + b for x (N, I), w (I, O), b (O,)."""
    return add_channel_bias(matmul(x, w), b)


# ---------------------------------------------------------------------------
# convolutions


def _check_conv_shapes(x, k, stride, padding, transpose):
    if x.data.ndim != 5 or k.data.ndim != 5:
        raise ShapeMismatch(
            f"conv expects rank-5 input and kernel, got {x.shape} and {k.shape}"
        )
    if stride < 1 or padding < 0:
        raise ValueError(f"bad stride/padding: {stride}/{padding}")
    # conv kernel is (F, C, ...) acting on C channels; transposed conv maps
    # its F input channels through the same kernel onto C output channels
    chan_axis = 0 if transpose else 1
    if x.shape[1] != k.shape[chan_axis]:
        raise ShapeMismatch(
            f"channel mismatch: input has {x.shape[1]}, kernel {k.shape}"
        )


def conv3d(x, k, stride=1, padding=0):
    _check_conv_shapes(x, k, stride, padding, transpose=False)
    out_sp = [
        _conv.conv_out_extent(e, kk, stride, padding)
        for e, kk in zip(x.shape[2:], k.shape[2:])
    ]
    if min(out_sp) < 1:
        raise NonPositiveExtent(
            f"conv3d output extent {out_sp} for input {x.shape}, kernel {k.shape}"
        )
    y = _conv.conv3d_forward(x.data, k.data, stride, padding)
    x_spatial, k_spatial = x.shape[2:], k.shape[2:]
    xd, kd = x.data, k.data

    def bw(g):
        gi = _conv.conv3d_grad_input(g, kd, stride, padding, x_spatial)
        gk = _conv.conv3d_grad_kernel(g, xd, stride, padding, k_spatial)
        return (gi, gk)

    return _result(y, (x, k), bw)


def conv_transpose3d(x, k, stride=1, padding=0):
    _check_conv_shapes(x, k, stride, padding, transpose=True)
    out_sp = [
        _conv.conv_transpose_out_extent(e, kk, stride, padding)
        for e, kk in zip(x.shape[2:], k.shape[2:])
    ]
    if min(out_sp) < 1:
        raise NonPositiveExtent(
            f"conv_transpose3d output extent {out_sp} for input {x.shape}"
        )
    y = _conv.conv_transpose3d_forward(x.data, k.data, stride, padding)
    k_spatial = k.shape[2:]
    xd, kd = x.data, k.data

    def bw(g):
        gi = _conv.conv_transpose3d_grad_input(g, kd, stride, padding)
        gk = _conv.conv_transpose3d_grad_kernel(g, xd, stride, padding, k_spatial)
        return (gi, gk)

    return _result(y, (x, k), bw)


# ---------------------------------------------------------------------------
# pooling (2D, for the classifier)


def maxpool2d(x):
    """2x2 max pooling with stride 2 on (N, C, H, W); odd tails are dropped."""
    n, c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    view = x.data[:, :, : h2 * 2, : w2 * 2].reshape(n, c, h2, 2, w2, 2)
    patches = view.transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h2, w2, 4)
    idx = patches.argmax(axis=-1)
    out = np.take_along_axis(patches, idx[..., None], axis=-1)[..., 0]

    def bw(g):
        gp = np.zeros_like(patches)
        np.put_along_axis(gp, idx[..., None], g[..., None], axis=-1)
        gx = np.zeros_like(x.data)
        gx[:, :, : h2 * 2, : w2 * 2] = (
            gp.reshape(n, c, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(
                n, c, h2 * 2, w2 * 2
            )
        )
        return (gx,)

    return _result(out, (x,), bw)


def global_avg_pool2d(x):
    n, c, h, w = x.shape
    out = x.data.mean(axis=(2, 3))

    def bw(g):
        return (np.broadcast_to(g[:, :, None, None] / (h * w), x.data.shape).copy(),)

    return _result(out, (x,), bw)


# ---------------------------------------------------------------------------
# losses


def cross_entropy_logits(logits, labels):
    """Mean cross-entropy of rowwise softmax(logits) vs integer labels.

    Fused log-sum-exp form for stability; gradient is (softmax - onehot)/N.
    """
    if logits.data.ndim != 2:
        raise ShapeMismatch(f"cross entropy needs (N, K) logits, got {logits.shape}")
    y = np.asarray(labels, dtype=np.intp)
    if y.shape != (logits.shape[0],):
        raise ShapeMismatch(f"labels shape {y.shape} for logits {logits.shape}")
    z = logits.data
    zmax = z.max(axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(np.exp(z - zmax).sum(axis=1))
    n = z.shape[0]
    nll = (lse - z[np.arange(n), y]).mean()
    probs = np.exp(z - zmax)
    probs /= probs.sum(axis=1, keepdims=True)

    def bw(g):
        gz = probs.copy()
        gz[np.arange(n), y] -= 1.0
        return (gz * (g[0] / n),)

    return _result(np.array([nll]), (logits,), bw)
